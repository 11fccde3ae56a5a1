#include "ddp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ddp/errors.hpp"
#include "ddp/fft.hpp"

namespace ddp {

int cartesian_line_count(int width, double ratio) {
  return static_cast<int>(std::lround(static_cast<double>(width) / ratio));
}

std::vector<int> central_lines(int width) {
  std::vector<int> lines;
  const int c = width / 2;
  for (int i = c - kCenterLines / 2; i <= c + kCenterLines / 2; ++i) lines.push_back(i);
  return lines;
}

int line_to_dft_column(int line, int width) { return ((line - width / 2) % width + width) % width; }

namespace {

// Efraimidis-Spirakis keys: taking the k largest log(u)/w is equivalent to
// sequential weighted draws without replacement.
CartesianMask draw_candidate(int height, int width, int total, const std::vector<int>& center,
                             const std::vector<double>& weights, Rng& rng) {
  std::vector<std::pair<double, int>> keys;
  keys.reserve(width);
  std::vector<bool> taken(width, false);
  for (int c : center) taken[c] = true;
  for (int i = 0; i < width; ++i) {
    const double key = std::log(rng.uniform_open0()) / weights[i];
    if (!taken[i]) keys.emplace_back(key, i);
  }
  const int extra = total - static_cast<int>(center.size());
  std::partial_sort(keys.begin(), keys.begin() + extra, keys.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  CartesianMask m;
  m.height = height;
  m.width = width;
  m.lines = center;
  for (int i = 0; i < extra; ++i) m.lines.push_back(keys[i].second);
  std::sort(m.lines.begin(), m.lines.end());
  return m;
}

}  // namespace

MaskCohort gen_cartesian_cohort(int height, int width, const CartesianMaskOptions& opts, Rng& rng) {
  if (opts.ratio < 1.0) throw InvalidArgument("undersampling ratio must be >= 1");
  if (height < 1 || width < 1) throw InvalidArgument("mask dimensions must be positive");
  if (opts.n_candidates < 1) throw InvalidArgument("need at least one candidate");
  const int total = cartesian_line_count(width, opts.ratio);
  if (total < kCenterLines)
    throw CenterTooWide("round(width/R) = " + std::to_string(total) + " is fewer than the " +
                        std::to_string(kCenterLines) + " central lines");
  const auto center = central_lines(width);

  const double sigma = opts.sigma_fraction * width;
  std::vector<double> weights(width);
  for (int i = 0; i < width; ++i) {
    const double d = static_cast<double>(i - width / 2) / sigma;
    weights[i] = std::exp(-0.5 * d * d);
  }

  MaskCohort cohort;
  for (int n = 0; n < opts.n_candidates; ++n) {
    CartesianMask m = draw_candidate(height, width, total, center, weights, rng);
    m.ratio = opts.ratio;
    m.seed = rng.seed();
    cohort.scores.push_back(peak_to_side_ratio(m));
    cohort.candidates.push_back(std::move(m));
  }
  cohort.selected = static_cast<std::size_t>(
      std::max_element(cohort.scores.begin(), cohort.scores.end()) - cohort.scores.begin());
  return cohort;
}

CartesianMask gen_cartesian_mask(int height, int width, const CartesianMaskOptions& opts, Rng& rng) {
  auto cohort = gen_cartesian_cohort(height, width, opts, rng);
  return std::move(cohort.candidates[cohort.selected]);
}

double peak_to_side_ratio(const CartesianMask& mask) {
  if (mask.lines.empty() || mask.width < 1) throw InvalidArgument("peak_to_side_ratio needs a non-empty mask");
  std::vector<cplx> indicator(mask.width, 0.0);
  for (int l : mask.lines) indicator[line_to_dft_column(l, mask.width)] = 1.0;
  const auto psf = fft1(indicator, FftDirection::Inverse);
  const double peak = std::abs(psf[0]);
  double side = 0.0;
  for (std::size_t k = 1; k < psf.size(); ++k) side = std::max(side, std::abs(psf[k]));
  // Side lobes at round-off level count as absent.
  if (side <= 1e-12 * peak) return kPsrSentinel;
  return peak / side;
}

RealImage mask_image(const CartesianMask& mask) {
  RealImage img = RealImage::Zero(mask.height, mask.width);
  for (int l : mask.lines) img.col(l).setOnes();
  return img;
}

CartesianMask mask_from_image(const RealImage& img) {
  CartesianMask m;
  m.height = static_cast<int>(img.rows());
  m.width = static_cast<int>(img.cols());
  for (int c = 0; c < m.width; ++c) {
    const bool on = img(0, c) != 0.0;
    for (int r = 1; r < m.height; ++r)
      if ((img(r, c) != 0.0) != on) throw InvalidArgument("mask column " + std::to_string(c) + " is not a full line");
    if (on) m.lines.push_back(c);
  }
  if (m.lines.empty()) throw InvalidArgument("mask has no sampled lines");
  m.ratio = static_cast<double>(m.width) / static_cast<double>(m.lines.size());
  return m;
}

RadialTrajectory gen_radial_trajectory(int size, double ratio) {
  if (size < 4) throw InvalidArgument("radial trajectory needs size >= 4");
  if (ratio < 1.0) throw InvalidArgument("undersampling ratio must be >= 1");
  RadialTrajectory t;
  t.spokes = static_cast<int>(std::ceil(std::numbers::pi / 2.0 * size / ratio));
  t.samples_per_spoke = size;
  t.points.reserve(static_cast<std::size_t>(t.spokes) * size);
  for (int s = 0; s < t.spokes; ++s) {
    const double theta = std::numbers::pi * s / t.spokes;
    const double c = std::cos(theta), sn = std::sin(theta);
    for (int j = 0; j < size; ++j) {
      const double k = static_cast<double>(j - size / 2) / size;
      t.points.push_back({k * c, k * sn});
    }
  }
  return t;
}

}  // namespace ddp
