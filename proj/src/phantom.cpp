#include "ddp/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>

#include "ddp/errors.hpp"

namespace ddp {
namespace {

constexpr double kPi = std::numbers::pi;

double jitter(Rng& rng, double amplitude) { return amplitude * (2.0 * rng.uniform() - 1.0); }

struct Ellipse {
  double cx, cy, a, b, angle;

  bool contains(double x, double y) const {
    const double c = std::cos(angle), s = std::sin(angle);
    const double u = (c * (x - cx) + s * (y - cy)) / a;
    const double v = (-s * (x - cx) + c * (y - cy)) / b;
    return u * u + v * v <= 1.0;
  }
};

RealImage gaussian_blur(const RealImage& img, double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * r + 1);
  double ksum = 0.0;
  for (int i = -r; i <= r; ++i) ksum += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& v : k) v /= ksum;
  const Eigen::Index h = img.rows(), w = img.cols();
  RealImage tmp = RealImage::Zero(h, w), out = RealImage::Zero(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x)
      for (int i = -r; i <= r; ++i)
        if (x + i >= 0 && x + i < w) tmp(y, x) += k[i + r] * img(y, x + i);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x)
      for (int i = -r; i <= r; ++i)
        if (y + i >= 0 && y + i < h) out(y, x) += k[i + r] * tmp(y + i, x);
  return out;
}

}  // namespace

ComplexImage Phantom::complex_image() const {
  ComplexImage m(magnitude.rows(), magnitude.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std::polar(magnitude.data()[i], phase.data()[i]);
  return m;
}

Phantom gen_phantom(int height, int width, Rng& rng) {
  if (height < 32 || width < 32) throw InvalidArgument("phantom dimensions must be at least 32");
  Phantom ph;
  ph.seed = rng.seed();

  const double cx = 0.5 * (width - 1) + jitter(rng, 0.02 * width);
  const double cy = 0.5 * (height - 1) + jitter(rng, 0.02 * height);
  const double ax = 0.42 * width * (1.0 + jitter(rng, 0.05));
  const double ay = 0.45 * height * (1.0 + jitter(rng, 0.05));
  const double tilt = jitter(rng, 0.15);

  // WM boundary radius (in head-normalised units) with two folding harmonics.
  const int n1 = 5 + static_cast<int>(rng.uniform_int(3));
  const int n2 = 9 + static_cast<int>(rng.uniform_int(4));
  const double p1 = 2.0 * kPi * rng.uniform(), p2 = 2.0 * kPi * rng.uniform();
  const double a1 = 0.07 * (1.0 + jitter(rng, 0.3)), a2 = 0.04 * (1.0 + jitter(rng, 0.3));
  const double rim = 0.93;

  // Sulci: thin CSF wedges entering the cortex from the rim.
  const int n_sulci = 6 + static_cast<int>(rng.uniform_int(5));
  std::vector<double> sulci(n_sulci);
  for (auto& s : sulci) s = 2.0 * kPi * rng.uniform();

  const double s = std::min(ax, ay);
  const double vent_gap = 0.10 * s * (1.0 + jitter(rng, 0.2));
  const Ellipse vent_l{cx - vent_gap, cy + jitter(rng, 0.03 * s), 0.07 * s, 0.22 * s, 0.25 + jitter(rng, 0.1)};
  const Ellipse vent_r{cx + vent_gap, cy + jitter(rng, 0.03 * s), 0.07 * s, 0.22 * s, -0.25 + jitter(rng, 0.1)};
  const double deep_gap = 0.33 * s * (1.0 + jitter(rng, 0.1));
  const Ellipse deep_l{cx - deep_gap, cy + 0.05 * s, 0.09 * s, 0.16 * s, jitter(rng, 0.3)};
  const Ellipse deep_r{cx + deep_gap, cy + 0.05 * s, 0.09 * s, 0.16 * s, jitter(rng, 0.3)};

  const double i_wm = 0.7 + jitter(rng, 0.03);
  const double i_gm = 0.45 + jitter(rng, 0.03);
  const double i_csf = 0.9 + jitter(rng, 0.03);

  ph.labels = LabelImage::Zero(height, width);
  RealImage raw = RealImage::Zero(height, width);
  BoolImage head = BoolImage::Constant(height, width, false);
  const double ct = std::cos(tilt), st = std::sin(tilt);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double u = (ct * dx + st * dy) / ax;
      const double v = (-st * dx + ct * dy) / ay;
      const double rho = std::sqrt(u * u + v * v);
      if (rho > 1.0) continue;
      head(y, x) = true;
      const double theta = std::atan2(v, u);
      const double r_wm = 0.72 + a1 * std::sin(n1 * theta + p1) + a2 * std::sin(n2 * theta + p2);
      std::uint8_t label;
      if (rho > rim) {
        label = kCsf;
      } else if (rho > r_wm) {
        label = kGrayMatter;
        for (double sa : sulci) {
          const double d = std::remainder(theta - sa, 2.0 * kPi);
          if (std::abs(d) * rho * s < 0.6 && rho > 0.5 * (r_wm + rim)) label = kCsf;
        }
      } else {
        label = kWhiteMatter;
        if (deep_l.contains(x, y) || deep_r.contains(x, y)) label = kGrayMatter;
        if (vent_l.contains(x, y) || vent_r.contains(x, y)) label = kCsf;
      }
      ph.labels(y, x) = label;
      raw(y, x) = label == kWhiteMatter ? i_wm : label == kGrayMatter ? i_gm : i_csf;
    }

  RealImage mag = gaussian_blur(raw, 0.6);
  const double bias_a = jitter(rng, 1.0), bias_b = jitter(rng, 1.0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      if (!head(y, x)) {
        mag(y, x) = 0.0;
        continue;
      }
      const double u = (x - cx) / ax, v = (y - cy) / ay;
      mag(y, x) = std::clamp(mag(y, x) * (1.0 + 0.08 * (bias_a * u + bias_b * v)), 0.0, 1.0);
    }
  ph.magnitude = mag;

  double c[6];
  c[0] = jitter(rng, kPi / 2);
  for (int i = 1; i < 3; ++i) c[i] = jitter(rng, 0.8);
  for (int i = 3; i < 6; ++i) c[i] = jitter(rng, 0.4);
  ph.phase.resize(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double u = (x - cx) / ax, v = (y - cy) / ay;
      ph.phase(y, x) = c[0] + c[1] * u + c[2] * v + c[3] * u * v + c[4] * u * u + c[5] * v * v;
    }
  return ph;
}

Phantom gen_phantom(int height, int width, std::uint64_t seed) {
  Rng rng(seed);
  return gen_phantom(height, width, rng);
}

void add_training_noise(PatchSet& set, double sigma, Rng& rng) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("noise sigma must be finite and >= 0");
  if (sigma == 0.0) return;
  for (Eigen::Index i = 0; i < set.patches.size(); ++i) set.patches.data()[i] = std::max(0.0, set.patches.data()[i] + sigma * rng.normal());
}

RealImage normalized_magnitude(const Phantom& ph) {
  const double q = percentile_nearest_rank(ph.magnitude, 99.0);
  if (!(q > 0.0)) throw InvalidArgument("phantom magnitude is zero at its 99th percentile");
  return ph.magnitude / q;
}

PatchSet extract_training_patches(const std::vector<Phantom>& phantoms, int patch, int count, Rng& rng,
                                  double anywhere_fraction) {
  if (count < 1) throw InvalidArgument("patch count must be >= 1");
  if (!(anywhere_fraction >= 0.0 && anywhere_fraction <= 1.0))
    throw InvalidArgument("anywhere fraction must lie in [0, 1]");
  if (patch < 1) throw InvalidArgument("patch size must be positive");
  if (phantoms.empty()) throw InvalidArgument("no source images");

  std::vector<RealImage> sources;
  std::vector<std::vector<std::pair<int, int>>> valid(phantoms.size());
  std::vector<std::pair<int, int>> dims;
  std::size_t total = 0, all_total = 0;
  for (std::size_t i = 0; i < phantoms.size(); ++i) {
    const auto& ph = phantoms[i];
    if (patch > ph.magnitude.rows() || patch > ph.magnitude.cols())
      throw InvalidArgument("patch size exceeds source image " + std::to_string(i));
    sources.push_back(normalized_magnitude(ph));
    for (int r = 0; r + patch <= ph.labels.rows(); ++r)
      for (int c = 0; c + patch <= ph.labels.cols(); ++c)
        if (ph.labels(r + patch / 2, c + patch / 2) != kBackground) valid[i].emplace_back(r, c);
    total += valid[i].size();
    dims.emplace_back(static_cast<int>(ph.labels.rows()) - patch + 1, static_cast<int>(ph.labels.cols()) - patch + 1);
    all_total += static_cast<std::size_t>(dims.back().first) * static_cast<std::size_t>(dims.back().second);
  }
  if (total == 0) throw InvalidArgument("no patch position is centred on tissue");

  PatchSet set;
  set.patch = patch;
  set.patches.resize(patch * patch, count);
  for (int n = 0; n < count; ++n) {
    std::size_t src = 0;
    int r = 0, c = 0;
    // The extra uniform draw only happens when the option is on, so the
    // default stream matches plain tissue-centred sampling.
    if (anywhere_fraction > 0.0 && rng.uniform() < anywhere_fraction) {
      std::size_t k = rng.uniform_int(all_total);
      auto size_of = [&](std::size_t i) {
        return static_cast<std::size_t>(dims[i].first) * static_cast<std::size_t>(dims[i].second);
      };
      while (k >= size_of(src)) k -= size_of(src++);
      r = static_cast<int>(k / static_cast<std::size_t>(dims[src].second));
      c = static_cast<int>(k % static_cast<std::size_t>(dims[src].second));
    } else {
      // Uniform over all tissue-centred (source, origin) pairs.
      std::size_t k = rng.uniform_int(total);
      while (k >= valid[src].size()) k -= valid[src++].size();
      std::tie(r, c) = valid[src][k];
    }
    for (int y = 0; y < patch; ++y)
      for (int x = 0; x < patch; ++x) set.patches(y * patch + x, n) = sources[src](r + y, c + x);
    set.provenance.push_back({static_cast<int>(src), r, c});
  }
  return set;
}

TensorFile phantom_to_file(const Phantom& ph) {
  TensorFile f;
  f.meta["kind"] = "phantom";
  f.meta["seed"] = ph.seed;
  f.add("magnitude", to_tensor(ph.magnitude));
  f.add("phase", to_tensor(ph.phase));
  f.add("labels", to_tensor(ph.labels));
  return f;
}

Phantom phantom_from_file(const TensorFile& file) {
  Phantom ph;
  ph.magnitude = to_real_image(file.at("magnitude"));
  ph.phase = to_real_image(file.at("phase"));
  ph.labels = to_label_image(file.at("labels"));
  if (ph.phase.rows() != ph.magnitude.rows() || ph.phase.cols() != ph.magnitude.cols() ||
      ph.labels.rows() != ph.magnitude.rows() || ph.labels.cols() != ph.magnitude.cols())
    throw FormatError("phantom entries have inconsistent shapes");
  ph.seed = file.meta.value("seed", std::uint64_t{0});
  return ph;
}

TensorFile patchset_to_file(const PatchSet& set) {
  TensorFile f;
  f.meta["kind"] = "patch_set";
  f.meta["patch"] = set.patch;
  const auto n = static_cast<std::size_t>(set.size());
  const auto p = static_cast<std::size_t>(set.patch);
  f.add("patches", Tensor({n, p, p}, std::vector<double>(set.patches.data(), set.patches.data() + set.patches.size())));
  std::vector<double> prov;
  prov.reserve(3 * n);
  for (const auto& s : set.provenance) {
    prov.push_back(s.source);
    prov.push_back(s.row);
    prov.push_back(s.col);
  }
  f.add("provenance", Tensor({n, 3}, std::move(prov)));
  return f;
}

PatchSet patchset_from_file(const TensorFile& file) {
  const Tensor& t = file.at("patches");
  if (t.shape().size() != 3 || t.shape()[1] != t.shape()[2]) throw FormatError("patches must be [N, p, p]");
  PatchSet set;
  set.patch = static_cast<int>(t.shape()[1]);
  const auto n = static_cast<Eigen::Index>(t.shape()[0]);
  const auto values = t.as_real();
  set.patches = Eigen::Map<const Eigen::MatrixXd>(values.data(), set.patch * set.patch, n);
  if (const Tensor* prov = file.find("provenance")) {
    if (prov->shape() != Shape{static_cast<std::size_t>(n), 3}) throw FormatError("provenance must be [N, 3]");
    const auto pv = prov->as_real();
    for (Eigen::Index i = 0; i < n; ++i)
      set.provenance.push_back({static_cast<int>(pv[3 * i]), static_cast<int>(pv[3 * i + 1]), static_cast<int>(pv[3 * i + 2])});
  }
  return set;
}

}  // namespace ddp
