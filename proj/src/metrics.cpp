#include "ddp/metrics.hpp"

#include <cmath>

#include "ddp/errors.hpp"

namespace ddp {
namespace {

template <typename A, typename B>
void check_dims(const A& a, const B& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError(std::string(what) + ": image sizes differ");
}

double rmse_mag(const RealImage& gt, const RealImage& rec, const BoolImage* mask) {
  check_dims(gt, rec, "rmse");
  if (mask) check_dims(gt, *mask, "rmse mask");
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < gt.size(); ++i) {
    if (mask && !mask->data()[i]) continue;
    const double d = gt.data()[i] - rec.data()[i];
    num += d * d;
    den += gt.data()[i] * gt.data()[i];
  }
  if (!(den > 0.0)) throw InvalidArgument("rmse: ground truth has zero energy inside the mask");
  return 100.0 * std::sqrt(num / den);
}

struct RegionStats {
  double mean = 0.0;
  double stddev = 0.0;
};

RegionStats region_stats(const RealImage& values, const BoolImage& mask, const char* name) {
  check_dims(values, mask, name);
  const Eigen::Index n = mask.count();
  if (n == 0) throw InvalidArgument(std::string(name) + " region is empty");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (mask.data()[i]) sum += values.data()[i];
  RegionStats s;
  s.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (mask.data()[i]) ss += (values.data()[i] - s.mean) * (values.data()[i] - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(n));
  return s;
}

std::pair<RegionStats, RegionStats> gm_wm_stats(const ComplexImage& rec, const SegMasks& masks) {
  const RealImage mag = rec.abs();
  return {region_stats(mag, masks.gm, "GM"), region_stats(mag, boundary_band(masks.wm), "WM boundary band")};
}

}  // namespace

SegMasks seg_masks_from_labels(const LabelImage& labels) {
  SegMasks m;
  m.wm = labels == 1;
  m.gm = labels == 2;
  m.eval = labels != 0;
  return m;
}

double rmse(const RealImage& gt, const RealImage& rec, const BoolImage* mask) { return rmse_mag(gt, rec, mask); }

double rmse(const ComplexImage& gt, const ComplexImage& rec, const BoolImage* mask) {
  check_dims(gt, rec, "rmse");
  return rmse_mag(gt.abs(), rec.abs(), mask);
}

double phase_rmse(const ComplexImage& gt, const ComplexImage& rec, const BoolImage& mask) {
  check_dims(gt, rec, "phase_rmse");
  check_dims(gt, mask, "phase_rmse mask");
  const Eigen::Index n = mask.count();
  if (n == 0) throw InvalidArgument("phase_rmse: empty mask");
  double ss = 0.0;
  for (Eigen::Index i = 0; i < gt.size(); ++i) {
    if (!mask.data()[i]) continue;
    const double d = std::arg(rec.data()[i] * std::conj(gt.data()[i]));
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(n));
}

BoolImage binary_erode(const BoolImage& mask, int k) {
  if (k < 1 || k % 2 == 0) throw InvalidArgument("structuring element size must be odd and positive");
  const int r = k / 2;
  const Eigen::Index h = mask.rows(), w = mask.cols();
  // Separable: a k x k box is all-true iff every row run and column run is.
  BoolImage rows_ok = BoolImage::Constant(h, w, false);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      if (x - r < 0 || x + r >= w) continue;
      bool ok = true;
      for (Eigen::Index d = -r; d <= r && ok; ++d) ok = mask(y, x + d);
      rows_ok(y, x) = ok;
    }
  BoolImage out = BoolImage::Constant(h, w, false);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      if (y - r < 0 || y + r >= h) continue;
      bool ok = true;
      for (Eigen::Index d = -r; d <= r && ok; ++d) ok = rows_ok(y + d, x);
      out(y, x) = ok;
    }
  return out;
}

BoolImage boundary_band(const BoolImage& wm, int k) { return wm && !binary_erode(wm, k); }

double cnr(const ComplexImage& rec, const SegMasks& masks) {
  const auto [gm, wm] = gm_wm_stats(rec, masks);
  const double spread = gm.stddev + wm.stddev;
  if (!(spread > 0.0)) throw InvalidArgument("cnr: both regions are constant");
  return std::abs(gm.mean - wm.mean) / spread;
}

double cn(const ComplexImage& rec, const SegMasks& masks) {
  const auto [gm, wm] = gm_wm_stats(rec, masks);
  return std::abs(gm.mean - wm.mean);
}

}  // namespace ddp
