#pragma once

#include <optional>

#include "ddp/types.hpp"

namespace ddp {

struct SegMasks {
  BoolImage gm;
  BoolImage wm;
  std::optional<BoolImage> eval;  // restricts rmse when present
};

/// Label convention of the phantoms: 1 WM, 2 GM, 3 CSF, 0 background.
SegMasks seg_masks_from_labels(const LabelImage& labels);

/// 100 * sqrt(sum (|gt| - |rec|)^2 / sum |gt|^2) over the mask (all pixels by default).
double rmse(const ComplexImage& gt, const ComplexImage& rec, const BoolImage* mask = nullptr);
double rmse(const RealImage& gt, const RealImage& rec, const BoolImage* mask = nullptr);

/// Root mean square of the wrapped phase difference over the mask.
double phase_rmse(const ComplexImage& gt, const ComplexImage& rec, const BoolImage& mask);

/// WM \ erode(WM, k).
BoolImage boundary_band(const BoolImage& wm, int k = 7);

/// |mean_GM - mean_WMband| / (std_GM + std_WMband) of |rec|, population std.
double cnr(const ComplexImage& rec, const SegMasks& masks);
/// |mean_GM - mean_WMband| of |rec|.
double cn(const ComplexImage& rec, const SegMasks& masks);

/// True where the whole k x k neighbourhood is true; outside counts as false.
BoolImage binary_erode(const BoolImage& mask, int k = 7);

}  // namespace ddp
