#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Core>

namespace ddp {

using cplx = std::complex<double>;

// 2D grids are stored row-major: (row, col) == (y, x).
using ComplexImage = Eigen::Array<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealImage = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using BoolImage = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using LabelImage = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Throws NonFiniteError naming `what` if any entry is NaN or infinite.
void require_finite(const ComplexImage& img, const char* what);
void require_finite(const RealImage& img, const char* what);

/// Nearest-rank percentile: the ceil(q/100 * N)-th smallest value, q in (0, 100].
double percentile_nearest_rank(const RealImage& values, double q);

}  // namespace ddp
