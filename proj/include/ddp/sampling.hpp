#pragma once

#include <cstdint>
#include <vector>

#include "ddp/rng.hpp"
#include "ddp/types.hpp"

namespace ddp {

inline constexpr int kCenterLines = 15;
/// Stand-in for an infinite peak-to-side ratio (no side lobes at all).
inline constexpr double kPsrSentinel = 1e18;

/// Phase-encode lines are indexed in centred k-space: DC sits at
/// floor(width / 2). The readout direction (rows) is always fully sampled.
struct CartesianMask {
  int height = 0;
  int width = 0;
  std::vector<int> lines;  // sorted, unique, in [0, width)
  double ratio = 1.0;
  std::uint64_t seed = 0;
};

struct CartesianMaskOptions {
  double ratio = 2.0;
  int n_candidates = 1000;
  /// Standard deviation of the line density as a fraction of width.
  double sigma_fraction = 1.0 / 6.0;
};

/// Number of lines a mask with this width and ratio keeps.
int cartesian_line_count(int width, double ratio);

/// Indices floor(width/2) - 7 .. floor(width/2) + 7.
std::vector<int> central_lines(int width);

/// Every candidate drawn for one mask, with the index of the winner.
struct MaskCohort {
  std::vector<CartesianMask> candidates;
  std::vector<double> scores;
  std::size_t selected = 0;
};

/// Draws `n_candidates` line sets (central lines plus Gaussian-weighted lines
/// sampled without replacement) and keeps the best peak-to-side ratio;
/// ties go to the lowest candidate index.
CartesianMask gen_cartesian_mask(int height, int width, const CartesianMaskOptions& opts, Rng& rng);
MaskCohort gen_cartesian_cohort(int height, int width, const CartesianMaskOptions& opts, Rng& rng);

/// |psf(0)| / max_{k != 0} |psf(k)| of the 1D line indicator.
double peak_to_side_ratio(const CartesianMask& mask);

/// height x width 0/1 image in centred layout.
RealImage mask_image(const CartesianMask& mask);
/// Inverse of mask_image; rows must agree on every column.
CartesianMask mask_from_image(const RealImage& img);

/// Column of the unshifted DFT grid that centred line `line` refers to.
int line_to_dft_column(int line, int width);

struct KPoint {
  double kx;  // cycles/pixel along columns
  double ky;  // cycles/pixel along rows
};

struct RadialTrajectory {
  int spokes = 0;
  int samples_per_spoke = 0;
  std::vector<KPoint> points;  // spoke-major
};

/// ceil((pi/2) * size / ratio) spokes at angles pi*s/spokes, each sampling
/// (j - floor(size/2)) / size for j in [0, size).
RadialTrajectory gen_radial_trajectory(int size, double ratio);

}  // namespace ddp
