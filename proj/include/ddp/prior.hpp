#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ddp/rng.hpp"
#include "ddp/types.hpp"
#include "ddp/vae.hpp"

namespace ddp {

struct PatchOrigin {
  int row = 0;
  int col = 0;
  int offset = 0;  // index into {(0,0), (p/2,0), (0,p/2), (p/2,p/2)} as (row, col) shifts
};

/// Four shifted tilings of p x p patches. Along each axis a tiling starts at
/// its offset and steps by p; when the last tile falls short of the edge an
/// extra tile anchored at dim - p is appended.
struct PatchGrid {
  int height = 0;
  int width = 0;
  int patch = 0;
  std::vector<PatchOrigin> origins;

  std::size_t size() const { return origins.size(); }
};

PatchGrid make_patch_grid(int height, int width, int patch);

/// Number of patches covering each pixel.
RealImage patch_counts(const PatchGrid& grid);

std::vector<ComplexImage> image2patches(const ComplexImage& m, const PatchGrid& grid);
/// Pixelwise mean of the overlapping patch values.
ComplexImage patches2image(const std::vector<ComplexImage>& patches, const PatchGrid& grid);

/// Patch magnitudes as p*p x B row-major columns.
Eigen::MatrixXd patch_magnitudes(const ComplexImage& m, const PatchGrid& grid);

struct PriorConfig {
  int J = 1;
  int K = 10;
  double alpha = 1e-4;
  bool freeze_samples = false;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Gradient of the J-sample ELBO with respect to the complex patch: the
/// magnitude gradient times x/|x| (taken as 1 where |x| = 0).
ComplexImage prior_grad_patch(const VaeModel& model, const ComplexImage& x, int J, Rng& rng);

/// Same with explicit noise, L x J.
ComplexImage prior_grad_patch(const VaeModel& model, const ComplexImage& x, const Eigen::MatrixXd& eps);

/// Per-patch ELBO values and complex gradients for every patch of the grid.
struct PriorEval {
  Eigen::VectorXd elbo;
  std::vector<ComplexImage> grads;

  double elbo_sum() const { return elbo.sum(); }
};

/// `eps` is L x (patches * J), ordered as in elbo_with_noise.
PriorEval prior_eval(const VaeModel& model, const ComplexImage& m, const PatchGrid& grid, int J,
                     const Eigen::MatrixXd& eps, bool want_grads = true);

/// Sum of per-patch ELBOs over the grid.
double elbo_sum(const VaeModel& model, const ComplexImage& m, const PatchGrid& grid, int J, Rng& rng);

/// Summed ELBO before each ascent step and after the last (K + 1 values).
struct ProjectionTrace {
  std::vector<double> elbo_sum;
};

/// K steps of m <- m + alpha * patches2image(per-patch gradients). Noise is
/// redrawn from `rng` each step unless cfg.freeze_samples.
ComplexImage prior_projection(const VaeModel& model, const ComplexImage& m, const PatchGrid& grid,
                              const PriorConfig& cfg, Rng& rng, ProjectionTrace* trace = nullptr);
/// Uses Rng(cfg.seed).
ComplexImage prior_projection(const VaeModel& model, const ComplexImage& m, const PatchGrid& grid,
                              const PriorConfig& cfg);

}  // namespace ddp
