#include "ddp/prior.hpp"

#include <cmath>
#include <string>

#include "ddp/errors.hpp"

namespace ddp {
namespace {

std::vector<int> axis_origins(int dim, int patch, int offset) {
  std::vector<int> out;
  int start = offset;
  for (; start + patch <= dim; start += patch) out.push_back(start);
  const int end = out.empty() ? 0 : out.back() + patch;
  if (end < dim) out.push_back(dim - patch);
  return out;
}

cplx phase_factor(cplx x) {
  const double a = std::abs(x);
  return a > 0.0 ? x / a : cplx(1.0, 0.0);
}

Eigen::MatrixXd draw_noise(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd eps(rows, cols);
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = rng.normal();
  return eps;
}

void check_grid_image(const ComplexImage& m, const PatchGrid& grid) {
  if (m.rows() != grid.height || m.cols() != grid.width) throw ShapeError("image does not match the patch grid");
}

}  // namespace

PatchGrid make_patch_grid(int height, int width, int patch) {
  if (patch < 1) throw InvalidArgument("patch size must be positive");
  if (patch > height || patch > width)
    throw InvalidArgument("patch size " + std::to_string(patch) + " exceeds image " + std::to_string(height) + "x" +
                          std::to_string(width));
  PatchGrid g{height, width, patch, {}};
  const int half = patch / 2;
  const int shifts[4][2] = {{0, 0}, {half, 0}, {0, half}, {half, half}};
  for (int k = 0; k < 4; ++k) {
    const auto rows = axis_origins(height, patch, shifts[k][0]);
    const auto cols = axis_origins(width, patch, shifts[k][1]);
    for (int r : rows)
      for (int c : cols) g.origins.push_back({r, c, k});
  }
  return g;
}

RealImage patch_counts(const PatchGrid& grid) {
  RealImage counts = RealImage::Zero(grid.height, grid.width);
  for (const auto& o : grid.origins) counts.block(o.row, o.col, grid.patch, grid.patch) += 1.0;
  return counts;
}

std::vector<ComplexImage> image2patches(const ComplexImage& m, const PatchGrid& grid) {
  check_grid_image(m, grid);
  std::vector<ComplexImage> out;
  out.reserve(grid.size());
  for (const auto& o : grid.origins) out.emplace_back(m.block(o.row, o.col, grid.patch, grid.patch));
  return out;
}

ComplexImage patches2image(const std::vector<ComplexImage>& patches, const PatchGrid& grid) {
  if (patches.size() != grid.size()) throw ShapeError("patch count does not match the grid");
  ComplexImage sum = ComplexImage::Zero(grid.height, grid.width);
  RealImage counts = RealImage::Zero(grid.height, grid.width);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const auto& o = grid.origins[i];
    if (patches[i].rows() != grid.patch || patches[i].cols() != grid.patch) throw ShapeError("patch has the wrong size");
    if (o.row < 0 || o.col < 0 || o.row + grid.patch > grid.height || o.col + grid.patch > grid.width)
      throw InvalidArgument("patch origin outside the image");
    sum.block(o.row, o.col, grid.patch, grid.patch) += patches[i];
    counts.block(o.row, o.col, grid.patch, grid.patch) += 1.0;
  }
  if ((counts == 0.0).any()) throw InvalidArgument("patch grid leaves pixels uncovered");
  return sum / counts.cast<cplx>();
}

Eigen::MatrixXd patch_magnitudes(const ComplexImage& m, const PatchGrid& grid) {
  check_grid_image(m, grid);
  const int p = grid.patch;
  Eigen::MatrixXd out(p * p, static_cast<Eigen::Index>(grid.size()));
  for (std::size_t b = 0; b < grid.size(); ++b) {
    const auto& o = grid.origins[b];
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < p; ++c) out(r * p + c, static_cast<Eigen::Index>(b)) = std::abs(m(o.row + r, o.col + c));
  }
  return out;
}

void PriorConfig::validate() const {
  if (J < 1) throw InvalidArgument("J must be >= 1");
  if (K < 1) throw InvalidArgument("K must be >= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be finite and non-negative");
}

ComplexImage prior_grad_patch(const VaeModel& model, const ComplexImage& x, const Eigen::MatrixXd& eps) {
  const int p = model.arch.patch;
  if (x.rows() != p || x.cols() != p) throw ShapeError("patch does not match the model patch size");
  require_finite(x, "patch");
  Eigen::MatrixXd mag(p * p, 1);
  for (int r = 0; r < p; ++r)
    for (int c = 0; c < p; ++c) mag(r * p + c, 0) = std::abs(x(r, c));
  const auto ev = elbo_with_noise(model, mag, eps, static_cast<int>(eps.cols()), true);
  ComplexImage g(p, p);
  for (int r = 0; r < p; ++r)
    for (int c = 0; c < p; ++c) g(r, c) = ev.input_grad(r * p + c, 0) * phase_factor(x(r, c));
  return g;
}

ComplexImage prior_grad_patch(const VaeModel& model, const ComplexImage& x, int J, Rng& rng) {
  if (J < 1) throw InvalidArgument("J must be >= 1");
  return prior_grad_patch(model, x, draw_noise(model.arch.latent, J, rng));
}

PriorEval prior_eval(const VaeModel& model, const ComplexImage& m, const PatchGrid& grid, int J,
                     const Eigen::MatrixXd& eps, bool want_grads) {
  if (grid.patch != model.arch.patch) throw ShapeError("patch grid does not match the model patch size");
  const Eigen::MatrixXd mag = patch_magnitudes(m, grid);
  auto ev = elbo_with_noise(model, mag, eps, J, want_grads);
  PriorEval out;
  out.elbo = std::move(ev.elbo);
  if (!want_grads) return out;
  const int p = grid.patch;
  out.grads.reserve(grid.size());
  for (std::size_t b = 0; b < grid.size(); ++b) {
    const auto& o = grid.origins[b];
    ComplexImage g(p, p);
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < p; ++c)
        g(r, c) = ev.input_grad(r * p + c, static_cast<Eigen::Index>(b)) * phase_factor(m(o.row + r, o.col + c));
    out.grads.push_back(std::move(g));
  }
  return out;
}

double elbo_sum(const VaeModel& model, const ComplexImage& m, const PatchGrid& grid, int J, Rng& rng) {
  if (J < 1) throw InvalidArgument("J must be >= 1");
  const auto eps = draw_noise(model.arch.latent, static_cast<Eigen::Index>(grid.size()) * J, rng);
  return prior_eval(model, m, grid, J, eps, false).elbo_sum();
}

ComplexImage prior_projection(const VaeModel& model, const ComplexImage& m, const PatchGrid& grid,
                              const PriorConfig& cfg, Rng& rng, ProjectionTrace* trace) {
  cfg.validate();
  require_finite(m, "prior projection input");
  const Eigen::Index cols = static_cast<Eigen::Index>(grid.size()) * cfg.J;
  Eigen::MatrixXd eps = draw_noise(model.arch.latent, cols, rng);
  ComplexImage x = m;
  if (trace) trace->elbo_sum.clear();
  for (int k = 0; k < cfg.K; ++k) {
    if (k > 0 && !cfg.freeze_samples) eps = draw_noise(model.arch.latent, cols, rng);
    const auto ev = prior_eval(model, x, grid, cfg.J, eps, true);
    if (trace) trace->elbo_sum.push_back(ev.elbo_sum());
    x += cfg.alpha * patches2image(ev.grads, grid);
    if (!x.allFinite()) throw NonFiniteError("prior projection produced non-finite values at step " + std::to_string(k));
  }
  if (trace) {
    if (!cfg.freeze_samples) eps = draw_noise(model.arch.latent, cols, rng);
    trace->elbo_sum.push_back(prior_eval(model, x, grid, cfg.J, eps, false).elbo_sum());
  }
  return x;
}

ComplexImage prior_projection(const VaeModel& model, const ComplexImage& m, const PatchGrid& grid,
                              const PriorConfig& cfg) {
  Rng rng(cfg.seed);
  return prior_projection(model, m, grid, cfg, rng);
}

}  // namespace ddp
