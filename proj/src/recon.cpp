#include "ddp/recon.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ddp/metrics.hpp"
#include "ddp/report.hpp"

namespace ddp {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

KSpaceData subtract(const KSpaceData& a, const KSpaceData& b) { return {a.samples - b.samples}; }

void check_image(const EncodingOperator& op, const ComplexImage& m) {
  if (m.rows() != op.height() || m.cols() != op.width()) throw ShapeError("image does not match the encoding operator");
}

ComplexImage cgnr_correction(const EncodingOperator& op, const KSpaceData& r0, int iters) {
  ComplexImage x = ComplexImage::Zero(op.height(), op.width());
  KSpaceData r = r0;
  ComplexImage s = op.adjoint_raw(r);
  ComplexImage p = s;
  double gamma = s.abs2().sum();
  for (int it = 0; it < iters && gamma > 0.0; ++it) {
    const KSpaceData q = op.apply(p);
    const double qq = q.samples.squaredNorm();
    if (!(qq > 0.0)) break;
    const double a = gamma / qq;
    x += a * p;
    r.samples -= a * q.samples;
    s = op.adjoint_raw(r);
    const double gamma_new = s.abs2().sum();
    p = s + (gamma_new / gamma) * p;
    gamma = gamma_new;
  }
  return x;
}

}  // namespace

void ReconConfig::validate() const {
  if (T < 1) throw InvalidArgument("T must be >= 1");
  prior().validate();
  if (phase_steps < 0 || !(phase_step_size >= 0.0)) throw InvalidArgument("invalid phase projection settings");
  if (warmup_dc_iters < 0) throw InvalidArgument("warm-up iterations must be >= 0");
  if (!(normalize_percentile > 0.0 && normalize_percentile <= 100.0))
    throw InvalidArgument("normalisation percentile must lie in (0, 100]");
  if (cg_iters < 1) throw InvalidArgument("cg_iters must be >= 1");
  if (!(divergence_factor > 1.0)) throw InvalidArgument("divergence factor must exceed 1");
}

PriorConfig ReconConfig::prior() const { return {J, K, alpha, freeze_samples, seed}; }

std::string ReconTrace::to_csv() const {
  CsvTable t({"iter", "elbo_sum", "dc_residual", "rmse"});
  for (const auto& r : rows)
    t.add_row({std::to_string(r.iter), format_double(r.elbo_sum), format_double(r.dc_residual), format_double(r.rmse)});
  return t.str();
}

double dc_residual(const EncodingOperator& op, const ComplexImage& m, const KSpaceData& y) {
  return (op.apply(m).samples - y.samples).norm();
}

ComplexImage p_dc(const EncodingOperator& op, const ComplexImage& m, const KSpaceData& y, int cg_iters) {
  check_image(op, m);
  const KSpaceData r = subtract(op.apply(m), y);
  if (op.kind() == SamplingKind::Cartesian) return m - op.adjoint(r);
  KSpaceData neg{-r.samples};
  return m + cgnr_correction(op, neg, cg_iters);
}

ComplexImage p_phase(const ComplexImage& m, int steps, double step_size) {
  if (steps < 0) throw InvalidArgument("phase steps must be >= 0");
  const Eigen::Index h = m.rows(), w = m.cols();
  const RealImage mag = m.abs();
  RealImage phi(h, w);
  for (Eigen::Index i = 0; i < m.size(); ++i) phi.data()[i] = std::arg(m.data()[i]);
  RealImage grad(h, w);
  for (int s = 0; s < steps; ++s) {
    // d/dphi_a of 2 - 2 cos(phi_a - phi_b) is 2 sin(phi_a - phi_b).
    grad.setZero();
    for (Eigen::Index y = 0; y < h; ++y)
      for (Eigen::Index x = 0; x < w; ++x) {
        if (x + 1 < w) {
          const double g = 2.0 * std::sin(phi(y, x) - phi(y, x + 1));
          grad(y, x) += g;
          grad(y, x + 1) -= g;
        }
        if (y + 1 < h) {
          const double g = 2.0 * std::sin(phi(y, x) - phi(y + 1, x));
          grad(y, x) += g;
          grad(y + 1, x) -= g;
        }
      }
    phi -= step_size * grad;
  }
  ComplexImage out(h, w);
  for (Eigen::Index i = 0; i < m.size(); ++i) out.data()[i] = std::polar(mag.data()[i], phi.data()[i]);
  return out;
}

NormalizedImage normalize_percentile(const ComplexImage& m, double q) {
  require_finite(m, "image to normalise");
  const RealImage mag = m.abs();
  if (!(mag > 0.0).any()) throw InvalidArgument("cannot normalise an all-zero image");
  double v = percentile_nearest_rank(mag, q);
  if (!(v > 0.0)) v = mag.maxCoeff();
  const double scale = 1.0 / v;
  return {m * scale, scale};
}

ReconResult ddp_recon(const KSpaceData& y, const EncodingOperator& op, const VaeModel* model, const ReconConfig& cfg,
                      const ComplexImage* ground_truth) {
  cfg.validate();
  if (ground_truth) check_image(op, *ground_truth);
  const bool use_prior = model != nullptr;
  PatchGrid grid;
  if (use_prior) grid = make_patch_grid(op.height(), op.width(), model->arch.patch);

  const auto start = normalize_percentile(op.adjoint(y), cfg.normalize_percentile);
  const double scale = start.scale;
  const KSpaceData ys{y.samples * scale};
  ComplexImage m = start.image;

  Rng prior_rng = Rng(cfg.seed).fork(1);
  Rng trace_rng = Rng(cfg.seed).fork(2);
  const PriorConfig pcfg = cfg.prior();
  Eigen::MatrixXd eps;  // redrawn every ascent step, or once per projection when frozen

  const double baseline = std::max(dc_residual(op, m, ys), 1e-3 * ys.samples.norm());
  ReconTrace trace;

  auto record = [&](int iter, double pre) {
    ReconTraceRow row;
    row.iter = iter;
    row.dc_residual_pre = pre / scale;
    const double post = dc_residual(op, m, ys);
    row.dc_residual = post / scale;
    row.elbo_sum = use_prior ? elbo_sum(*model, m, grid, cfg.J, trace_rng) : kNaN;
    row.rmse = ground_truth ? rmse(*ground_truth, ComplexImage(m / scale)) : kNaN;
    trace.rows.push_back(row);
    if (!m.allFinite() || !std::isfinite(post) || post > cfg.divergence_factor * baseline) {
      std::ostringstream msg;
      msg << "reconstruction diverged at iteration " << iter << " (data residual " << post / scale << ")";
      throw DivergenceError(msg.str(), trace);
    }
  };

  if (op.coils() > 1) {
    for (int i = 0; i < cfg.warmup_dc_iters; ++i) {
      const double pre = dc_residual(op, m, ys);
      m = p_dc(op, m, ys, cfg.cg_iters);
      record(i - cfg.warmup_dc_iters, pre);
    }
  }

  const Eigen::Index eps_cols = use_prior ? static_cast<Eigen::Index>(grid.size()) * cfg.J : 0;
  for (int t = 1; t <= cfg.T; ++t) {
    for (int k = 0; k < cfg.K; ++k) {
      if (use_prior && cfg.alpha > 0.0) {
        if (k == 0 || !cfg.freeze_samples) {
          eps.resize(model->arch.latent, eps_cols);
          for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = prior_rng.normal();
        }
        const auto ev = prior_eval(*model, m, grid, pcfg.J, eps, true);
        m += cfg.alpha * patches2image(ev.grads, grid);
      }
      if (cfg.phase_projection) m = p_phase(m, cfg.phase_steps, cfg.phase_step_size);
    }
    if (!m.allFinite()) {
      std::ostringstream msg;
      msg << "prior projection produced non-finite values at iteration " << t;
      throw DivergenceError(msg.str(), trace);
    }
    const double pre = dc_residual(op, m, ys);
    m = p_dc(op, m, ys, cfg.cg_iters);
    record(t, pre);
  }
  return {ComplexImage(m / scale), std::move(trace)};
}

ReconResult sense_recon(const KSpaceData& y, const EncodingOperator& op, const ReconConfig& cfg,
                        const ComplexImage* ground_truth) {
  ReconConfig c = cfg;
  c.alpha = 0.0;
  c.phase_projection = false;
  return ddp_recon(y, op, nullptr, c, ground_truth);
}

}  // namespace ddp
