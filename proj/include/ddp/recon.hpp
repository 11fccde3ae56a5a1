#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddp/errors.hpp"
#include "ddp/imaging.hpp"
#include "ddp/prior.hpp"
#include "ddp/types.hpp"
#include "ddp/vae.hpp"

namespace ddp {

struct ReconConfig {
  int T = 30;
  int K = 10;
  double alpha = 1e-4;
  int J = 1;
  bool freeze_samples = false;
  /// Smooth-phase projection after every prior ascent step.
  bool phase_projection = false;
  int phase_steps = 10;
  double phase_step_size = 0.1;
  /// Data-consistency-only iterations run first when there is more than one coil.
  int warmup_dc_iters = 10;
  double normalize_percentile = 99.0;
  /// Conjugate-gradient iterations per data projection for non-Cartesian data.
  int cg_iters = 10;
  /// Abort when the data residual exceeds this multiple of its initial value.
  double divergence_factor = 10.0;
  std::uint64_t seed = 0;

  void validate() const;
  PriorConfig prior() const;
};

struct ReconTraceRow {
  int iter = 0;                  // warm-up rows are numbered -W .. -1, POCS rows 1 .. T
  double elbo_sum = 0.0;         // NaN without a model
  double dc_residual = 0.0;      // ||E m - y|| after the data projection
  double dc_residual_pre = 0.0;  // ... and just before it
  double rmse = 0.0;             // NaN without ground truth
};

struct ReconTrace {
  std::vector<ReconTraceRow> rows;

  /// Columns iter, elbo_sum, dc_residual, rmse; NaN cells are left empty.
  std::string to_csv() const;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, ReconTrace trace) : Error(what), trace_(std::move(trace)) {}
  const ReconTrace& trace() const { return trace_; }

 private:
  ReconTrace trace_;
};

struct ReconResult {
  ComplexImage image;
  ReconTrace trace;
};

/// ||E m - y||_2 over all coils and samples.
double dc_residual(const EncodingOperator& op, const ComplexImage& m, const KSpaceData& y);

/// m - E^H (E m - y) with the Roemer-normalised adjoint for Cartesian data.
/// Non-Cartesian data use `cg_iters` CGNR iterations on the correction.
ComplexImage p_dc(const EncodingOperator& op, const ComplexImage& m, const KSpaceData& y, int cg_iters = 10);

/// Gradient descent on sum |exp(i phi_a) - exp(i phi_b)|^2 over horizontal
/// and vertical neighbours, magnitude held fixed.
ComplexImage p_phase(const ComplexImage& m, int steps = 10, double step_size = 0.1);

struct NormalizedImage {
  ComplexImage image;
  double scale = 1.0;  // image = input * scale
};

NormalizedImage normalize_percentile(const ComplexImage& m, double q = 99.0);

/// POCS reconstruction from the zero-filled start. `model` may be null, which
/// disables the prior projection. `ground_truth` only feeds the trace.
ReconResult ddp_recon(const KSpaceData& y, const EncodingOperator& op, const VaeModel* model, const ReconConfig& cfg,
                      const ComplexImage* ground_truth = nullptr);

/// Data projections only.
ReconResult sense_recon(const KSpaceData& y, const EncodingOperator& op, const ReconConfig& cfg,
                        const ComplexImage* ground_truth = nullptr);

}  // namespace ddp
