#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace ddp {

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment estimates, one block per parameter block.
/// Blocks are sized lazily on the first step.
struct AdamState {
  std::vector<Eigen::VectorXd> m;
  std::vector<Eigen::VectorXd> v;
  std::int64_t step = 0;
};

using ParamView = Eigen::Map<Eigen::VectorXd>;
using GradView = Eigen::Map<const Eigen::VectorXd>;

/// One bias-corrected Adam update applied in place to `params`.
void adam_step(AdamState& state, std::span<ParamView> params, std::span<const GradView> grads, const AdamConfig& cfg);

}  // namespace ddp
