#include "ddp/adam.hpp"

#include <cmath>

#include "ddp/errors.hpp"

namespace ddp {

void adam_step(AdamState& state, std::span<ParamView> params, std::span<const GradView> grads, const AdamConfig& cfg) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter/gradient block count mismatch");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.push_back(Eigen::VectorXd::Zero(p.size()));
      state.v.push_back(Eigen::VectorXd::Zero(p.size()));
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adam_step: state does not match parameter blocks");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != grads[i].size() || state.m[i].size() != params[i].size())
      throw ShapeError("adam_step: block size mismatch");
    auto& m = state.m[i];
    auto& v = state.v[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grads[i];
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grads[i].cwiseAbs2();
    params[i].array() -= cfg.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.epsilon);
  }
}

}  // namespace ddp
