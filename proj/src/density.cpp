#include "ddp/density.hpp"

#include <cmath>
#include <numbers>

#include "ddp/errors.hpp"

namespace ddp {

double gaussian_logpdf_diag(const Eigen::ArrayXd& x, const Eigen::ArrayXd& mean, const Eigen::ArrayXd& logvar) {
  if (x.size() != mean.size() || x.size() != logvar.size()) throw ShapeError("gaussian_logpdf_diag: shape mismatch");
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean[i];
    sum += -half_log_2pi - 0.5 * logvar[i] - 0.5 * d * d * std::exp(-logvar[i]);
  }
  return sum;
}

double kl_to_standard_normal(const Eigen::ArrayXd& mean, const Eigen::ArrayXd& logvar) {
  if (mean.size() != logvar.size()) throw ShapeError("kl_to_standard_normal: shape mismatch");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i)
    sum += mean[i] * mean[i] + std::exp(logvar[i]) - logvar[i] - 1.0;
  return 0.5 * sum;
}

}  // namespace ddp
