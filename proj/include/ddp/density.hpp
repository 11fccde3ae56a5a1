#pragma once

#include <Eigen/Core>

namespace ddp {

/// log N(x | mean, diag(exp(logvar))), summed over all entries.
double gaussian_logpdf_diag(const Eigen::ArrayXd& x, const Eigen::ArrayXd& mean, const Eigen::ArrayXd& logvar);

/// KL( N(mean, diag(exp(logvar))) || N(0, I) ). Non-negative.
double kl_to_standard_normal(const Eigen::ArrayXd& mean, const Eigen::ArrayXd& logvar);

}  // namespace ddp
