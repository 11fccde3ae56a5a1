#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "ddp/adam.hpp"
#include "ddp/layers.hpp"
#include "ddp/rng.hpp"
#include "ddp/tensor.hpp"
#include "ddp/types.hpp"

namespace ddp {

/// Log-variances from either network are clamped to this range.
inline constexpr double kLogvarMin = -8.0;
inline constexpr double kLogvarMax = 10.0;

/// Encoder: conv3x3(c) + ReLU for each encoder channel, then dense(2L).
/// Decoder: dense(c0 * p * p) + ReLU reshaped to c0 maps, conv3x3(c) + ReLU
/// for the remaining decoder channels, then conv3x3(2) giving the mean and
/// log-variance maps.
struct VaeArch {
  int patch = 16;
  int latent = 16;
  std::vector<int> encoder_channels{32, 64, 64};
  std::vector<int> decoder_channels{64, 64, 64};

  int pixels() const { return patch * patch; }

  static VaeArch desk() { return {}; }
  static VaeArch paper() { return {28, 60, {32, 64, 64}, {64, 64, 64}}; }

  nlohmann::json to_json() const;
  static VaeArch from_json(const nlohmann::json& j);
  void validate() const;

  friend bool operator==(const VaeArch&, const VaeArch&) = default;
};

struct VaeModel {
  VaeArch arch;
  std::vector<LayerParams> encoder;
  std::vector<LayerParams> decoder;

  /// Truncated-normal weights (std `init_std`, cut at 2 std), zero biases.
  static VaeModel initialize(const VaeArch& arch, Rng& rng, double init_std = 0.05);

  std::vector<ParamView> parameter_views();
  Eigen::Index parameter_count() const;
};

struct VaeGrads {
  std::vector<LayerGrads> encoder;
  std::vector<LayerGrads> decoder;

  std::vector<GradView> views() const;
};

/// Gaussian parameters for a batch, one column per item.
struct GaussianBatch {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd logvar;
};

/// Patches are p*p row-major columns of non-negative magnitudes.
GaussianBatch encode_batch(const VaeModel& model, const Eigen::MatrixXd& patches);
GaussianBatch decode_batch(const VaeModel& model, const Eigen::MatrixXd& latents);

struct LatentPosterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd logvar;
};

struct PatchLikelihood {
  RealImage mean;
  RealImage logvar;
};

/// q(z | |x|). Rejects negative, non-finite or wrongly sized patches.
LatentPosterior encode(const VaeModel& model, const RealImage& patch);
/// p(|x| | z).
PatchLikelihood decode(const VaeModel& model, const Eigen::VectorXd& z);

/// Vector-Jacobian product of decode: d/dz of sum(g_mean * mean + g_logvar * logvar).
Eigen::VectorXd decode_backward(const VaeModel& model, const Eigen::VectorXd& z, const RealImage& g_mean,
                                const RealImage& g_logvar);

/// Monte-Carlo ELBO terms for a batch of patches with fixed noise draws.
/// `eps` is L x (B * J); column b * J + j drives sample j of patch b.
struct ElboEval {
  Eigen::VectorXd elbo;        // per patch, averaged over the J samples
  Eigen::MatrixXd input_grad;  // d elbo / d|x|, P x B (only when requested)
};

ElboEval elbo_with_noise(const VaeModel& model, const Eigen::MatrixXd& patches, const Eigen::MatrixXd& eps, int samples,
                         bool want_input_grad);

/// (1/J) sum_j [log p(|x| | z_j) + log p(z_j) - log q(z_j | |x|)], z_j = mu + sigma * eps_j.
double elbo_mc(const VaeModel& model, const RealImage& patch, int samples, Rng& rng);

/// Mean negative ELBO over the batch (closed-form KL, one reparameterised
/// sample per patch) and its gradient with respect to every parameter.
struct LossAndGrads {
  double loss = 0.0;
  VaeGrads grads;
};

LossAndGrads vae_loss_and_grads(const VaeModel& model, const Eigen::MatrixXd& batch, const Eigen::MatrixXd& eps);
/// Loss only, same noise convention; used by finite-difference checks.
double vae_loss(const VaeModel& model, const Eigen::MatrixXd& batch, const Eigen::MatrixXd& eps);

struct TrainConfig {
  int batch_size = 32;
  int iterations = 5000;
  double learning_rate = 5e-4;
  double init_std = 0.05;
  std::uint64_t seed = 0;

  static TrainConfig desk() { return {}; }
  static TrainConfig paper() { return {50, 200000, 5e-4, 0.05, 0}; }
};

/// One Adam step on the batch; throws NonFiniteError (model untouched) if
/// the loss or any gradient is not finite.
double train_step(VaeModel& model, const Eigen::MatrixXd& batch, AdamState& state, const AdamConfig& adam, Rng& rng);

/// Called after each iteration with (iteration index, loss).
using TrainCallback = std::function<void(int, double)>;

/// Mini-batch training over shuffled epochs of the patch columns.
std::vector<double> train_vae(VaeModel& model, const Eigen::MatrixXd& patches, const TrainConfig& cfg,
                              const TrainCallback& on_step = {});

/// Decodes n draws z ~ N(0, I).
std::vector<PatchLikelihood> sample_prior(const VaeModel& model, int n, Rng& rng);

TensorFile checkpoint_to_file(const VaeModel& model);
VaeModel checkpoint_from_file(const TensorFile& file);
void checkpoint_save(const VaeModel& model, const std::filesystem::path& path);
VaeModel checkpoint_load(const std::filesystem::path& path);

}  // namespace ddp
