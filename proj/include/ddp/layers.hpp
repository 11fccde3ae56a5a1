#pragma once

#include <vector>

#include <Eigen/Core>

#include "ddp/rng.hpp"

namespace ddp {

enum class LayerKind { Conv3x3, Dense };
enum class Activation { None, Relu };

/// A batch of feature maps. Each column holds one sample laid out as
/// (row, col, channel) with channel fastest, so a column reinterpreted as a
/// (channels x height*width) matrix is the im2col-friendly view.
struct FeatureBatch {
  int height = 1;
  int width = 1;
  int channels = 0;
  Eigen::MatrixXd values;  // (height * width * channels) x batch

  int batch() const { return static_cast<int>(values.cols()); }
  int features() const { return height * width * channels; }
};

/// Same values, new (height, width, channels) interpretation.
FeatureBatch reshape(FeatureBatch fb, int height, int width, int channels);

/// Conv kernels are 3x3, stride 1, zero "same" padding.
/// Conv weights are (out x 9*in) with column index tap*in + in_channel and
/// tap = (dy + 1) * 3 + (dx + 1). Dense weights are (out x in_features).
struct LayerParams {
  LayerKind kind = LayerKind::Dense;
  Activation activation = Activation::None;
  int in_channels = 0;
  int out_channels = 0;
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;

  Eigen::Index parameter_count() const { return weights.size() + bias.size(); }
};

struct LayerGrads {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

struct LayerBackward {
  FeatureBatch input_grad;
  LayerGrads param_grads;  // empty when not requested
};

/// Weights drawn from a normal truncated at two standard deviations, zero bias.
LayerParams make_conv3x3(int in_channels, int out_channels, Activation act, Rng& rng, double init_std);
LayerParams make_dense(int in_features, int units, Activation act, Rng& rng, double init_std);

FeatureBatch layer_apply(const LayerParams& params, const FeatureBatch& input);

/// Gradients of a scalar loss given dL/d(output).
LayerBackward layer_backward(const LayerParams& params, const FeatureBatch& input, const FeatureBatch& output_grad);

/// Same, reusing the forward output for the ReLU mask; parameter gradients
/// are skipped unless `want_param_grads`.
LayerBackward layer_backward(const LayerParams& params, const FeatureBatch& input, const FeatureBatch& output,
                             const FeatureBatch& output_grad, bool want_param_grads);

}  // namespace ddp
