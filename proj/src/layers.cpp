#include "ddp/layers.hpp"

#include <algorithm>
#include <utility>

#include "ddp/errors.hpp"

namespace ddp {
namespace {

using Matrix = Eigen::MatrixXd;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

// (9 * C) x (batch * H * W) patch matrix for a 3x3 zero-padded convolution.
Matrix im2col(const FeatureBatch& in) {
  const int h = in.height, w = in.width, c = in.channels;
  Matrix cols = Matrix::Zero(9 * c, static_cast<Eigen::Index>(in.batch()) * h * w);
  for (int b = 0; b < in.batch(); ++b) {
    const double* src = in.values.col(b).data();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double* dst = cols.col((static_cast<Eigen::Index>(b) * h + y) * w + x).data();
        for (int dy = -1; dy <= 1; ++dy) {
          const int sy = y + dy;
          if (sy < 0 || sy >= h) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            const int sx = x + dx;
            if (sx < 0 || sx >= w) continue;
            const int tap = (dy + 1) * 3 + (dx + 1);
            std::copy_n(src + (sy * w + sx) * c, c, dst + tap * c);
          }
        }
      }
    }
  }
  return cols;
}

// Adjoint of im2col: scatter-add patch gradients back onto the input grid.
void col2im(const Matrix& cols, FeatureBatch& out) {
  const int h = out.height, w = out.width, c = out.channels;
  out.values.setZero();
  for (int b = 0; b < out.batch(); ++b) {
    double* dst = out.values.col(b).data();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double* src = cols.col((static_cast<Eigen::Index>(b) * h + y) * w + x).data();
        for (int dy = -1; dy <= 1; ++dy) {
          const int sy = y + dy;
          if (sy < 0 || sy >= h) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            const int sx = x + dx;
            if (sx < 0 || sx >= w) continue;
            const int tap = (dy + 1) * 3 + (dx + 1);
            double* d = dst + (sy * w + sx) * c;
            const double* s = src + tap * c;
            for (int ch = 0; ch < c; ++ch) d[ch] += s[ch];
          }
        }
      }
    }
  }
}

void check_input(const LayerParams& p, const FeatureBatch& in) {
  if (in.values.rows() != in.features()) throw ShapeError("feature batch rows do not match its geometry");
  if (p.kind == LayerKind::Conv3x3) {
    if (in.channels != p.in_channels) throw ShapeError("conv3x3 input channel mismatch");
    if (p.weights.rows() != p.out_channels || p.weights.cols() != 9 * p.in_channels)
      throw ShapeError("conv3x3 weight shape mismatch");
  } else {
    if (in.features() != p.in_channels) throw ShapeError("dense input feature mismatch");
    if (p.weights.rows() != p.out_channels || p.weights.cols() != p.in_channels)
      throw ShapeError("dense weight shape mismatch");
  }
  if (p.bias.size() != p.out_channels) throw ShapeError("bias length does not match output channels");
}

FeatureBatch output_geometry(const LayerParams& p, const FeatureBatch& in) {
  FeatureBatch out;
  if (p.kind == LayerKind::Conv3x3) {
    out.height = in.height;
    out.width = in.width;
  }
  out.channels = p.out_channels;
  return out;
}

// View a batch as (channels x batch*H*W); for dense layers H = W = 1 after the op.
MatrixMap as_channel_matrix(FeatureBatch& fb) {
  return MatrixMap(fb.values.data(), fb.channels, fb.values.size() / std::max(fb.channels, 1));
}
ConstMatrixMap as_channel_matrix(const FeatureBatch& fb) {
  return ConstMatrixMap(fb.values.data(), fb.channels, fb.values.size() / std::max(fb.channels, 1));
}

}  // namespace

FeatureBatch reshape(FeatureBatch fb, int height, int width, int channels) {
  if (static_cast<Eigen::Index>(height) * width * channels != fb.values.rows())
    throw ShapeError("reshape changes the feature count");
  fb.height = height;
  fb.width = width;
  fb.channels = channels;
  return fb;
}

LayerParams make_conv3x3(int in_channels, int out_channels, Activation act, Rng& rng, double init_std) {
  LayerParams p;
  p.kind = LayerKind::Conv3x3;
  p.activation = act;
  p.in_channels = in_channels;
  p.out_channels = out_channels;
  p.weights.resize(out_channels, 9 * in_channels);
  for (Eigen::Index i = 0; i < p.weights.size(); ++i) p.weights.data()[i] = rng.truncated_normal(init_std);
  p.bias = Eigen::VectorXd::Zero(out_channels);
  return p;
}

LayerParams make_dense(int in_features, int units, Activation act, Rng& rng, double init_std) {
  LayerParams p;
  p.kind = LayerKind::Dense;
  p.activation = act;
  p.in_channels = in_features;
  p.out_channels = units;
  p.weights.resize(units, in_features);
  for (Eigen::Index i = 0; i < p.weights.size(); ++i) p.weights.data()[i] = rng.truncated_normal(init_std);
  p.bias = Eigen::VectorXd::Zero(units);
  return p;
}

FeatureBatch layer_apply(const LayerParams& p, const FeatureBatch& in) {
  check_input(p, in);
  FeatureBatch out = output_geometry(p, in);
  if (p.kind == LayerKind::Conv3x3) {
    const Matrix cols = im2col(in);
    out.values.resize(static_cast<Eigen::Index>(out.features()), in.batch());
    MatrixMap y = as_channel_matrix(out);
    y.noalias() = p.weights * cols;
    y.colwise() += p.bias;
  } else {
    out.values.noalias() = p.weights * in.values;
    out.values.colwise() += p.bias;
  }
  if (p.activation == Activation::Relu) out.values = out.values.cwiseMax(0.0);
  return out;
}

LayerBackward layer_backward(const LayerParams& p, const FeatureBatch& in, const FeatureBatch& out_grad) {
  return layer_backward(p, in, layer_apply(p, in), out_grad, true);
}

LayerBackward layer_backward(const LayerParams& p, const FeatureBatch& in, const FeatureBatch& out,
                             const FeatureBatch& out_grad, bool want_param_grads) {
  check_input(p, in);
  if (out_grad.values.rows() != out.values.rows() || out_grad.values.cols() != out.values.cols())
    throw ShapeError("output gradient shape mismatch");

  FeatureBatch g = out_grad;
  if (p.activation == Activation::Relu) {
    // Subgradient 0 at the kink: only strictly positive outputs pass.
    g.values = (out.values.array() > 0.0).select(g.values.array(), 0.0).matrix();
  }

  LayerBackward res;
  res.input_grad.height = in.height;
  res.input_grad.width = in.width;
  res.input_grad.channels = in.channels;

  if (p.kind == LayerKind::Conv3x3) {
    const ConstMatrixMap gy = as_channel_matrix(std::as_const(g));
    if (want_param_grads) {
      const Matrix cols = im2col(in);
      res.param_grads.weights.noalias() = gy * cols.transpose();
      res.param_grads.bias = gy.rowwise().sum();
    }
    const Matrix gcols = p.weights.transpose() * gy;
    res.input_grad.values.resize(in.values.rows(), in.values.cols());
    col2im(gcols, res.input_grad);
  } else {
    if (want_param_grads) {
      res.param_grads.weights.noalias() = g.values * in.values.transpose();
      res.param_grads.bias = g.values.rowwise().sum();
    }
    res.input_grad.values.noalias() = p.weights.transpose() * g.values;
  }
  return res;
}

}  // namespace ddp
