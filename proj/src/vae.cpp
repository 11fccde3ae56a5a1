#include "ddp/vae.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "ddp/density.hpp"
#include "ddp/errors.hpp"

namespace ddp {

nlohmann::json VaeArch::to_json() const {
  return {{"p", patch}, {"L", latent}, {"encoder_channels", encoder_channels}, {"decoder_channels", decoder_channels}};
}

VaeArch VaeArch::from_json(const nlohmann::json& j) {
  try {
    VaeArch a;
    a.patch = j.at("p").get<int>();
    a.latent = j.at("L").get<int>();
    a.encoder_channels = j.at("encoder_channels").get<std::vector<int>>();
    a.decoder_channels = j.at("decoder_channels").get<std::vector<int>>();
    a.validate();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad architecture descriptor: ") + e.what());
  }
}

void VaeArch::validate() const {
  if (patch < 1 || latent < 1) throw InvalidArgument("patch size and latent dimension must be positive");
  if (decoder_channels.empty()) throw InvalidArgument("decoder needs at least the dense output channel count");
  for (int c : encoder_channels)
    if (c < 1) throw InvalidArgument("channel counts must be positive");
  for (int c : decoder_channels)
    if (c < 1) throw InvalidArgument("channel counts must be positive");
}

VaeModel VaeModel::initialize(const VaeArch& arch, Rng& rng, double init_std) {
  arch.validate();
  VaeModel m;
  m.arch = arch;
  int c = 1;
  for (int out : arch.encoder_channels) {
    m.encoder.push_back(make_conv3x3(c, out, Activation::Relu, rng, init_std));
    c = out;
  }
  m.encoder.push_back(make_dense(arch.pixels() * c, 2 * arch.latent, Activation::None, rng, init_std));

  c = arch.decoder_channels.front();
  m.decoder.push_back(make_dense(arch.latent, arch.pixels() * c, Activation::Relu, rng, init_std));
  for (std::size_t i = 1; i < arch.decoder_channels.size(); ++i) {
    m.decoder.push_back(make_conv3x3(c, arch.decoder_channels[i], Activation::Relu, rng, init_std));
    c = arch.decoder_channels[i];
  }
  m.decoder.push_back(make_conv3x3(c, 2, Activation::None, rng, init_std));
  return m;
}

std::vector<ParamView> VaeModel::parameter_views() {
  std::vector<ParamView> v;
  for (auto* net : {&encoder, &decoder})
    for (auto& l : *net) {
      v.emplace_back(l.weights.data(), l.weights.size());
      v.emplace_back(l.bias.data(), l.bias.size());
    }
  return v;
}

Eigen::Index VaeModel::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto* net : {&encoder, &decoder})
    for (const auto& l : *net) n += l.parameter_count();
  return n;
}

std::vector<GradView> VaeGrads::views() const {
  std::vector<GradView> v;
  for (const auto* net : {&encoder, &decoder})
    for (const auto& g : *net) {
      v.emplace_back(g.weights.data(), g.weights.size());
      v.emplace_back(g.bias.data(), g.bias.size());
    }
  return v;
}

namespace {

using Matrix = Eigen::MatrixXd;

// acts[i] is the (possibly reshaped) input of layer i; acts.back() the output.
struct Tape {
  std::vector<FeatureBatch> acts;
};

FeatureBatch run_forward(const std::vector<LayerParams>& layers, FeatureBatch x, int patch, Tape* tape) {
  for (const auto& layer : layers) {
    if (layer.kind == LayerKind::Conv3x3 && x.height == 1 && x.width == 1)
      x = reshape(std::move(x), patch, patch, x.features() / (patch * patch));
    if (tape) tape->acts.push_back(x);
    x = layer_apply(layer, x);
  }
  if (tape) tape->acts.push_back(x);
  return x;
}

FeatureBatch run_backward(const std::vector<LayerParams>& layers, const Tape& tape, FeatureBatch grad,
                          std::vector<LayerGrads>* param_grads) {
  if (param_grads) param_grads->assign(layers.size(), {});
  for (std::size_t i = layers.size(); i-- > 0;) {
    auto res = layer_backward(layers[i], tape.acts[i], tape.acts[i + 1], grad, param_grads != nullptr);
    if (param_grads) (*param_grads)[i] = std::move(res.param_grads);
    grad = std::move(res.input_grad);
  }
  return grad;
}

FeatureBatch patches_as_batch(const Matrix& patches, int patch) {
  FeatureBatch fb;
  fb.height = patch;
  fb.width = patch;
  fb.channels = 1;
  fb.values = patches;
  return fb;
}

FeatureBatch latents_as_batch(const Matrix& z) {
  FeatureBatch fb;
  fb.channels = static_cast<int>(z.rows());
  fb.values = z;
  return fb;
}

Matrix clamp_logvar(const Matrix& raw) { return raw.cwiseMax(kLogvarMin).cwiseMin(kLogvarMax); }

// d clamp / d raw: 1 strictly inside the range, 0 where clamped.
Matrix clamp_mask(const Matrix& raw) {
  return ((raw.array() > kLogvarMin) && (raw.array() < kLogvarMax)).cast<double>().matrix();
}

struct EncoderPass {
  Tape tape;
  Matrix mean;
  Matrix logvar_raw;
  Matrix logvar;
};

EncoderPass encoder_pass(const VaeModel& model, const Matrix& patches, bool keep_tape) {
  if (patches.rows() != model.arch.pixels()) throw ShapeError("patch length does not match the model patch size");
  EncoderPass e;
  const FeatureBatch out = run_forward(model.encoder, patches_as_batch(patches, model.arch.patch), model.arch.patch,
                                       keep_tape ? &e.tape : nullptr);
  const int L = model.arch.latent;
  e.mean = out.values.topRows(L);
  e.logvar_raw = out.values.bottomRows(L);
  e.logvar = clamp_logvar(e.logvar_raw);
  return e;
}

struct DecoderPass {
  Tape tape;
  Matrix mean;        // P x N
  Matrix logvar_raw;  // P x N
  Matrix logvar;
};

DecoderPass decoder_pass(const VaeModel& model, const Matrix& z, bool keep_tape) {
  if (z.rows() != model.arch.latent) throw ShapeError("latent length does not match the model");
  DecoderPass d;
  const FeatureBatch out = run_forward(model.decoder, latents_as_batch(z), model.arch.patch, keep_tape ? &d.tape : nullptr);
  const int P = model.arch.pixels();
  // Output is (p, p, 2) channel-fastest: even rows mean, odd rows logvar.
  d.mean.resize(P, out.batch());
  d.logvar_raw.resize(P, out.batch());
  for (Eigen::Index b = 0; b < out.batch(); ++b)
    for (int i = 0; i < P; ++i) {
      d.mean(i, b) = out.values(2 * i, b);
      d.logvar_raw(i, b) = out.values(2 * i + 1, b);
    }
  d.logvar = clamp_logvar(d.logvar_raw);
  return d;
}

FeatureBatch decoder_output_grad(const VaeModel& model, const Matrix& g_mean, const Matrix& g_logvar) {
  FeatureBatch g;
  g.height = model.arch.patch;
  g.width = model.arch.patch;
  g.channels = 2;
  const int P = model.arch.pixels();
  g.values.resize(2 * P, g_mean.cols());
  for (Eigen::Index b = 0; b < g_mean.cols(); ++b)
    for (int i = 0; i < P; ++i) {
      g.values(2 * i, b) = g_mean(i, b);
      g.values(2 * i + 1, b) = g_logvar(i, b);
    }
  return g;
}

FeatureBatch encoder_output_grad(const Matrix& g_mean, const Matrix& g_logvar) {
  FeatureBatch g;
  g.channels = static_cast<int>(2 * g_mean.rows());
  g.values.resize(2 * g_mean.rows(), g_mean.cols());
  g.values.topRows(g_mean.rows()) = g_mean;
  g.values.bottomRows(g_mean.rows()) = g_logvar;
  return g;
}

double column_logpdf(const Matrix& x, Eigen::Index xcol, const Matrix& mean, const Matrix& logvar, Eigen::Index col) {
  return gaussian_logpdf_diag(x.col(xcol).array(), mean.col(col).array(), logvar.col(col).array());
}

bool all_finite(const VaeGrads& g) {
  for (const auto* net : {&g.encoder, &g.decoder})
    for (const auto& l : *net)
      if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

Matrix check_patch(const VaeModel& model, const RealImage& patch) {
  if (patch.rows() != model.arch.patch || patch.cols() != model.arch.patch)
    throw ShapeError("patch must be " + std::to_string(model.arch.patch) + "x" + std::to_string(model.arch.patch));
  require_finite(patch, "patch");
  if ((patch < 0.0).any()) throw InvalidArgument("patch magnitudes must be non-negative");
  return Eigen::Map<const Matrix>(patch.data(), patch.size(), 1);
}

}  // namespace

GaussianBatch encode_batch(const VaeModel& model, const Eigen::MatrixXd& patches) {
  auto e = encoder_pass(model, patches, false);
  return {std::move(e.mean), std::move(e.logvar)};
}

GaussianBatch decode_batch(const VaeModel& model, const Eigen::MatrixXd& latents) {
  auto d = decoder_pass(model, latents, false);
  return {std::move(d.mean), std::move(d.logvar)};
}

LatentPosterior encode(const VaeModel& model, const RealImage& patch) {
  const auto g = encode_batch(model, check_patch(model, patch));
  return {g.mean.col(0), g.logvar.col(0)};
}

PatchLikelihood decode(const VaeModel& model, const Eigen::VectorXd& z) {
  if (z.size() != model.arch.latent) throw ShapeError("latent vector has the wrong length");
  const auto g = decode_batch(model, z);
  const int p = model.arch.patch;
  PatchLikelihood out{RealImage(p, p), RealImage(p, p)};
  std::copy_n(g.mean.data(), p * p, out.mean.data());
  std::copy_n(g.logvar.data(), p * p, out.logvar.data());
  return out;
}

Eigen::VectorXd decode_backward(const VaeModel& model, const Eigen::VectorXd& z, const RealImage& g_mean,
                                const RealImage& g_logvar) {
  const int p = model.arch.patch;
  if (g_mean.rows() != p || g_mean.cols() != p || g_logvar.rows() != p || g_logvar.cols() != p)
    throw ShapeError("output gradients must be p x p");
  DecoderPass dec = decoder_pass(model, z, true);
  const Matrix gm = Eigen::Map<const Matrix>(g_mean.data(), p * p, 1);
  const Matrix gl = Eigen::Map<const Matrix>(g_logvar.data(), p * p, 1).cwiseProduct(clamp_mask(dec.logvar_raw));
  return run_backward(model.decoder, dec.tape, decoder_output_grad(model, gm, gl), nullptr).values.col(0);
}

ElboEval elbo_with_noise(const VaeModel& model, const Eigen::MatrixXd& patches, const Eigen::MatrixXd& eps, int samples,
                         bool want_input_grad) {
  if (samples < 1) throw InvalidArgument("need at least one Monte-Carlo sample");
  const Eigen::Index B = patches.cols();
  const Eigen::Index J = samples;
  const int L = model.arch.latent;
  if (eps.rows() != L || eps.cols() != B * J) throw ShapeError("noise matrix must be L x (patches * samples)");

  EncoderPass enc = encoder_pass(model, patches, want_input_grad);
  Matrix sigma = (0.5 * enc.logvar.array()).exp().matrix();
  Matrix z(L, B * J);
  for (Eigen::Index b = 0; b < B; ++b)
    for (Eigen::Index j = 0; j < J; ++j)
      z.col(b * J + j) = enc.mean.col(b) + sigma.col(b).cwiseProduct(eps.col(b * J + j));

  DecoderPass dec = decoder_pass(model, z, want_input_grad);

  ElboEval out;
  out.elbo = Eigen::VectorXd::Zero(B);
  for (Eigen::Index b = 0; b < B; ++b) {
    // Averaged as offsets from the first sample, so J identical terms give that term exactly.
    double first = 0.0, acc = 0.0;
    for (Eigen::Index j = 0; j < J; ++j) {
      const Eigen::Index col = b * J + j;
      double ratio = 0.0;  // log p(z) - log q(z | x); the 2*pi terms cancel
      for (int l = 0; l < L; ++l)
        ratio += -0.5 * z(l, col) * z(l, col) + 0.5 * enc.logvar(l, b) + 0.5 * eps(l, col) * eps(l, col);
      const double term = column_logpdf(patches, b, dec.mean, dec.logvar, col) + ratio;
      if (j == 0)
        first = term;
      else
        acc += term - first;
    }
    out.elbo[b] = first + acc / static_cast<double>(J);
  }
  if (!want_input_grad) return out;

  // d/d(decoder outputs) of log N(x | mean, exp(logvar)).
  const Eigen::Index P = patches.rows();
  Matrix g_mean(P, B * J), g_logvar(P, B * J);
  for (Eigen::Index b = 0; b < B; ++b)
    for (Eigen::Index j = 0; j < J; ++j) {
      const Eigen::Index col = b * J + j;
      const auto diff = (patches.col(b) - dec.mean.col(col)).array();
      const auto inv_var = (-dec.logvar.col(col).array()).exp();
      g_mean.col(col) = (diff * inv_var).matrix();
      g_logvar.col(col) = (-0.5 + 0.5 * diff.square() * inv_var).matrix();
    }
  g_logvar = g_logvar.cwiseProduct(clamp_mask(dec.logvar_raw));
  const FeatureBatch gz_fb =
      run_backward(model.decoder, dec.tape, decoder_output_grad(model, g_mean, g_logvar), nullptr);
  Matrix g_z = gz_fb.values - z;  // + d log p(z) / dz

  Matrix g_enc_mean = Matrix::Zero(L, B), g_enc_logvar = Matrix::Zero(L, B);
  Matrix direct = Matrix::Zero(P, B);
  for (Eigen::Index b = 0; b < B; ++b)
    for (Eigen::Index j = 0; j < J; ++j) {
      const Eigen::Index col = b * J + j;
      g_enc_mean.col(b) += g_z.col(col);
      g_enc_logvar.col(b) += 0.5 * g_z.col(col).cwiseProduct(eps.col(col)).cwiseProduct(sigma.col(b));
      direct.col(b) += g_mean.col(col);
    }
  g_enc_logvar.array() += 0.5 * static_cast<double>(J);  // from +1/2 logvar in -log q
  const double inv_j = 1.0 / static_cast<double>(J);
  g_enc_mean *= inv_j;
  g_enc_logvar *= inv_j;
  direct *= inv_j;
  g_enc_logvar = g_enc_logvar.cwiseProduct(clamp_mask(enc.logvar_raw));

  const FeatureBatch gx = run_backward(model.encoder, enc.tape, encoder_output_grad(g_enc_mean, g_enc_logvar), nullptr);
  // d log N / dx = -d log N / d mean
  out.input_grad = gx.values - direct;
  return out;
}

double elbo_mc(const VaeModel& model, const RealImage& patch, int samples, Rng& rng) {
  if (samples < 1) throw InvalidArgument("need at least one Monte-Carlo sample");
  const Matrix x = check_patch(model, patch);
  Matrix eps(model.arch.latent, samples);
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = rng.normal();
  return elbo_with_noise(model, x, eps, samples, false).elbo[0];
}

LossAndGrads vae_loss_and_grads(const VaeModel& model, const Eigen::MatrixXd& batch, const Eigen::MatrixXd& eps) {
  const Eigen::Index B = batch.cols();
  const int L = model.arch.latent;
  if (B < 1) throw InvalidArgument("empty training batch");
  if (eps.rows() != L || eps.cols() != B) throw ShapeError("noise matrix must be L x batch");
  const double inv_b = 1.0 / static_cast<double>(B);

  EncoderPass enc = encoder_pass(model, batch, true);
  const Matrix sigma = (0.5 * enc.logvar.array()).exp().matrix();
  const Matrix z = enc.mean + sigma.cwiseProduct(eps);
  DecoderPass dec = decoder_pass(model, z, true);

  LossAndGrads out;
  double loss = 0.0;
  for (Eigen::Index b = 0; b < B; ++b) {
    loss += -column_logpdf(batch, b, dec.mean, dec.logvar, b) +
            kl_to_standard_normal(enc.mean.col(b).array(), enc.logvar.col(b).array());
  }
  out.loss = loss * inv_b;

  const auto diff = (batch - dec.mean).array();
  const auto inv_var = (-dec.logvar.array()).exp();
  const Matrix g_mean = (-diff * inv_var * inv_b).matrix();
  Matrix g_logvar = ((0.5 - 0.5 * diff.square() * inv_var) * inv_b).matrix();
  g_logvar = g_logvar.cwiseProduct(clamp_mask(dec.logvar_raw));

  const FeatureBatch gz =
      run_backward(model.decoder, dec.tape, decoder_output_grad(model, g_mean, g_logvar), &out.grads.decoder);

  const Matrix g_enc_mean = gz.values + enc.mean * inv_b;
  Matrix g_enc_logvar = 0.5 * gz.values.cwiseProduct(eps).cwiseProduct(sigma) +
                        (0.5 * inv_b * (enc.logvar.array().exp() - 1.0)).matrix();
  g_enc_logvar = g_enc_logvar.cwiseProduct(clamp_mask(enc.logvar_raw));
  run_backward(model.encoder, enc.tape, encoder_output_grad(g_enc_mean, g_enc_logvar), &out.grads.encoder);
  return out;
}

double vae_loss(const VaeModel& model, const Eigen::MatrixXd& batch, const Eigen::MatrixXd& eps) {
  const Eigen::Index B = batch.cols();
  if (eps.rows() != model.arch.latent || eps.cols() != B) throw ShapeError("noise matrix must be L x batch");
  const auto enc = encoder_pass(model, batch, false);
  const Matrix z = enc.mean + (0.5 * enc.logvar.array()).exp().matrix().cwiseProduct(eps);
  const auto dec = decoder_pass(model, z, false);
  double loss = 0.0;
  for (Eigen::Index b = 0; b < B; ++b)
    loss += -column_logpdf(batch, b, dec.mean, dec.logvar, b) +
            kl_to_standard_normal(enc.mean.col(b).array(), enc.logvar.col(b).array());
  return loss / static_cast<double>(B);
}

double train_step(VaeModel& model, const Eigen::MatrixXd& batch, AdamState& state, const AdamConfig& adam, Rng& rng) {
  if ((batch.array() < 0.0).any()) throw InvalidArgument("training patches must be non-negative");
  Matrix eps(model.arch.latent, batch.cols());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = rng.normal();
  auto lg = vae_loss_and_grads(model, batch, eps);
  if (!std::isfinite(lg.loss) || !all_finite(lg.grads)) {
    std::ostringstream msg;
    msg << "non-finite training loss " << lg.loss << " at Adam step " << state.step + 1;
    throw NonFiniteError(msg.str());
  }
  auto params = model.parameter_views();
  const auto grads = lg.grads.views();
  adam_step(state, params, grads, adam);
  return lg.loss;
}

std::vector<double> train_vae(VaeModel& model, const Eigen::MatrixXd& patches, const TrainConfig& cfg,
                              const TrainCallback& on_step) {
  if (cfg.batch_size < 1 || cfg.iterations < 0 || !(cfg.learning_rate >= 0.0))
    throw InvalidArgument("invalid training configuration");
  if (patches.cols() < 1) throw InvalidArgument("no training patches");
  Rng rng(cfg.seed, 0x7472616eull);  // "tran"
  Rng shuffle_rng = rng.fork(1);
  Rng noise_rng = rng.fork(2);
  AdamState state;
  AdamConfig adam;
  adam.learning_rate = cfg.learning_rate;

  const auto n = static_cast<std::size_t>(patches.cols());
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = n;
  const auto bs = static_cast<std::size_t>(std::min<Eigen::Index>(cfg.batch_size, patches.cols()));

  std::vector<double> losses;
  losses.reserve(cfg.iterations);
  Matrix batch(patches.rows(), static_cast<Eigen::Index>(bs));
  for (int it = 0; it < cfg.iterations; ++it) {
    for (std::size_t k = 0; k < bs; ++k) {
      if (cursor == n) {
        for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);
        cursor = 0;
      }
      batch.col(static_cast<Eigen::Index>(k)) = patches.col(order[cursor++]);
    }
    losses.push_back(train_step(model, batch, state, adam, noise_rng));
    if (on_step) on_step(it, losses.back());
  }
  return losses;
}

std::vector<PatchLikelihood> sample_prior(const VaeModel& model, int n, Rng& rng) {
  if (n < 0) throw InvalidArgument("sample count must be >= 0");
  std::vector<PatchLikelihood> out;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd z(model.arch.latent);
    for (auto& v : z) v = rng.normal();
    out.push_back(decode(model, z));
  }
  return out;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Shape weight_shape(const LayerParams& l) {
  if (l.kind == LayerKind::Conv3x3)
    return {static_cast<std::size_t>(l.out_channels), 3, 3, static_cast<std::size_t>(l.in_channels)};
  return {static_cast<std::size_t>(l.out_channels), static_cast<std::size_t>(l.in_channels)};
}

void add_layers(TensorFile& f, const std::string& prefix, const std::vector<LayerParams>& layers) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const RowMatrix w = layers[i].weights;
    f.add(prefix + "." + std::to_string(i) + ".weight",
          Tensor(weight_shape(layers[i]), std::vector<double>(w.data(), w.data() + w.size())));
    f.add(prefix + "." + std::to_string(i) + ".bias",
          Tensor({static_cast<std::size_t>(layers[i].bias.size())},
                 std::vector<double>(layers[i].bias.data(), layers[i].bias.data() + layers[i].bias.size())));
  }
}

void load_layers(const TensorFile& f, const std::string& prefix, std::vector<LayerParams>& layers) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string wname = prefix + "." + std::to_string(i) + ".weight";
    const std::string bname = prefix + "." + std::to_string(i) + ".bias";
    const Tensor* w = f.find(wname);
    const Tensor* b = f.find(bname);
    if (!w || !b) throw ArchMismatch("checkpoint lacks tensors for " + prefix + " layer " + std::to_string(i));
    if (w->shape() != weight_shape(layers[i]) ||
        b->shape() != Shape{static_cast<std::size_t>(layers[i].out_channels)})
      throw ArchMismatch("tensor shapes of " + wname + " disagree with the architecture header");
    const auto& wv = w->real64();
    layers[i].weights = Eigen::Map<const RowMatrix>(wv.data(), layers[i].weights.rows(), layers[i].weights.cols());
    const auto& bv = b->real64();
    layers[i].bias = Eigen::Map<const Eigen::VectorXd>(bv.data(), static_cast<Eigen::Index>(bv.size()));
  }
}

}  // namespace

TensorFile checkpoint_to_file(const VaeModel& model) {
  TensorFile f;
  f.meta["kind"] = "vae_checkpoint";
  f.meta["format_version"] = kTensorFormatVersion;
  f.meta["arch"] = model.arch.to_json();
  add_layers(f, "encoder", model.encoder);
  add_layers(f, "decoder", model.decoder);
  return f;
}

VaeModel checkpoint_from_file(const TensorFile& f) {
  if (!f.meta.is_object() || f.meta.value("kind", "") != "vae_checkpoint" || !f.meta.contains("arch"))
    throw FormatError("container is not a VAE checkpoint");
  const VaeArch arch = VaeArch::from_json(f.meta["arch"]);
  Rng unused(0);
  VaeModel m = VaeModel::initialize(arch, unused, 0.0);
  load_layers(f, "encoder", m.encoder);
  load_layers(f, "decoder", m.decoder);
  const std::size_t expected = 2 * (m.encoder.size() + m.decoder.size());
  if (f.entries.size() != expected) throw ArchMismatch("checkpoint holds extra tensors not described by its header");
  return m;
}

void checkpoint_save(const VaeModel& model, const std::filesystem::path& path) {
  tensor_io_write(path, checkpoint_to_file(model));
}

VaeModel checkpoint_load(const std::filesystem::path& path) { return checkpoint_from_file(tensor_io_read(path)); }

}  // namespace ddp
