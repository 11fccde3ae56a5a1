#include "ddp/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <numbers>

#include "ddp/errors.hpp"
#include "ddp/fft.hpp"

namespace ddp {

void EncodingOperator::init_coils(std::vector<ComplexImage> maps) {
  if (maps.empty()) throw InvalidArgument("encoding operator needs at least one coil map");
  coil_norm_ = RealImage::Zero(height_, width_);
  for (const auto& s : maps) {
    if (s.rows() != height_ || s.cols() != width_) throw ShapeError("coil map dimensions do not match the image");
    require_finite(s, "coil map");
    coil_norm_ += s.abs2();
  }
  if ((coil_norm_ <= 0.0).any()) throw InvalidArgument("coil maps vanish at some pixel");
  coil_maps_ = std::move(maps);
}

EncodingOperator EncodingOperator::cartesian(const CartesianMask& mask, std::vector<ComplexImage> coil_maps,
                                             double sigma) {
  if (mask.lines.empty()) throw InvalidArgument("mask has no lines");
  EncodingOperator op;
  op.kind_ = SamplingKind::Cartesian;
  op.height_ = mask.height;
  op.width_ = mask.width;
  op.set_sigma(sigma);
  op.init_coils(std::move(coil_maps));

  std::vector<int> cols;
  for (int l : mask.lines) {
    if (l < 0 || l >= mask.width) throw InvalidArgument("mask line out of range");
    cols.push_back(line_to_dft_column(l, mask.width));
  }
  std::sort(cols.begin(), cols.end());
  for (int r = 0; r < op.height_; ++r)
    for (int c : cols) op.grid_index_.push_back(static_cast<Eigen::Index>(r) * op.width_ + c);
  op.sampling_ = mask;
  return op;
}

EncodingOperator EncodingOperator::nonuniform(const RadialTrajectory& traj, int height, int width,
                                              std::vector<ComplexImage> coil_maps, double sigma) {
  if (traj.points.empty()) throw InvalidArgument("trajectory has no points");
  EncodingOperator op;
  op.kind_ = SamplingKind::NonUniform;
  op.height_ = height;
  op.width_ = width;
  op.set_sigma(sigma);
  op.init_coils(std::move(coil_maps));

  const auto m = static_cast<Eigen::Index>(traj.points.size());
  op.phase_x_.resize(m, width);
  op.phase_y_.resize(m, height);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto [kx, ky] = traj.points[k];
    for (int x = 0; x < width; ++x) op.phase_x_(k, x) = std::polar(1.0, -2.0 * std::numbers::pi * kx * x);
    for (int y = 0; y < height; ++y) op.phase_y_(k, y) = std::polar(1.0, -2.0 * std::numbers::pi * ky * y);
  }
  op.sampling_ = traj;
  return op;
}

void EncodingOperator::set_sigma(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("noise sigma must be finite and >= 0");
  sigma_ = sigma;
}

Eigen::Index EncodingOperator::sample_count() const {
  return kind_ == SamplingKind::Cartesian ? static_cast<Eigen::Index>(grid_index_.size()) : phase_x_.rows();
}

const CartesianMask& EncodingOperator::mask() const {
  if (auto* m = std::get_if<CartesianMask>(&sampling_)) return *m;
  throw InvalidArgument("operator is not Cartesian");
}

const RadialTrajectory& EncodingOperator::trajectory() const {
  if (auto* t = std::get_if<RadialTrajectory>(&sampling_)) return *t;
  throw InvalidArgument("operator is not non-uniform");
}

void EncodingOperator::check_image(const ComplexImage& m) const {
  if (m.rows() != height_ || m.cols() != width_) throw ShapeError("image dimensions do not match the operator");
}

void EncodingOperator::check_data(const KSpaceData& y) const {
  if (y.samples.rows() != sample_count() || y.samples.cols() != coils())
    throw ShapeError("k-space data does not match the operator");
}

Eigen::VectorXcd EncodingOperator::forward_single(const ComplexImage& img) const {
  const auto m = sample_count();
  Eigen::VectorXcd y(m);
  if (kind_ == SamplingKind::Cartesian) {
    const ComplexImage k = fft2(img, FftDirection::Forward);
    for (Eigen::Index i = 0; i < m; ++i) y[i] = k.data()[grid_index_[i]];
  } else {
    // y_k = (1/sqrt N) sum_{y,x} m(y,x) e^{-2 pi i (ky y + kx x)}
    const Eigen::MatrixXcd rows = phase_y_ * img.matrix();  // M x width
    y = rows.cwiseProduct(phase_x_).rowwise().sum();
    y /= std::sqrt(static_cast<double>(height_) * width_);
  }
  return y;
}

ComplexImage EncodingOperator::adjoint_single(const Eigen::VectorXcd& y) const {
  if (kind_ == SamplingKind::Cartesian) {
    ComplexImage k = ComplexImage::Zero(height_, width_);
    for (Eigen::Index i = 0; i < y.size(); ++i) k.data()[grid_index_[i]] = y[i];
    return fft2(k, FftDirection::Inverse);
  }
  const Eigen::MatrixXcd weighted = y.asDiagonal() * phase_x_.conjugate();  // M x width
  ComplexImage img = (phase_y_.adjoint() * weighted).array();
  img /= std::sqrt(static_cast<double>(height_) * width_);
  return img;
}

KSpaceData EncodingOperator::apply(const ComplexImage& m) const {
  check_image(m);
  require_finite(m, "image");
  KSpaceData out;
  out.samples.resize(sample_count(), coils());
  for (int c = 0; c < coils(); ++c) {
    const ComplexImage weighted = coil_maps_[c] * m;
    out.samples.col(c) = forward_single(weighted);
  }
  return out;
}

ComplexImage EncodingOperator::adjoint_raw(const KSpaceData& y) const {
  check_data(y);
  ComplexImage acc = ComplexImage::Zero(height_, width_);
  for (int c = 0; c < coils(); ++c) acc += coil_maps_[c].conjugate() * adjoint_single(y.samples.col(c));
  return acc;
}

ComplexImage EncodingOperator::adjoint(const KSpaceData& y) const {
  ComplexImage img = adjoint_raw(y);
  img /= coil_norm_.cast<cplx>();
  return img;
}

KSpaceData apply_E(const EncodingOperator& op, const ComplexImage& m) { return op.apply(m); }
ComplexImage apply_EH(const EncodingOperator& op, const KSpaceData& y) { return op.adjoint(y); }
ComplexImage apply_EH_raw(const EncodingOperator& op, const KSpaceData& y) { return op.adjoint_raw(y); }

std::vector<ComplexImage> simulate_coil_maps(int height, int width, int coils, Rng& rng) {
  if (coils < 1) throw InvalidArgument("need at least one coil");
  if (coils == 1) return {ComplexImage::Ones(height, width)};

  const double cy = 0.5 * (height - 1), cx = 0.5 * (width - 1);
  const double extent = std::max(height, width);
  const double width_px = 0.45 * extent;
  std::vector<ComplexImage> maps;
  const double rot = 2.0 * std::numbers::pi * rng.uniform();
  for (int c = 0; c < coils; ++c) {
    const double angle = rot + 2.0 * std::numbers::pi * c / coils;
    const double py = cy + 0.5 * height * std::sin(angle);
    const double px = cx + 0.5 * width * std::cos(angle);
    const double phase0 = 2.0 * std::numbers::pi * rng.uniform();
    const double gy = (rng.uniform() - 0.5) * 2.0 / extent;  // radians per pixel
    const double gx = (rng.uniform() - 0.5) * 2.0 / extent;
    ComplexImage s(height, width);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double d2 = (y - py) * (y - py) + (x - px) * (x - px);
        const double mag = std::exp(-0.5 * d2 / (width_px * width_px));
        s(y, x) = std::polar(mag, phase0 + gy * (y - cy) + gx * (x - cx));
      }
    }
    maps.push_back(std::move(s));
  }

  RealImage norm = RealImage::Zero(height, width);
  for (const auto& s : maps) norm += s.abs2();
  const double scale2 = std::max(1.0 / norm.maxCoeff(), 0.1 / norm.minCoeff());
  const double scale = std::sqrt(scale2);
  for (auto& s : maps) s *= scale;
  return maps;
}

KSpaceData add_noise(const KSpaceData& y, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw InvalidArgument("noise sigma must be >= 0");
  KSpaceData out = y;
  if (sigma == 0.0) return out;
  for (Eigen::Index c = 0; c < out.samples.cols(); ++c)
    for (Eigen::Index i = 0; i < out.samples.rows(); ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      out.samples(i, c) += cplx(sigma * re, sigma * im);
    }
  return out;
}

TensorFile acquisition_to_file(const Acquisition& acq) {
  const auto& op = acq.op;
  TensorFile f;
  f.meta["kind"] = op.kind() == SamplingKind::Cartesian ? "cartesian" : "nonuniform";
  f.meta["height"] = op.height();
  f.meta["width"] = op.width();

  // samples as [M, coils] row-major
  const auto m = acq.data.samples.rows(), nc = acq.data.samples.cols();
  std::vector<cplx> samples(static_cast<std::size_t>(m * nc));
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index c = 0; c < nc; ++c) samples[i * nc + c] = acq.data.samples(i, c);
  f.add("samples", Tensor({static_cast<std::size_t>(m), static_cast<std::size_t>(nc)}, std::move(samples)));

  if (op.kind() == SamplingKind::Cartesian) {
    f.add("mask", to_tensor(mask_image(op.mask())));
  } else {
    const auto& t = op.trajectory();
    f.meta["spokes"] = t.spokes;
    f.meta["samples_per_spoke"] = t.samples_per_spoke;
    std::vector<double> pts;
    for (const auto& p : t.points) {
      pts.push_back(p.kx);
      pts.push_back(p.ky);
    }
    f.add("trajectory", Tensor({t.points.size(), 2}, std::move(pts)));
  }

  std::vector<cplx> maps;
  for (const auto& s : op.coil_maps()) maps.insert(maps.end(), s.data(), s.data() + s.size());
  f.add("coil_maps", Tensor({static_cast<std::size_t>(op.coils()), static_cast<std::size_t>(op.height()),
                             static_cast<std::size_t>(op.width())},
                            std::move(maps)));
  f.add("sigma", Tensor({1}, std::vector<double>{op.sigma()}));
  return f;
}

Acquisition acquisition_from_file(const TensorFile& f) {
  const Tensor& maps_t = f.at("coil_maps");
  if (maps_t.shape().size() != 3) throw ShapeError("coil_maps must be [coils, height, width]");
  const int nc = static_cast<int>(maps_t.shape()[0]);
  const int h = static_cast<int>(maps_t.shape()[1]);
  const int w = static_cast<int>(maps_t.shape()[2]);
  const auto& mv = maps_t.complex128();
  std::vector<ComplexImage> maps;
  for (int c = 0; c < nc; ++c) {
    ComplexImage s(h, w);
    std::copy_n(mv.begin() + static_cast<std::ptrdiff_t>(c) * h * w, h * w, s.data());
    maps.push_back(std::move(s));
  }
  const double sigma = f.at("sigma").as_real().at(0);

  std::optional<EncodingOperator> op;
  if (const Tensor* mask_t = f.find("mask")) {
    op = EncodingOperator::cartesian(mask_from_image(to_real_image(*mask_t)), std::move(maps), sigma);
  } else {
    const Tensor& traj_t = f.at("trajectory");
    if (traj_t.shape().size() != 2 || traj_t.shape()[1] != 2) throw ShapeError("trajectory must be [M, 2]");
    RadialTrajectory t;
    t.spokes = f.meta.value("spokes", 0);
    t.samples_per_spoke = f.meta.value("samples_per_spoke", 0);
    const auto pts = traj_t.as_real();
    for (std::size_t i = 0; i + 1 < pts.size(); i += 2) t.points.push_back({pts[i], pts[i + 1]});
    op = EncodingOperator::nonuniform(t, h, w, std::move(maps), sigma);
  }

  const Tensor& st = f.at("samples");
  if (st.shape().size() != 2) throw ShapeError("samples must be [M, coils]");
  const auto m = static_cast<Eigen::Index>(st.shape()[0]);
  const auto ncs = static_cast<Eigen::Index>(st.shape()[1]);
  const auto& sv = st.complex128();
  KSpaceData data;
  data.samples.resize(m, ncs);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index c = 0; c < ncs; ++c) data.samples(i, c) = sv[i * ncs + c];
  if (m != op->sample_count() || ncs != op->coils()) throw ShapeError("samples do not match the stored operator");
  return {std::move(*op), std::move(data)};
}

}  // namespace ddp
