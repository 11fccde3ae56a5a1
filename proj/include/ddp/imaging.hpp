#pragma once

#include <filesystem>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "ddp/rng.hpp"
#include "ddp/sampling.hpp"
#include "ddp/tensor.hpp"
#include "ddp/types.hpp"

namespace ddp {

enum class SamplingKind { Cartesian, NonUniform };

/// Per-coil measurements: M x coils, one column per coil.
///
/// Cartesian samples are the sampled entries of the unshifted k-space grid in
/// row-major order (readout row, then DFT column). Non-uniform samples follow
/// the trajectory's spoke-major point order.
struct KSpaceData {
  Eigen::MatrixXcd samples;

  Eigen::Index sample_count() const { return samples.rows(); }
  Eigen::Index coils() const { return samples.cols(); }
};

/// E = U F S together with the measurement noise level.
class EncodingOperator {
 public:
  static EncodingOperator cartesian(const CartesianMask& mask, std::vector<ComplexImage> coil_maps, double sigma = 0.0);
  static EncodingOperator nonuniform(const RadialTrajectory& traj, int height, int width,
                                     std::vector<ComplexImage> coil_maps, double sigma = 0.0);

  SamplingKind kind() const { return kind_; }
  int height() const { return height_; }
  int width() const { return width_; }
  int coils() const { return static_cast<int>(coil_maps_.size()); }
  Eigen::Index sample_count() const;
  double sigma() const { return sigma_; }
  void set_sigma(double sigma);

  const std::vector<ComplexImage>& coil_maps() const { return coil_maps_; }
  const RealImage& coil_norm() const { return coil_norm_; }
  const CartesianMask& mask() const;
  const RadialTrajectory& trajectory() const;

  /// y_c = U F (S_c m), noiseless.
  KSpaceData apply(const ComplexImage& m) const;
  /// sum_c S_c^* F^H U^H y_c (the true adjoint).
  ComplexImage adjoint_raw(const KSpaceData& y) const;
  /// adjoint_raw divided pixelwise by sum_c |S_c|^2 (Roemer combination).
  ComplexImage adjoint(const KSpaceData& y) const;

 private:
  EncodingOperator() = default;
  void init_coils(std::vector<ComplexImage> maps);
  void check_image(const ComplexImage& m) const;
  void check_data(const KSpaceData& y) const;
  Eigen::VectorXcd forward_single(const ComplexImage& img) const;
  ComplexImage adjoint_single(const Eigen::VectorXcd& y) const;

  SamplingKind kind_ = SamplingKind::Cartesian;
  int height_ = 0;
  int width_ = 0;
  double sigma_ = 0.0;
  std::variant<CartesianMask, RadialTrajectory> sampling_;
  std::vector<ComplexImage> coil_maps_;
  RealImage coil_norm_;
  std::vector<Eigen::Index> grid_index_;  // Cartesian: flat row-major k-space indices
  Eigen::MatrixXcd phase_x_;              // non-uniform: M x width, exp(-2 pi i kx x)
  Eigen::MatrixXcd phase_y_;              // non-uniform: M x height, exp(-2 pi i ky y)
};

KSpaceData apply_E(const EncodingOperator& op, const ComplexImage& m);
/// Roemer-normalised adjoint; single coil with S = 1 reduces to zero filling.
ComplexImage apply_EH(const EncodingOperator& op, const KSpaceData& y);
ComplexImage apply_EH_raw(const EncodingOperator& op, const KSpaceData& y);

/// Smooth complex Gaussian-bump sensitivities placed around the field of
/// view, scaled so that sum_c |S_c|^2 >= 0.1 everywhere. One coil gives S = 1.
std::vector<ComplexImage> simulate_coil_maps(int height, int width, int coils, Rng& rng);

/// Adds i.i.d. N(0, sigma^2) to the real and imaginary parts.
KSpaceData add_noise(const KSpaceData& y, double sigma, Rng& rng);

/// A measurement together with the operator that produced it.
struct Acquisition {
  EncodingOperator op;
  KSpaceData data;
};

/// Container entries: "samples", "mask" or "trajectory", "coil_maps", "sigma".
TensorFile acquisition_to_file(const Acquisition& acq);
Acquisition acquisition_from_file(const TensorFile& file);

}  // namespace ddp
