#include <doctest.h>

#include "ddp/errors.hpp"
#include "ddp/fft.hpp"
#include "ddp/imaging.hpp"
#include "oracles.hpp"

using namespace ddp;

namespace {

CartesianMask full_mask(int h, int w) {
  CartesianMask m{h, w, {}, 1.0, 0};
  for (int i = 0; i < w; ++i) m.lines.push_back(i);
  return m;
}

CartesianMask random_lines(int h, int w, int n, Rng& rng) {
  CartesianMask m{h, w, {}, 1.0, 0};
  std::vector<int> all(w);
  for (int i = 0; i < w; ++i) all[i] = i;
  for (int i = w - 1; i > 0; --i) std::swap(all[i], all[rng.uniform_int(i + 1)]);
  m.lines.assign(all.begin(), all.begin() + n);
  std::sort(m.lines.begin(), m.lines.end());
  return m;
}

}  // namespace

TEST_CASE("full single-coil E is the FFT") {
  Rng rng(1);
  const auto m = oracle::random_image(6, 8, rng);
  const auto op = EncodingOperator::cartesian(full_mask(6, 8), simulate_coil_maps(6, 8, 1, rng));
  const auto y = apply_E(op, m);
  const auto f = fft2(m, FftDirection::Forward);
  CHECK((Eigen::Map<const Eigen::VectorXcd>(f.data(), f.size()) - y.samples.col(0)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((apply_EH(op, y) - m).abs().maxCoeff() <= 1e-12);
  CHECK(apply_E(op, ComplexImage::Zero(6, 8)).samples.isZero());
  CHECK(apply_EH(op, KSpaceData{Eigen::MatrixXcd::Zero(y.samples.rows(), 1)}).isZero());
}

TEST_CASE("cartesian E matches the dense matrix oracle") {
  Rng rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const auto mask = random_lines(4, 4, 2, rng);
    const auto maps = simulate_coil_maps(4, 4, 2, rng);
    const auto op = EncodingOperator::cartesian(mask, maps);
    const auto m = oracle::random_image(4, 4, rng);
    const Eigen::MatrixXcd E = oracle::dense_cartesian_E(mask, maps);
    const Eigen::VectorXcd ref = E * oracle::flatten(m);
    CHECK((ref - oracle::stack(apply_E(op, m))).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("adjoint dot-product tests") {
  Rng rng(3);
  SUBCASE("cartesian, three coils") {
    const auto op = EncodingOperator::cartesian(random_lines(6, 6, 3, rng), simulate_coil_maps(6, 6, 3, rng));
    const auto m = oracle::random_image(6, 6, rng);
    KSpaceData y{Eigen::MatrixXcd(op.sample_count(), 3)};
    for (Eigen::Index i = 0; i < y.samples.size(); ++i) y.samples.data()[i] = cplx(rng.normal(), rng.normal());
    const cplx lhs = (apply_E(op, m).samples.array() * y.samples.array().conjugate()).sum();
    const cplx rhs = (m * apply_EH_raw(op, y).conjugate()).sum();
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
  }
  SUBCASE("non-uniform, two coils") {
    const auto t = gen_radial_trajectory(8, 2.0);
    const auto op = EncodingOperator::nonuniform(t, 8, 8, simulate_coil_maps(8, 8, 2, rng));
    const auto m = oracle::random_image(8, 8, rng);
    KSpaceData y{Eigen::MatrixXcd(op.sample_count(), 2)};
    for (Eigen::Index i = 0; i < y.samples.size(); ++i) y.samples.data()[i] = cplx(rng.normal(), rng.normal());
    const cplx lhs = (apply_E(op, m).samples.array() * y.samples.array().conjugate()).sum();
    const cplx rhs = (m * apply_EH_raw(op, y).conjugate()).sum();
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
  }
}

TEST_CASE("single-coil cartesian E E^H is the identity") {
  Rng rng(4);
  const auto op = EncodingOperator::cartesian(random_lines(8, 12, 5, rng), simulate_coil_maps(8, 12, 1, rng));
  KSpaceData y{Eigen::MatrixXcd(op.sample_count(), 1)};
  for (Eigen::Index i = 0; i < y.samples.size(); ++i) y.samples.data()[i] = cplx(rng.normal(), rng.normal());
  CHECK((apply_E(op, apply_EH(op, y)).samples - y.samples).norm() <= 1e-10 * y.samples.norm());
}

TEST_CASE("non-uniform transform on grid points reproduces the FFT") {
  Rng rng(5);
  const int h = 6, w = 8;
  RadialTrajectory t;
  for (int ky = 0; ky < h; ++ky)
    for (int kx = 0; kx < w; ++kx) t.points.push_back({static_cast<double>(kx) / w, static_cast<double>(ky) / h});
  t.spokes = 1;
  t.samples_per_spoke = static_cast<int>(t.points.size());
  const auto op = EncodingOperator::nonuniform(t, h, w, simulate_coil_maps(h, w, 1, rng));
  const auto m = oracle::random_image(h, w, rng);
  const auto f = fft2(m, FftDirection::Forward);
  CHECK((Eigen::Map<const Eigen::VectorXcd>(f.data(), f.size()) - apply_E(op, m).samples.col(0)).cwiseAbs().maxCoeff() <=
        1e-10);

  const auto radial = gen_radial_trajectory(6, 1.0);
  const auto op2 = EncodingOperator::nonuniform(radial, 6, 6, simulate_coil_maps(6, 6, 1, rng));
  const auto m2 = oracle::random_image(6, 6, rng);
  const Eigen::VectorXcd ref = oracle::dense_nonuniform_E(radial, 6, 6) * oracle::flatten(m2);
  CHECK((ref - apply_E(op2, m2).samples.col(0)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("coil maps") {
  Rng rng(6);
  const auto one = simulate_coil_maps(16, 20, 1, rng);
  REQUIRE(one.size() == 1);
  CHECK((one[0] == cplx(1.0, 0.0)).all());
  for (int g : {2, 4, 8}) {
    Rng a(7), b(7);
    const auto maps = simulate_coil_maps(32, 24, g, a);
    const auto again = simulate_coil_maps(32, 24, g, b);
    RealImage norm = RealImage::Zero(32, 24);
    for (int c = 0; c < g; ++c) {
      norm += maps[c].abs2();
      CHECK((maps[c] == again[c]).all());
    }
    CHECK(norm.minCoeff() >= 0.1 - 1e-12);
  }
}

TEST_CASE("noise model") {
  Rng rng(7);
  KSpaceData y{Eigen::MatrixXcd::Zero(500000, 2)};
  CHECK(add_noise(y, 0.0, rng).samples == y.samples);
  const double sigma = 0.3;
  const auto noisy = add_noise(y, sigma, rng);
  const Eigen::ArrayXd re = noisy.samples.real().reshaped().array();
  const Eigen::ArrayXd im = noisy.samples.imag().reshaped().array();
  const double n = static_cast<double>(re.size());
  CHECK(std::abs(std::sqrt(re.square().sum() / n) - sigma) < 0.01 * sigma);
  CHECK(std::abs(std::sqrt(im.square().sum() / n) - sigma) < 0.01 * sigma);
  CHECK(std::abs(re.mean()) < 3 * sigma / 1000);
  CHECK(std::abs(im.mean()) < 3 * sigma / 1000);
}

TEST_CASE("operator errors") {
  Rng rng(8);
  const auto op = EncodingOperator::cartesian(full_mask(4, 4), simulate_coil_maps(4, 4, 1, rng));
  CHECK_THROWS_AS(apply_E(op, ComplexImage::Zero(4, 5)), ShapeError);
  CHECK_THROWS_AS(apply_EH(op, KSpaceData{Eigen::MatrixXcd::Zero(3, 1)}), ShapeError);
  std::vector<ComplexImage> zero{ComplexImage::Zero(4, 4)};
  CHECK_THROWS_AS(EncodingOperator::cartesian(full_mask(4, 4), zero), InvalidArgument);
}

TEST_CASE("acquisition container round trip") {
  Rng rng(9);
  const auto op = EncodingOperator::cartesian(random_lines(8, 8, 4, rng), simulate_coil_maps(8, 8, 2, rng), 0.25);
  const Acquisition acq{op, add_noise(op.apply(oracle::random_image(8, 8, rng)), 0.25, rng)};
  const auto back = acquisition_from_file(decode_tensor_file(encode_tensor_file(acquisition_to_file(acq))));
  CHECK(back.data.samples == acq.data.samples);
  CHECK(back.op.sigma() == 0.25);
  CHECK(back.op.mask().lines == op.mask().lines);
  CHECK((back.op.coil_maps()[1] == op.coil_maps()[1]).all());

  const auto nu = EncodingOperator::nonuniform(gen_radial_trajectory(8, 2.0), 8, 8, simulate_coil_maps(8, 8, 1, rng));
  const Acquisition acq2{nu, nu.apply(oracle::random_image(8, 8, rng))};
  const auto back2 = acquisition_from_file(decode_tensor_file(encode_tensor_file(acquisition_to_file(acq2))));
  CHECK(back2.op.kind() == SamplingKind::NonUniform);
  CHECK(back2.data.samples == acq2.data.samples);
}
