#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "ddp/adam.hpp"
#include "ddp/density.hpp"
#include "ddp/errors.hpp"
#include "ddp/fft.hpp"
#include "ddp/layers.hpp"
#include "ddp/report.hpp"
#include "ddp/rng.hpp"
#include "ddp/tensor.hpp"
#include "oracles.hpp"

using namespace ddp;

TEST_CASE("philox known answers") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  Rng r(0);
  CHECK(r.next_u32() == 0x6627e8d5u);
}

TEST_CASE("rng streams") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs = differs || x != c.next_u64();
  }
  CHECK(differs);
  Rng f1 = Rng(7).fork(1), f2 = Rng(7).fork(2), f1b = Rng(7).fork(1);
  CHECK(f1.next_u64() == f1b.next_u64());
  CHECK(f1.next_u64() != f2.next_u64());

  Rng u(5);
  for (int i = 0; i < 10000; ++i) {
    const double x = u.uniform();
    CHECK((x >= 0.0 && x < 1.0));
    const double t = u.truncated_normal(0.05);
    CHECK(std::abs(t) < 0.1);
    CHECK(u.uniform_int(7) < 7u);
  }
  double s = 0, ss = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = u.normal();
    s += z;
    ss += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(ss / n - 1.0) < 0.02);
}

TEST_CASE("fft2 small cases") {
  ComplexImage delta = ComplexImage::Zero(2, 2);
  delta(0, 0) = 1.0;
  const auto fd = fft2(delta, FftDirection::Forward);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(std::abs(fd.data()[i] - cplx(0.5, 0)) < 1e-15);
  const auto fo = fft2(ComplexImage::Ones(2, 2), FftDirection::Forward);
  CHECK(std::abs(fo(0, 0) - cplx(2.0, 0)) < 1e-15);
  CHECK(std::abs(fo(0, 1)) < 1e-15);
  CHECK(std::abs(fo(1, 0)) < 1e-15);
  CHECK(std::abs(fo(1, 1)) < 1e-15);
}

TEST_CASE("fft2 matches direct summation and is unitary") {
  Rng rng(3);
  for (auto [h, w] : {std::pair{8, 8}, std::pair{5, 7}, std::pair{6, 4}}) {
    const auto x = oracle::random_image(h, w, rng);
    for (int sign : {-1, +1}) {
      const auto f = fft2(x, sign < 0 ? FftDirection::Forward : FftDirection::Inverse);
      const auto d = oracle::direct_dft2(x, sign);
      CHECK((f - d).abs().maxCoeff() <= 1e-10);
    }
  }
  for (int n : {16, 33, 64}) {
    const auto x = oracle::random_image(n, n, rng);
    const auto y = oracle::random_image(n, n, rng);
    const auto fx = fft2(x, FftDirection::Forward);
    CHECK(std::abs(std::sqrt(fx.abs2().sum()) - std::sqrt(x.abs2().sum())) <= 1e-10 * std::sqrt(x.abs2().sum()));
    const auto back = fft2(fx, FftDirection::Inverse);
    CHECK((back - x).abs().maxCoeff() <= 1e-12 * x.abs().maxCoeff());
    // <F x, y> == <x, F^H y>
    const cplx lhs = (fx * y.conjugate()).sum();
    const cplx rhs = (x * fft2(y, FftDirection::Inverse).conjugate()).sum();
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
  }
  ComplexImage bad = ComplexImage::Zero(2, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fft2(bad, FftDirection::Forward), NonFiniteError);
  CHECK_THROWS_AS(fft2(ComplexImage(0, 3), FftDirection::Forward), ShapeError);
}

TEST_CASE("fft1 matches direct summation") {
  Rng rng(4);
  std::vector<cplx> x(13);
  for (auto& v : x) v = cplx(rng.normal(), rng.normal());
  const auto f = fft1(x, FftDirection::Inverse);
  const auto d = oracle::direct_dft1(x, +1);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(f[i] - d[i]) <= 1e-12);
}

namespace {

FeatureBatch random_batch(int h, int w, int c, int b, Rng& rng) {
  FeatureBatch fb{h, w, c, Eigen::MatrixXd(h * w * c, b)};
  for (Eigen::Index i = 0; i < fb.values.size(); ++i) fb.values.data()[i] = rng.normal();
  return fb;
}

// Scalar test loss sum(out .* probe) and its finite-difference checks.
void check_layer_grads(LayerParams p, FeatureBatch in, Rng& rng) {
  const FeatureBatch out = layer_apply(p, in);
  Eigen::MatrixXd probe(out.values.rows(), out.values.cols());
  for (Eigen::Index i = 0; i < probe.size(); ++i) probe.data()[i] = rng.normal();
  FeatureBatch g = out;
  g.values = probe;
  const auto back = layer_backward(p, in, g);
  auto loss = [&] { return layer_apply(p, in).values.cwiseProduct(probe).sum(); };
  const double h = 1e-5;
  const auto gw = oracle::central_diff(loss, p.weights.data(), p.weights.size(), h);
  const auto gb = oracle::central_diff(loss, p.bias.data(), p.bias.size(), h);
  const auto gx = oracle::central_diff(loss, in.values.data(), in.values.size(), h);
  CHECK(oracle::rel_err(oracle::to_vec(gw), Eigen::Map<const Eigen::VectorXd>(back.param_grads.weights.data(),
                                                                               back.param_grads.weights.size())) <= 1e-6);
  CHECK(oracle::rel_err(oracle::to_vec(gb), back.param_grads.bias) <= 1e-6);
  CHECK(oracle::rel_err(oracle::to_vec(gx), Eigen::Map<const Eigen::VectorXd>(back.input_grad.values.data(),
                                                                               back.input_grad.values.size())) <= 1e-6);
}

}  // namespace

TEST_CASE("dense layer examples") {
  LayerParams p;
  p.kind = LayerKind::Dense;
  p.in_channels = 1;
  p.out_channels = 1;
  p.weights = Eigen::MatrixXd::Constant(1, 1, 2.0);
  p.bias = Eigen::VectorXd::Constant(1, 1.0);
  FeatureBatch in{1, 1, 1, Eigen::MatrixXd::Constant(1, 1, 3.0)};
  CHECK(layer_apply(p, in).values(0, 0) == 7.0);

  LayerParams id;
  id.kind = LayerKind::Dense;
  id.activation = Activation::Relu;
  id.in_channels = 3;
  id.out_channels = 3;
  id.weights = Eigen::MatrixXd::Identity(3, 3);
  id.bias = Eigen::VectorXd::Zero(3);
  FeatureBatch v{1, 1, 3, Eigen::MatrixXd(3, 1)};
  v.values << -1, 0, 2;
  const auto out = layer_apply(id, v);
  CHECK(out.values(0, 0) == 0.0);
  CHECK(out.values(1, 0) == 0.0);
  CHECK(out.values(2, 0) == 2.0);
  FeatureBatch ones = out;
  ones.values.setOnes();
  const auto back = layer_backward(id, v, ones);
  CHECK(back.input_grad.values(0, 0) == 0.0);
  CHECK(back.input_grad.values(1, 0) == 0.0);
  CHECK(back.input_grad.values(2, 0) == 1.0);
}

TEST_CASE("layer gradients match finite differences") {
  Rng rng(11);
  SUBCASE("conv3x3 on a 1x5x5 input") {
    for (int draw = 0; draw < 20; ++draw) {
      auto p = make_conv3x3(1, 3, draw % 2 ? Activation::Relu : Activation::None, rng, 0.5);
      for (auto& b : p.bias) b = rng.normal();
      check_layer_grads(p, random_batch(5, 5, 1, 1, rng), rng);
    }
  }
  SUBCASE("conv3x3 multi-channel batch") {
    for (int draw = 0; draw < 20; ++draw) {
      auto p = make_conv3x3(2, 3, draw % 2 ? Activation::Relu : Activation::None, rng, 0.5);
      check_layer_grads(p, random_batch(4, 3, 2, 2, rng), rng);
    }
  }
  SUBCASE("dense") {
    for (int draw = 0; draw < 20; ++draw) {
      auto p = make_dense(6, 4, draw % 2 ? Activation::Relu : Activation::None, rng, 0.5);
      for (auto& b : p.bias) b = rng.normal();
      check_layer_grads(p, random_batch(1, 1, 6, 3, rng), rng);
    }
  }
}

TEST_CASE("conv3x3 zero padding on a single tap") {
  // Centre tap only: the conv is a per-pixel channel mix.
  Rng rng(1);
  auto p = make_conv3x3(1, 1, Activation::None, rng, 0.1);
  p.weights.setZero();
  p.weights(0, 4) = 2.0;
  FeatureBatch in{3, 3, 1, Eigen::MatrixXd::Ones(9, 1)};
  CHECK(layer_apply(p, in).values.isApprox(2.0 * in.values));
  // Top-left tap reads the pixel up-left: zero on the first row and column.
  p.weights.setZero();
  p.weights(0, 0) = 1.0;
  const auto out = layer_apply(p, in);
  CHECK(out.values(0, 0) == 0.0);
  CHECK(out.values(4, 0) == 1.0);
  CHECK_THROWS_AS(layer_apply(p, FeatureBatch{3, 3, 2, Eigen::MatrixXd::Ones(18, 1)}), ShapeError);
}

TEST_CASE("initialisation draws lie within two standard deviations") {
  Rng rng(9);
  const auto p = make_conv3x3(4, 8, Activation::Relu, rng, 0.05);
  CHECK(p.weights.cwiseAbs().maxCoeff() < 0.1);
  CHECK(p.bias.isZero());
}

TEST_CASE("gaussian log density") {
  Eigen::ArrayXd x(1), m(1), lv(1);
  x << 0.0;
  m << 0.0;
  lv << 0.0;
  CHECK(gaussian_logpdf_diag(x, m, lv) == doctest::Approx(-0.9189385332046727).epsilon(1e-15));
  x << 1.0;
  CHECK(gaussian_logpdf_diag(x, m, lv) == doctest::Approx(-1.4189385332046727).epsilon(1e-15));
  Eigen::ArrayXd x2(2), m2(2), lv2(2);
  x2 << 0.3, -1.2;
  m2 << 0.1, 0.4;
  lv2 << -0.5, 1.5;
  const double sum = gaussian_logpdf_diag(x2.head(1), m2.head(1), lv2.head(1)) +
                     gaussian_logpdf_diag(x2.tail(1), m2.tail(1), lv2.tail(1));
  CHECK(gaussian_logpdf_diag(x2, m2, lv2) == doctest::Approx(sum).epsilon(1e-15));
}

TEST_CASE("kl to standard normal") {
  Eigen::ArrayXd m(1), lv(1);
  m << 0.0;
  lv << 0.0;
  CHECK(kl_to_standard_normal(m, lv) == 0.0);
  m << 1.0;
  CHECK(kl_to_standard_normal(m, lv) == doctest::Approx(0.5).epsilon(1e-15));
  m << 0.0;
  lv << std::log(4.0);
  CHECK(kl_to_standard_normal(m, lv) == doctest::Approx(0.5 * (4.0 - std::log(4.0) - 1.0)).epsilon(1e-15));
  CHECK(kl_to_standard_normal(m, lv) == doctest::Approx(0.80685).epsilon(1e-5));
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    Eigen::ArrayXd a(3), b(3);
    for (int j = 0; j < 3; ++j) {
      a[j] = rng.normal();
      b[j] = 2 * rng.normal();
    }
    CHECK(kl_to_standard_normal(a, b) > 0.0);
  }
}

TEST_CASE("adam") {
  SUBCASE("first step") {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(1), g = Eigen::VectorXd::Constant(1, 2.0);
    AdamState st;
    AdamConfig cfg;
    cfg.learning_rate = 0.1;
    std::vector<ParamView> pv{ParamView(theta.data(), 1)};
    std::vector<GradView> gv{GradView(g.data(), 1)};
    adam_step(st, pv, gv, cfg);
    CHECK(theta[0] == doctest::Approx(-0.1).epsilon(1e-7));
  }
  SUBCASE("zero gradient") {
    Eigen::VectorXd theta = Eigen::VectorXd::Constant(3, 1.5), g = Eigen::VectorXd::Zero(3);
    AdamState st;
    std::vector<ParamView> pv{ParamView(theta.data(), 3)};
    std::vector<GradView> gv{GradView(g.data(), 3)};
    for (int i = 0; i < 5; ++i) adam_step(st, pv, gv, {});
    CHECK(theta == Eigen::VectorXd::Constant(3, 1.5));
  }
  SUBCASE("quadratic descent") {
    Eigen::VectorXd theta = Eigen::VectorXd::Ones(1), g(1);
    AdamState st;
    AdamConfig cfg;
    cfg.learning_rate = 0.05;
    std::vector<ParamView> pv{ParamView(theta.data(), 1)};
    std::vector<GradView> gv{GradView(g.data(), 1)};
    for (int i = 0; i < 200; ++i) {
      g[0] = 2.0 * theta[0];
      adam_step(st, pv, gv, cfg);
    }
    CHECK(std::abs(theta[0]) < 0.05);
  }
}

TEST_CASE("tensor container") {
  Rng rng(8);
  std::vector<cplx> cv(12);
  for (auto& v : cv) v = cplx(rng.normal(), rng.normal());
  TensorFile f;
  f.meta["note"] = "x";
  f.add("c", Tensor({3, 4}, cv));
  f.add("r", Tensor({2}, std::vector<double>{1.5, -0.0}));
  f.add("f", Tensor({1, 2}, std::vector<float>{1.25f, 3.0f}));
  f.add("u", Tensor({3}, std::vector<std::uint8_t>{0, 1, 255}));

  const auto bytes = encode_tensor_file(f);
  CHECK(bytes.substr(0, 5) == "DDPT\n");
  const auto back = decode_tensor_file(bytes);
  REQUIRE(back.entries.size() == 4);
  CHECK(back.at("c") == f.at("c"));
  CHECK(back.at("r") == f.at("r"));
  CHECK(std::signbit(back.at("r").real64()[1]));
  CHECK(back.at("f") == f.at("f"));
  CHECK(back.at("u") == f.at("u"));
  CHECK(back.meta["note"] == "x");
  CHECK(encode_tensor_file(back) == bytes);

  CHECK_THROWS_AS(back.at("c").real64(), DTypeError);
  CHECK_THROWS_AS(back.at("missing"), FormatError);

  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_tensor_file(bad), MagicError);
  CHECK_THROWS_AS(decode_tensor_file(bytes.substr(0, bytes.size() - 3)), TruncatedError);
  CHECK_THROWS_AS(decode_tensor_file("DDPT\n{not json\n"), FormatError);

  const auto empty = decode_tensor_file(encode_tensor_file(TensorFile{}));
  CHECK(empty.entries.empty());

  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(Tensor({1}, std::vector<double>{std::nan("")}), NonFiniteError);

  const auto path = std::filesystem::temp_directory_path() / "ddp_test_container.ddpt";
  tensor_io_write(path, f);
  CHECK(encode_tensor_file(tensor_io_read(path)) == bytes);
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(tensor_io_read(path), IoError);
}

TEST_CASE("image conversions") {
  Rng rng(1);
  const auto c = oracle::random_image(3, 5, rng);
  CHECK((to_complex_image(to_tensor(c)) == c).all());
  const auto r = oracle::random_real(4, 2, rng);
  CHECK((to_real_image(to_tensor(r)) == r).all());
  BoolImage b(2, 2);
  b << true, false, false, true;
  CHECK((to_bool_image(to_tensor(b)) == b).all());
  CHECK(to_tensor(r).shape() == Shape{4, 2});
}

TEST_CASE("pgm and csv") {
  const std::string pgm = encode_pgm({0, 128, 255, 7}, 2, 2);
  CHECK(pgm == std::string("P5\n2 2\n255\n") + std::string("\x00\x80\xff\x07", 4));
  RealImage v(1, 3);
  v << -1.0, 0.0, 1.0;
  const std::string s = pgm_signed(v, 0.3);
  CHECK(static_cast<unsigned char>(s[s.size() - 3]) == 0);
  CHECK(static_cast<unsigned char>(s[s.size() - 1]) == 255);
  CsvTable t({"a", "b"});
  t.add_row({"1", format_double(std::nan(""))});
  CHECK(t.str() == "a,b\n1,\n");
  CHECK(format_double(0.1) == "0.1");
}
