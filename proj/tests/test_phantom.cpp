#include <doctest.h>

#include "ddp/errors.hpp"
#include "ddp/phantom.hpp"

using namespace ddp;

TEST_CASE("phantoms are deterministic and bounded") {
  const auto a = gen_phantom(64, 48, 5);
  const auto b = gen_phantom(64, 48, 5);
  CHECK((a.magnitude == b.magnitude).all());
  CHECK((a.phase == b.phase).all());
  CHECK((a.labels == b.labels).all());
  CHECK_FALSE((gen_phantom(64, 48, 6).magnitude == a.magnitude).all());
  CHECK_THROWS_AS(gen_phantom(31, 64, 1), InvalidArgument);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto ph = gen_phantom(64, 64, seed);
    CHECK(ph.magnitude.minCoeff() >= 0.0);
    CHECK(ph.magnitude.maxCoeff() <= 1.0);
    CHECK(ph.labels.maxCoeff() <= 3);
    double sum[4] = {0, 0, 0, 0};
    int n[4] = {0, 0, 0, 0};
    for (Eigen::Index i = 0; i < ph.labels.size(); ++i) {
      const int l = ph.labels.data()[i];
      if (l == kBackground) CHECK(ph.magnitude.data()[i] == 0.0);
      sum[l] += ph.magnitude.data()[i];
      ++n[l];
    }
    for (int l = 1; l < 4; ++l) REQUIRE(n[l] > 0);
    const double wm = sum[1] / n[1], gm = sum[2] / n[2], csf = sum[3] / n[3];
    CHECK(csf > wm);
    CHECK(wm > gm);
    CHECK(ph.phase.allFinite());
    const auto c = ph.complex_image();
    CHECK((c.abs() - ph.magnitude).abs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("training patches are crops of the normalised source") {
  std::vector<Phantom> phs{gen_phantom(48, 48, 1), gen_phantom(40, 56, 2)};
  Rng rng(3);
  const auto set = extract_training_patches(phs, 8, 300, rng);
  CHECK(set.patch == 8);
  CHECK(set.size() == 300);
  CHECK(set.patches.rows() == 64);
  CHECK(set.patches.minCoeff() >= 0.0);
  REQUIRE(set.provenance.size() == 300);
  std::vector<RealImage> norm;
  for (const auto& ph : phs) norm.push_back(normalized_magnitude(ph));
  for (int i = 0; i < 300; ++i) {
    const auto& pv = set.provenance[i];
    const auto& src = norm[pv.source];
    REQUIRE(pv.row + 8 <= src.rows());
    REQUIRE(pv.col + 8 <= src.cols());
    CHECK(phs[pv.source].labels(pv.row + 4, pv.col + 4) != kBackground);
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) CHECK(set.patches(y * 8 + x, i) == src(pv.row + y, pv.col + x));
  }
  Rng again(3);
  CHECK(extract_training_patches(phs, 8, 300, again).patches == set.patches);

  CHECK_THROWS_AS(extract_training_patches(phs, 8, 0, rng), InvalidArgument);
  CHECK_THROWS_AS(extract_training_patches(phs, 64, 5, rng), InvalidArgument);
  Phantom empty = phs[0];
  empty.magnitude.setZero();
  empty.labels.setZero();
  CHECK_THROWS_AS(extract_training_patches({empty}, 8, 5, rng), InvalidArgument);
}

TEST_CASE("phantom and patch containers round-trip") {
  const auto ph = gen_phantom(32, 40, 9);
  const auto back = phantom_from_file(decode_tensor_file(encode_tensor_file(phantom_to_file(ph))));
  CHECK((back.magnitude == ph.magnitude).all());
  CHECK((back.phase == ph.phase).all());
  CHECK((back.labels == ph.labels).all());

  Rng rng(4);
  const auto set = extract_training_patches({ph}, 8, 20, rng);
  const auto set2 = patchset_from_file(decode_tensor_file(encode_tensor_file(patchset_to_file(set))));
  CHECK(set2.patch == 8);
  CHECK(set2.patches == set.patches);
  for (std::size_t i = 0; i < set.provenance.size(); ++i) {
    CHECK(set2.provenance[i].row == set.provenance[i].row);
    CHECK(set2.provenance[i].col == set.provenance[i].col);
  }
}

TEST_CASE("training noise") {
  PatchSet set;
  set.patch = 4;
  set.patches = Eigen::MatrixXd::Constant(16, 10000, 0.5);
  PatchSet same = set;
  Rng rng(1);
  add_training_noise(same, 0.0, rng);
  CHECK(same.patches == set.patches);
  add_training_noise(set, 0.1, rng);
  const Eigen::ArrayXXd v = set.patches.array();
  // 160000 draws: the mean is within 5e-3 of 0.5 by a wide margin, the
  // variance within 3 % of 0.01
  CHECK(std::abs(v.mean() - 0.5) <= 5e-3);
  CHECK((v - v.mean()).square().mean() == doctest::Approx(0.01).epsilon(0.03));
  CHECK_THROWS_AS(add_training_noise(set, -1.0, rng), InvalidArgument);
}
