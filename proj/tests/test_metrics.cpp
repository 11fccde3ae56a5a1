#include <doctest.h>

#include "ddp/errors.hpp"
#include "ddp/metrics.hpp"
#include "ddp/phantom.hpp"
#include "oracles.hpp"

using namespace ddp;

namespace {

// Two regions laid out so that WM is a 1x2 strip: erosion removes all of it,
// leaving the whole strip as the boundary band.
SegMasks strip_masks() {
  SegMasks m;
  m.gm = BoolImage::Constant(1, 4, false);
  m.wm = BoolImage::Constant(1, 4, false);
  m.gm(0, 0) = m.gm(0, 1) = true;
  m.wm(0, 2) = m.wm(0, 3) = true;
  return m;
}

}  // namespace

TEST_CASE("rmse examples") {
  ComplexImage gt(1, 2), rec(1, 2);
  gt << 3.0, 4.0;
  rec << 3.0, 0.0;
  CHECK(rmse(gt, rec) == doctest::Approx(80.0).epsilon(1e-14));
  CHECK(rmse(gt, gt) == 0.0);
  CHECK(rmse(gt, ComplexImage(ComplexImage::Zero(1, 2))) == doctest::Approx(100.0).epsilon(1e-14));
  // magnitudes only: a phase rotation costs nothing
  CHECK(rmse(gt, ComplexImage(gt * std::polar(1.0, 2.0))) <= 1e-13);

  BoolImage all = BoolImage::Constant(1, 2, true);
  CHECK(rmse(gt, rec, &all) == rmse(gt, rec));
  BoolImage first = all;
  first(0, 1) = false;
  CHECK(rmse(gt, rec, &first) == 0.0);

  CHECK_THROWS_AS(rmse(ComplexImage(ComplexImage::Zero(1, 2)), rec), InvalidArgument);
  CHECK_THROWS_AS(rmse(gt, ComplexImage(ComplexImage::Zero(2, 1))), ShapeError);
}

TEST_CASE("cnr and cn") {
  const auto m = strip_masks();
  ComplexImage rec(1, 4);
  rec << 0.0, 2.0, 4.0, 6.0;
  CHECK(boundary_band(m.wm)(0, 2));
  CHECK(cnr(rec, m) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(cn(rec, m) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(std::abs(cnr(ComplexImage(rec * 3.7), m) - 2.0) <= 1e-12);
  ComplexImage shifted = rec + 1.5;
  CHECK(std::abs(cn(shifted, m) - 4.0) <= 1e-12);
  ComplexImage same(1, 4);
  same << 1.0, 1.0, 1.0, 1.0;
  CHECK(cn(same, m) == 0.0);
  CHECK_THROWS_AS(cnr(same, m), InvalidArgument);
  auto empty = m;
  empty.wm.setConstant(false);
  CHECK_THROWS_AS(cnr(rec, empty), InvalidArgument);
  CHECK_THROWS_AS(cn(rec, empty), InvalidArgument);
}

TEST_CASE("cnr on a phantom uses the WM boundary band") {
  const auto ph = gen_phantom(64, 64, 3);
  const auto masks = seg_masks_from_labels(ph.labels);
  const BoolImage band = masks.wm && !oracle::brute_erode(masks.wm, 7);
  CHECK((boundary_band(masks.wm) == band).all());
  const RealImage mag = ph.magnitude;
  double gs = 0, gn = 0, ws = 0, wn = 0;
  for (Eigen::Index i = 0; i < mag.size(); ++i) {
    if (masks.gm.data()[i]) gs += mag.data()[i], ++gn;
    if (band.data()[i]) ws += mag.data()[i], ++wn;
  }
  const double gmean = gs / gn, wmean = ws / wn;
  double gv = 0, wv = 0;
  for (Eigen::Index i = 0; i < mag.size(); ++i) {
    if (masks.gm.data()[i]) gv += (mag.data()[i] - gmean) * (mag.data()[i] - gmean);
    if (band.data()[i]) wv += (mag.data()[i] - wmean) * (mag.data()[i] - wmean);
  }
  const double expect = std::abs(gmean - wmean) / (std::sqrt(gv / gn) + std::sqrt(wv / wn));
  CHECK(cnr(ph.complex_image(), masks) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(cn(ph.complex_image(), masks) == doctest::Approx(std::abs(gmean - wmean)).epsilon(1e-12));
}

TEST_CASE("binary erosion") {
  const BoolImage full = BoolImage::Constant(9, 9, true);
  const auto e = binary_erode(full, 7);
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 9; ++c) CHECK(e(r, c) == (r >= 3 && r <= 5 && c >= 3 && c <= 5));
  CHECK_FALSE(binary_erode(BoolImage::Constant(5, 6, false)).any());
  CHECK_THROWS_AS(binary_erode(full, 4), InvalidArgument);

  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    BoolImage m(12 + trial % 5, 15);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform() < 0.8;
    for (int k : {1, 3, 5, 7}) {
      const auto er = binary_erode(m, k);
      CHECK((er == oracle::brute_erode(m, k)).all());
      CHECK_FALSE((er && !m).any());
    }
    CHECK((binary_erode(binary_erode(m, 3), 3) == binary_erode(m, 5)).all());
  }
}

TEST_CASE("segmentation masks and phase error") {
  LabelImage l(1, 4);
  l << 0, 1, 2, 3;
  const auto m = seg_masks_from_labels(l);
  CHECK(m.wm(0, 1));
  CHECK(m.gm(0, 2));
  CHECK_FALSE((m.gm && m.wm).any());
  REQUIRE(m.eval.has_value());
  CHECK_FALSE((*m.eval)(0, 0));
  CHECK((*m.eval)(0, 3));

  ComplexImage gt(1, 2), rec(1, 2);
  gt << 1.0, cplx(0, 1);
  rec = gt * std::polar(1.0, 0.2);
  const BoolImage all = BoolImage::Constant(1, 2, true);
  CHECK(phase_rmse(gt, rec, all) == doctest::Approx(0.2).epsilon(1e-12));
}
