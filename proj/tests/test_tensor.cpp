#include <doctest.h>

#include <cmath>
#include <random>

#include "dia/error.hpp"
#include "dia/tensor.hpp"
#include "support/toy_network.hpp"

using namespace dia;
using dia::testing::random_map;

TEST_CASE("warp with identity NNF reproduces the source bit-exactly") {
  const FeatureMap src = random_map(5, 7, 3, 11);
  CHECK(warp(src, NNField::identity(5, 7)) == src);
}

TEST_CASE("warp with a constant NNF broadcasts one position") {
  const FeatureMap src = random_map(4, 4, 2, 3);
  const NNField nnf(4, 4, 4, 4);  // every entry (0,0)
  const FeatureMap out = warp(src, nnf);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      for (int ch = 0; ch < 2; ++ch) CHECK(out(r, c, ch) == src(0, 0, ch));
    }
  }
}

TEST_CASE("warp with a clamped downward shift reads the next row") {
  const FeatureMap src = random_map(4, 4, 2, 5);
  NNField nnf(4, 4, 4, 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) nnf.set(r, c, nnf.clamp_target({r + 1, c}));
  }
  const FeatureMap out = warp(src, nnf);
  for (int r = 0; r < 4; ++r) {
    const int from = r < 3 ? r + 1 : 3;
    for (int c = 0; c < 4; ++c) {
      for (int ch = 0; ch < 2; ++ch) CHECK(out(r, c, ch) == src(from, c, ch));
    }
  }
}

TEST_CASE("warp rejects mismatched target bounds") {
  const FeatureMap src = random_map(4, 4, 2, 5);
  CHECK_THROWS_AS(warp(src, NNField(4, 4, 5, 4)), DimensionError);
}

TEST_CASE("warp stays in bounds for random valid fields") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> side(1, 9);
    const int h = side(rng), w = side(rng), th = side(rng), tw = side(rng);
    const FeatureMap src = random_map(th, tw, 3, trial);
    NNField nnf(h, w, th, tw);
    std::uniform_int_distribution<int> qr(0, th - 1), qc(0, tw - 1);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) nnf.set(r, c, {qr(rng), qc(rng)});
    }
    const FeatureMap out = warp(src, nnf);
    REQUIRE(out.height() == h);
    REQUIRE(out.width() == w);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) CHECK(out(r, c, 1) == src(nnf(r, c).row, nnf(r, c).col, 1));
    }
  }
}

TEST_CASE("NNField rejects targets outside its bounds") {
  NNField nnf(2, 2, 3, 3);
  CHECK_THROWS_AS(nnf.set(0, 0, {3, 0}), DimensionError);
  CHECK_THROWS_AS(nnf.set(0, 0, {0, -1}), DimensionError);
  CHECK_NOTHROW(nnf.set(1, 1, {2, 2}));
}

TEST_CASE("upsample_nnf preserves the identity") {
  CHECK(upsample_nnf(NNField::identity(4, 4), 8, 8, 8, 8) == NNField::identity(8, 8));
  CHECK(upsample_nnf(NNField::identity(3, 5), 6, 10, 6, 10) == NNField::identity(6, 10));
}

TEST_CASE("upsample_nnf doubles a constant shift") {
  NNField shift(4, 4, 4, 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) shift.set(r, c, shift.clamp_target({r + 1, c + 1}));
  }
  const NNField up = upsample_nnf(shift, 8, 8, 8, 8);
  // Interior: parents with an unclamped shift, children whose shifted target stays inside.
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) {
      CHECK(up(r, c) == Coord{r + 2, c + 2});
    }
  }
  // Border children clamp into the new bounds.
  CHECK(up(7, 7) == Coord{7, 7});
}

TEST_CASE("upsample_nnf of a 1x1 field") {
  NNField one(1, 1, 1, 1);
  const NNField up = upsample_nnf(one, 2, 2, 2, 2);
  // The single parent maps to the scaled origin; children keep their in-cell offset.
  CHECK(up(0, 0) == Coord{0, 0});
  CHECK(up(0, 1) == Coord{0, 1});
  CHECK(up(1, 0) == Coord{1, 0});
  CHECK(up(1, 1) == Coord{1, 1});
}

TEST_CASE("upsample_nnf handles rectangular source and target grids") {
  NNField nnf(2, 3, 4, 2);
  nnf.set(1, 2, {3, 1});
  const NNField up = upsample_nnf(nnf, 4, 6, 8, 4);
  CHECK(up.target_height() == 8);
  CHECK(up.target_width() == 4);
  CHECK(up(2, 4) == Coord{6, 2});
  CHECK(up(3, 5) == Coord{7, 3});
}

TEST_CASE("upsample_nnf rejects zero-sized grids") {
  CHECK_THROWS_AS(upsample_nnf(NNField::identity(2, 2), 0, 4, 4, 4), DimensionError);
  CHECK_THROWS_AS(upsample_nnf(NNField::identity(2, 2), 4, 4, 4, 0), DimensionError);
}

TEST_CASE("normalize maps (3,4) to (0.6,0.8) and zero to zero") {
  FeatureMap m(1, 2, 2);
  m(0, 0, 0) = 3.0;
  m(0, 0, 1) = 4.0;
  const FeatureMap n = normalize(m);
  CHECK(n(0, 0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(n(0, 0, 1) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(n(0, 1, 0) == 0.0);
  CHECK(n(0, 1, 1) == 0.0);
}

TEST_CASE("normalize yields unit or zero norms and is idempotent") {
  FeatureMap m = random_map(5, 5, 16, 21);
  for (double& v : m.at(2, 3)) v = 0.0;
  const FeatureMap n = normalize(m);
  const FeatureMap nn = normalize(n);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) {
      double sq = 0.0;
      for (double v : n.at(r, c)) sq += v * v;
      const double norm = std::sqrt(sq);
      CHECK((norm == 0.0 || std::abs(norm - 1.0) <= 1e-6));
      for (int ch = 0; ch < 16; ++ch) CHECK(std::abs(nn(r, c, ch) - n(r, c, ch)) <= 1e-6);
    }
  }
}

TEST_CASE("response_magnitude") {
  SUBCASE("uniform map gives all ones") {
    const FeatureMap m(3, 3, 4, 0.7);
    const ScalarMap mag = response_magnitude(m);
    for (double v : mag.data()) CHECK(v == 1.0);
  }
  SUBCASE("zero map stays zero") {
    const FeatureMap m(3, 3, 4);
    const ScalarMap mag = response_magnitude(m);
    for (double v : mag.data()) CHECK(v == 0.0);
  }
  SUBCASE("hand-computed 3x3x2 map") {
    FeatureMap m(3, 3, 2);
    const double values[9][2] = {{1, 0}, {0, 2}, {1, 1}, {3, 4}, {0, 0}, {-1, 2},
                                 {2, 2}, {0, -5}, {0.5, 0.5}};
    for (int i = 0; i < 9; ++i) {
      m(i / 3, i % 3, 0) = values[i][0];
      m(i / 3, i % 3, 1) = values[i][1];
    }
    const ScalarMap mag = response_magnitude(m);
    const double expected[9] = {1.0 / 25, 4.0 / 25, 2.0 / 25, 1.0, 0.0, 5.0 / 25, 8.0 / 25, 1.0, 0.5 / 25};
    for (int i = 0; i < 9; ++i) CHECK(mag(i / 3, i % 3) == doctest::Approx(expected[i]).epsilon(1e-15));
  }
}
