#include <doctest.h>

#include <cmath>
#include <random>

#include "dia/match.hpp"
#include "dia/pipeline.hpp"
#include "dia/reference.hpp"
#include "support/toy_network.hpp"

// The OpenMP kernels against the serial loop nests.

using namespace dia;
using dia::testing::random_map;

namespace {

double max_abs_diff(const FeatureMap& a, const FeatureMap& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace

TEST_CASE("convolution backward agrees with the serial loop") {
  std::mt19937_64 rng(3);
  for (int stride : {1, 2}) {
    const ConvLayer conv = dia::testing::random_conv("c", 5, 7, 3, 1, rng, stride);
    const FeatureMap in = random_map(11, 9, 5, 4);
    const FeatureMap out = conv2d_forward(in, conv);
    const FeatureMap g = random_map(out.height(), out.width(), out.channels(), 5);
    const FeatureMap fast = conv2d_backward(g, conv, 11, 9);
    const FeatureMap slow = reference::conv2d_backward(g, conv, 11, 9);
    REQUIRE(fast.same_shape(slow));
    CHECK(max_abs_diff(fast, slow) <= 1e-12);
  }
}

TEST_CASE("warp agrees with the serial loop") {
  const FeatureMap src = random_map(9, 6, 4, 1);
  const NNField nnf = random_nnf(7, 8, 9, 6, 2);
  CHECK(warp(src, nnf) == reference::warp(src, nnf));
}

TEST_CASE("cost field and exhaustive search agree with the serial loop") {
  const FeatureMap a = normalize(random_map(9, 8, 6, 1));
  const FeatureMap a2 = normalize(random_map(9, 8, 6, 2));
  const FeatureMap b = normalize(random_map(7, 10, 6, 3));
  const FeatureMap b2 = normalize(random_map(7, 10, 6, 4));
  const MatchMaps maps{a, a2, b, b2};
  const NNField nnf = random_nnf(9, 8, 7, 10, 5);
  for (bool bidir : {true, false}) {
    for (int radius : {0, 1, 2}) {
      const auto fast = cost_field(maps, nnf, radius, bidir);
      const auto slow = reference::cost_field(maps, nnf, radius, bidir);
      REQUIRE(fast.size() == slow.size());
      for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
      CHECK(exhaustive_nnf(maps, radius, bidir) == reference::exhaustive_nnf(maps, radius, bidir));
    }
  }
}

TEST_CASE("aggregate_output agrees with the serial loop") {
  const Image src = dia::testing::textured_image(12, 10, 6);
  for (int radius : {0, 1, 2}) {
    const NNField nnf = random_nnf(9, 11, 12, 10, static_cast<std::uint64_t>(radius));
    CHECK(aggregate_output(src, nnf, radius) == reference::aggregate_output(src, nnf, radius));
  }
}
