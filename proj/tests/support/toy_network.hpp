#pragma once

// In-memory fixtures: small random networks and images for the test suites.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dia/net.hpp"
#include "dia/tensor.hpp"

namespace dia::testing {

inline ConvLayer random_conv(const std::string& name, int inC, int outC, int k, int pad,
                             std::mt19937_64& rng, int stride = 1) {
  ConvLayer conv;
  conv.name = name;
  conv.inChannels = inC;
  conv.outChannels = outC;
  conv.kernelH = conv.kernelW = k;
  conv.stride = stride;
  conv.padding = pad;
  // He-style fan-in scaling keeps activations at a similar scale level to level.
  std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 / (inC * k * k)));
  conv.weight.resize(static_cast<std::size_t>(outC) * inC * k * k);
  for (double& w : conv.weight) w = gauss(rng);
  std::normal_distribution<double> small(0.0, 0.01);
  conv.bias.resize(static_cast<std::size_t>(outC));
  for (double& b : conv.bias) b = small(rng);
  return conv;
}

/// conv-relu [tag] (maxpool conv-relu [tag])* ... with `channels[i]` maps at level i+1.
inline Network toy_network(const std::vector<int>& channels, std::uint64_t seed,
                           std::array<double, 3> mean = {123.68, 116.78, 103.94}) {
  std::mt19937_64 rng(seed);
  std::vector<Layer> layers;
  std::vector<PyramidTag> tags;
  int in = 3;
  for (std::size_t level = 0; level < channels.size(); ++level) {
    if (level > 0) layers.emplace_back(MaxPoolLayer{2, 2});
    layers.emplace_back(random_conv("conv" + std::to_string(level + 1) + "_1", in, channels[level], 3, 1, rng));
    layers.emplace_back(ReluLayer{});
    tags.push_back({"relu" + std::to_string(level + 1) + "_1", layers.size()});
    in = channels[level];
  }
  return Network(mean, std::move(layers), std::move(tags));
}

/// Three-level network used by the end-to-end tests.
inline Network toy3(std::uint64_t seed = 7) { return toy_network({8, 12, 16}, seed); }

/// 2x2 stride-2 convolution whose (4*inC) x (4*inC) weight matrix is
/// orthonormal, so the layer is exactly invertible.
inline ConvLayer orthogonal_downsample(const std::string& name, int inC, std::mt19937_64& rng) {
  const int n = 4 * inC;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
  for (auto& row : rows) {
    for (double& v : row) v = gauss(rng);
  }
  // Modified Gram-Schmidt.
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < rows[i].size(); ++k) dot += rows[i][k] * rows[j][k];
      for (std::size_t k = 0; k < rows[i].size(); ++k) rows[i][k] -= dot * rows[j][k];
    }
    double norm = 0.0;
    for (double v : rows[i]) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : rows[i]) v /= norm;
  }
  ConvLayer conv;
  conv.name = name;
  conv.inChannels = inC;
  conv.outChannels = n;
  conv.kernelH = conv.kernelW = 2;
  conv.stride = 2;
  // Row k of the matrix indexes (i, ky, kx), which is the weight layout order.
  for (const auto& row : rows) conv.weight.insert(conv.weight.end(), row.begin(), row.end());
  conv.bias.assign(static_cast<std::size_t>(n), 0.0);
  return conv;
}

/// Three levels (4, 16, 64 channels) whose downsampling is linear and
/// invertible, so deconvolution recovers the lower level exactly. The first
/// level has no relu: with 4 channels, positions with one active channel would
/// all normalize to the same one-hot vector and tie.
inline Network invertible_toy3(std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::vector<Layer> layers;
  layers.emplace_back(random_conv("conv1_1", 3, 4, 3, 1, rng));
  layers.emplace_back(orthogonal_downsample("down2", 4, rng));
  layers.emplace_back(orthogonal_downsample("down3", 16, rng));
  return Network({123.68, 116.78, 103.94}, std::move(layers),
                 {{"conv1_1", 1}, {"down2", 2}, {"down3", 3}});
}

/// VGG-19 convolutional trunk (16 convs, tags reluN_1) with random weights.
inline Network vgg19_random(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<std::vector<int>> blocks{{64, 64}, {128, 128}, {256, 256, 256, 256},
                                             {512, 512, 512, 512}, {512, 512, 512, 512}};
  std::vector<Layer> layers;
  std::vector<PyramidTag> tags;
  int in = 3;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (b > 0) layers.emplace_back(MaxPoolLayer{2, 2});
    for (std::size_t j = 0; j < blocks[b].size(); ++j) {
      const std::string name = "conv" + std::to_string(b + 1) + "_" + std::to_string(j + 1);
      layers.emplace_back(random_conv(name, in, blocks[b][j], 3, 1, rng));
      layers.emplace_back(ReluLayer{});
      in = blocks[b][j];
      if (j == 0) tags.push_back({"relu" + std::to_string(b + 1) + "_1", layers.size()});
    }
  }
  return Network({123.68, 116.78, 103.94}, std::move(layers), std::move(tags));
}

inline FeatureMap random_map(int h, int w, int c, std::uint64_t seed, double lo = -1.0,
                             double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  FeatureMap m(h, w, c);
  for (double& v : m.data()) v = u(rng);
  return m;
}

/// Smoothly varying colors plus a high-frequency pattern: every patch is distinct.
inline Image textured_image(int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> noise(0, 90);
  Image img(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      img(r, c, 0) = static_cast<std::uint8_t>(std::clamp(60 + 2 * r + noise(rng), 0, 255));
      img(r, c, 1) = static_cast<std::uint8_t>(std::clamp(40 + 2 * c + noise(rng), 0, 255));
      img(r, c, 2) = static_cast<std::uint8_t>(
          std::clamp(static_cast<int>(128 + 80 * std::sin(0.3 * r + 0.2 * c)) + noise(rng) / 3, 0, 255));
    }
  }
  return img;
}

}  // namespace dia::testing
