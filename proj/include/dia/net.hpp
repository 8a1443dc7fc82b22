#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dia/error.hpp"
#include "dia/tensor.hpp"

namespace dia {

/// 2-D convolution. `weight` is laid out [outChannels, inChannels, kernelH, kernelW].
struct ConvLayer {
  std::string name;
  int outChannels = 0;
  int inChannels = 0;
  int kernelH = 0;
  int kernelW = 0;
  int stride = 1;
  int padding = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  double w(int o, int i, int ky, int kx) const {
    return weight[((static_cast<std::size_t>(o) * inChannels + i) * kernelH + ky) * kernelW + kx];
  }
};

struct ReluLayer {};

struct MaxPoolLayer {
  int kernel = 2;
  int stride = 2;
};

using Layer = std::variant<ConvLayer, ReluLayer, MaxPoolLayer>;

/// A pyramid level: the output of the first `end` layers.
struct PyramidTag {
  std::string label;
  std::size_t end = 0;
};

/// Output spatial size of a window operation.
inline int window_output(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

/// Feed-forward conv/relu/maxpool network with pyramid tags ordered fine to
/// coarse. Levels are 1-based: level 1 is the first tag.
class Network {
 public:
  Network(std::array<double, 3> mean, std::vector<Layer> layers, std::vector<PyramidTag> tags);

  const std::array<double, 3>& mean() const noexcept { return mean_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  const std::vector<PyramidTag>& tags() const noexcept { return tags_; }
  int levels() const noexcept { return static_cast<int>(tags_.size()); }

  /// Level index of a tag label; throws Error if the label is unknown.
  int level_of(std::string_view label) const;
  /// Channel count produced at a level.
  int channels_at(int level) const;
  /// Product of pooling/conv strides applied before a level.
  int downsampling_at(int level) const;
  /// Spatial size of the map at `level` for an input of inH x inW.
  std::array<int, 2> spatial_at(int level, int inH, int inW) const;
  std::size_t conv_count() const;

  /// Layers strictly after level `from` through level `to` (from may be 0 for the input).
  std::span<const Layer> subnet(int from, int to) const;

 private:
  void validate() const;

  std::array<double, 3> mean_{};
  std::vector<Layer> layers_;
  std::vector<PyramidTag> tags_;
};

/// Converts an 8-bit RGB image into the network input: values in [0,255]
/// minus the per-channel mean.
FeatureMap preprocess(const Network& net, const Image& img);

/// Feature maps at every pyramid level for one image, index 0 = level 1.
std::vector<FeatureMap> forward(const Network& net, const Image& img);

/// Convolution kernels (OpenMP, im2col + GEMM). Zero padding.
FeatureMap conv2d_forward(const FeatureMap& input, const ConvLayer& conv);
/// Gradient with respect to the convolution input (transposed convolution).
FeatureMap conv2d_backward(const FeatureMap& gradOutput, const ConvLayer& conv, int inH, int inW);

/// Applies one layer.
FeatureMap apply_layer(const Layer& layer, const FeatureMap& input);

/// Runs the layers between two levels (from may be 0, meaning the raw input).
FeatureMap forward_subnet(const Network& net, int from, int to, const FeatureMap& input);

/// Vector-Jacobian product of the subnet between two levels: given dLoss/dOutput,
/// returns dLoss/dInput evaluated at `input`.
FeatureMap backward_subnet(const Network& net, int from, int to, const FeatureMap& input,
                           const FeatureMap& upstreamGrad);

/// Forward activations of a subnet, kept for a subsequent backward pass.
class SubnetTrace {
 public:
  SubnetTrace(const Network& net, int from, int to, const FeatureMap& input);

  const FeatureMap& output() const noexcept { return activations_.back(); }
  FeatureMap backward(const FeatureMap& upstreamGrad) const;

 private:
  std::span<const Layer> layers_;
  std::vector<FeatureMap> activations_;                // input of layer i, plus the final output
  std::vector<std::vector<std::uint32_t>> argmax_;     // per layer; empty unless maxpool
};

// Binary weight container and manifest.

/// Raised by load_network; `kind` distinguishes the failure and `layer` names
/// the offending layer or tensor when there is one.
class NetworkFormatError : public FormatError {
 public:
  enum class Kind {
    BadMagic,
    VersionMismatch,
    Truncated,
    ShapeMismatch,
    UnknownLayerKind,
    DanglingTag,
    MissingTensor,
    UnusedTensor,
    Malformed,
  };
  NetworkFormatError(Kind kind, std::string layer, const std::string& message)
      : FormatError(message), kind_(kind), layer_(std::move(layer)) {}
  Kind kind() const noexcept { return kind_; }
  const std::string& layer() const noexcept { return layer_; }

 private:
  Kind kind_;
  std::string layer_;
};

/// Parses the DIAW weight file and manifest text into a validated Network.
Network load_network(std::string_view manifestText, std::span<const std::uint8_t> weightBytes);
Network load_network_files(const std::string& manifestPath, const std::string& weightsPath);

/// Inverse of load_network; used to build fixtures.
std::string encode_manifest(const Network& net);
std::vector<std::uint8_t> encode_weights(const Network& net);

}  // namespace dia
