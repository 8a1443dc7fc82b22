#include "dia/net.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace dia {

namespace {

using Kind = NetworkFormatError::Kind;

std::string layer_label(const Layer& layer, std::size_t index) {
  if (const auto* conv = std::get_if<ConvLayer>(&layer)) return conv->name;
  std::ostringstream os;
  os << (std::holds_alternative<ReluLayer>(layer) ? "relu" : "maxpool") << "#" << index;
  return os.str();
}

}  // namespace

Network::Network(std::array<double, 3> mean, std::vector<Layer> layers,
                 std::vector<PyramidTag> tags)
    : mean_(mean), layers_(std::move(layers)), tags_(std::move(tags)) {
  validate();
}

void Network::validate() const {
  int channels = 3;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& layer = layers_[i];
    const std::string label = layer_label(layer, i);
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
      if (conv->outChannels <= 0 || conv->inChannels <= 0 || conv->kernelH <= 0 ||
          conv->kernelW <= 0 || conv->stride <= 0 || conv->padding < 0) {
        throw NetworkFormatError(Kind::Malformed, label, "layer " + label + ": invalid conv geometry");
      }
      if (conv->inChannels != channels) {
        std::ostringstream os;
        os << "layer " << label << ": expects " << conv->inChannels << " input channels but receives "
           << channels;
        throw NetworkFormatError(Kind::ShapeMismatch, label, os.str());
      }
      const std::size_t expected = static_cast<std::size_t>(conv->outChannels) *
                                   conv->inChannels * conv->kernelH * conv->kernelW;
      if (conv->weight.size() != expected) {
        std::ostringstream os;
        os << "layer " << label << ": weight has " << conv->weight.size() << " values, expected "
           << expected;
        throw NetworkFormatError(Kind::ShapeMismatch, label, os.str());
      }
      if (conv->bias.size() != static_cast<std::size_t>(conv->outChannels)) {
        std::ostringstream os;
        os << "layer " << label << ": bias has " << conv->bias.size() << " values, expected "
           << conv->outChannels;
        throw NetworkFormatError(Kind::ShapeMismatch, label, os.str());
      }
      channels = conv->outChannels;
    } else if (const auto* pool = std::get_if<MaxPoolLayer>(&layer)) {
      if (pool->kernel <= 0 || pool->stride <= 0) {
        throw NetworkFormatError(Kind::Malformed, label, "layer " + label + ": invalid pooling geometry");
      }
    }
  }
  if (tags_.size() < 2) {
    throw NetworkFormatError(Kind::DanglingTag, "",
                             "network needs at least 2 pyramid tags, found " +
                                 std::to_string(tags_.size()));
  }
  std::size_t previous = 0;
  for (std::size_t t = 0; t < tags_.size(); ++t) {
    const PyramidTag& tag = tags_[t];
    if (tag.end == 0 || tag.end > layers_.size()) {
      throw NetworkFormatError(Kind::DanglingTag, tag.label,
                               "tag " + tag.label + " does not follow any layer");
    }
    if (tag.end <= previous) {
      throw NetworkFormatError(Kind::DanglingTag, tag.label,
                               "tag " + tag.label + " does not follow a new layer");
    }
    for (std::size_t u = 0; u < t; ++u) {
      if (tags_[u].label == tag.label) {
        throw NetworkFormatError(Kind::DanglingTag, tag.label, "duplicate tag " + tag.label);
      }
    }
    previous = tag.end;
  }
}

int Network::level_of(std::string_view label) const {
  for (std::size_t t = 0; t < tags_.size(); ++t) {
    if (tags_[t].label == label) return static_cast<int>(t) + 1;
  }
  throw Error("unknown pyramid tag: " + std::string(label));
}

std::span<const Layer> Network::subnet(int from, int to) const {
  if (from < 0 || to > levels() || from >= to) {
    std::ostringstream os;
    os << "invalid subnet range " << from << " -> " << to << " (network has " << levels()
       << " levels)";
    throw Error(os.str());
  }
  const std::size_t begin = from == 0 ? 0 : tags_[static_cast<std::size_t>(from) - 1].end;
  const std::size_t end = tags_[static_cast<std::size_t>(to) - 1].end;
  return std::span<const Layer>(layers_).subspan(begin, end - begin);
}

int Network::channels_at(int level) const {
  int channels = 3;
  for (const Layer& layer : subnet(0, level)) {
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) channels = conv->outChannels;
  }
  return channels;
}

int Network::downsampling_at(int level) const {
  int factor = 1;
  for (const Layer& layer : subnet(0, level)) {
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) factor *= conv->stride;
    if (const auto* pool = std::get_if<MaxPoolLayer>(&layer)) factor *= pool->stride;
  }
  return factor;
}

std::array<int, 2> Network::spatial_at(int level, int inH, int inW) const {
  int h = inH;
  int w = inW;
  for (const Layer& layer : subnet(0, level)) {
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
      h = window_output(h, conv->kernelH, conv->stride, conv->padding);
      w = window_output(w, conv->kernelW, conv->stride, conv->padding);
    } else if (const auto* pool = std::get_if<MaxPoolLayer>(&layer)) {
      h = window_output(h, pool->kernel, pool->stride, 0);
      w = window_output(w, pool->kernel, pool->stride, 0);
    }
  }
  return {h, w};
}

std::size_t Network::conv_count() const {
  return static_cast<std::size_t>(std::count_if(layers_.begin(), layers_.end(), [](const Layer& l) {
    return std::holds_alternative<ConvLayer>(l);
  }));
}

FeatureMap preprocess(const Network& net, const Image& img) {
  FeatureMap out(img.height(), img.width(), 3);
  const auto& mean = net.mean();
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      for (int ch = 0; ch < 3; ++ch) out(r, c, ch) = static_cast<double>(img(r, c, ch)) - mean[ch];
    }
  }
  return out;
}

namespace {

FeatureMap relu_forward(const FeatureMap& input) {
  FeatureMap out = input;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

FeatureMap maxpool_forward(const FeatureMap& input, const MaxPoolLayer& pool,
                           std::vector<std::uint32_t>* argmax) {
  const int outH = window_output(input.height(), pool.kernel, pool.stride, 0);
  const int outW = window_output(input.width(), pool.kernel, pool.stride, 0);
  if (outH <= 0 || outW <= 0) {
    std::ostringstream os;
    os << "maxpool: input " << input.height() << "x" << input.width() << " smaller than kernel "
       << pool.kernel;
    throw DimensionError(os.str());
  }
  const int channels = input.channels();
  FeatureMap out(outH, outW, channels);
  if (argmax) argmax->assign(out.size(), 0);
  const auto in = input.data();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < outH; ++r) {
    for (int c = 0; c < outW; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t bestIndex = 0;
        // Row-major window scan; strict '>' keeps the first maximum.
        for (int ky = 0; ky < pool.kernel; ++ky) {
          const int y = r * pool.stride + ky;
          for (int kx = 0; kx < pool.kernel; ++kx) {
            const int x = c * pool.stride + kx;
            const std::size_t idx =
                (static_cast<std::size_t>(y) * input.width() + x) * channels + ch;
            if (in[idx] > best) {
              best = in[idx];
              bestIndex = idx;
            }
          }
        }
        out(r, c, ch) = best;
        if (argmax) {
          (*argmax)[(static_cast<std::size_t>(r) * outW + c) * channels + ch] =
              static_cast<std::uint32_t>(bestIndex);
        }
      }
    }
  }
  return out;
}

void check_conv_input(const FeatureMap& input, const ConvLayer& conv) {
  if (input.channels() != conv.inChannels) {
    std::ostringstream os;
    os << "layer " << conv.name << ": input has " << input.channels() << " channels, expected "
       << conv.inChannels;
    throw DimensionError(os.str());
  }
  if (window_output(input.height(), conv.kernelH, conv.stride, conv.padding) <= 0 ||
      window_output(input.width(), conv.kernelW, conv.stride, conv.padding) <= 0) {
    throw DimensionError("layer " + conv.name + ": input smaller than kernel");
  }
}

void check_subnet_input(const Network& net, int from, int to, const FeatureMap& input) {
  const int expected = from == 0 ? 3 : net.channels_at(from);
  if (input.channels() != expected) {
    std::ostringstream os;
    os << "subnet " << from << "->" << to << ": input has " << input.channels()
       << " channels, expected " << expected;
    throw DimensionError(os.str());
  }
}

}  // namespace

FeatureMap apply_layer(const Layer& layer, const FeatureMap& input) {
  if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
    check_conv_input(input, *conv);
    return conv2d_forward(input, *conv);
  }
  if (const auto* pool = std::get_if<MaxPoolLayer>(&layer)) return maxpool_forward(input, *pool, nullptr);
  return relu_forward(input);
}

std::vector<FeatureMap> forward(const Network& net, const Image& img) {
  const int factor = net.downsampling_at(net.levels());
  if (img.height() % factor != 0 || img.width() % factor != 0) {
    std::ostringstream os;
    os << "image " << img.height() << "x" << img.width() << " must have dimensions divisible by "
       << factor;
    throw DimensionError(os.str());
  }
  std::vector<FeatureMap> pyramid;
  pyramid.reserve(static_cast<std::size_t>(net.levels()));
  FeatureMap current = preprocess(net, img);
  for (int level = 1; level <= net.levels(); ++level) {
    current = forward_subnet(net, level - 1, level, current);
    pyramid.push_back(current);
  }
  return pyramid;
}

FeatureMap forward_subnet(const Network& net, int from, int to, const FeatureMap& input) {
  check_subnet_input(net, from, to, input);
  FeatureMap current = input;
  for (const Layer& layer : net.subnet(from, to)) current = apply_layer(layer, current);
  return current;
}

SubnetTrace::SubnetTrace(const Network& net, int from, int to, const FeatureMap& input)
    : layers_(net.subnet(from, to)) {
  check_subnet_input(net, from, to, input);
  activations_.reserve(layers_.size() + 1);
  argmax_.resize(layers_.size());
  activations_.push_back(input);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& layer = layers_[i];
    if (const auto* pool = std::get_if<MaxPoolLayer>(&layer)) {
      activations_.push_back(maxpool_forward(activations_.back(), *pool, &argmax_[i]));
    } else {
      activations_.push_back(apply_layer(layer, activations_.back()));
    }
  }
}

FeatureMap SubnetTrace::backward(const FeatureMap& upstreamGrad) const {
  if (!upstreamGrad.same_shape(output())) {
    std::ostringstream os;
    os << "backward: upstream gradient " << upstreamGrad.height() << "x" << upstreamGrad.width()
       << "x" << upstreamGrad.channels() << " does not match subnet output " << output().height()
       << "x" << output().width() << "x" << output().channels();
    throw DimensionError(os.str());
  }
  FeatureMap grad = upstreamGrad;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const Layer& layer = layers_[i];
    const FeatureMap& in = activations_[i];
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
      grad = conv2d_backward(grad, *conv, in.height(), in.width());
    } else if (std::holds_alternative<MaxPoolLayer>(layer)) {
      FeatureMap routed(in.height(), in.width(), in.channels());
      auto dst = routed.data();
      const auto src = grad.data();
      const auto& index = argmax_[i];
      for (std::size_t j = 0; j < index.size(); ++j) dst[index[j]] += src[j];
      grad = std::move(routed);
    } else {
      auto g = grad.data();
      const auto x = in.data();
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (!(x[j] > 0.0)) g[j] = 0.0;
      }
    }
  }
  return grad;
}

FeatureMap backward_subnet(const Network& net, int from, int to, const FeatureMap& input,
                           const FeatureMap& upstreamGrad) {
  return SubnetTrace(net, from, to, input).backward(upstreamGrad);
}

}  // namespace dia
