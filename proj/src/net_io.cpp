#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "dia/net.hpp"

namespace dia {

namespace {

using Kind = NetworkFormatError::Kind;

constexpr char kMagic[4] = {'D', 'I', 'A', 'W'};
constexpr std::uint32_t kVersion = 1;

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<double> values;
  bool used = false;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  void need(std::size_t n, const std::string& context) const {
    if (bytes_.size() - pos_ < n) {
      throw NetworkFormatError(Kind::Truncated, context, "weight file truncated while reading " + context);
    }
  }
  std::uint8_t u8(const std::string& context) {
    need(1, context);
    return bytes_[pos_++];
  }
  std::uint16_t u16(const std::string& context) {
    need(2, context);
    const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const std::string& context) {
    need(4, context);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
  }
  float f32(const std::string& context) { return std::bit_cast<float>(u32(context)); }
  std::string text(std::size_t n, const std::string& context) {
    need(n, context);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::map<std::string, Tensor> read_tensors(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  if (in.text(4, "magic") != std::string(kMagic, 4)) {
    throw NetworkFormatError(Kind::BadMagic, "", "weight file: bad magic (expected DIAW)");
  }
  const std::uint32_t version = in.u32("version");
  if (version != kVersion) {
    throw NetworkFormatError(Kind::VersionMismatch, "",
                             "weight file: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = in.u32("tensor count");
  std::map<std::string, Tensor> tensors;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::string where = "tensor #" + std::to_string(t);
    const std::uint16_t nameLen = in.u16(where + " name length");
    const std::string name = in.text(nameLen, where + " name");
    Tensor tensor;
    const std::uint8_t ndim = in.u8(name + " rank");
    std::size_t elements = 1;
    for (std::uint8_t d = 0; d < ndim; ++d) {
      tensor.dims.push_back(in.u32(name + " dims"));
      elements *= tensor.dims.back();
    }
    in.need(elements * 4, name + " payload");
    tensor.values.resize(elements);
    for (double& v : tensor.values) v = static_cast<double>(in.f32(name));
    if (!tensors.emplace(name, std::move(tensor)).second) {
      throw NetworkFormatError(Kind::Malformed, name, "weight file: duplicate tensor " + name);
    }
  }
  if (!in.done()) {
    throw NetworkFormatError(Kind::Malformed, "", "weight file: trailing bytes after last tensor");
  }
  return tensors;
}

std::vector<double> take_tensor(std::map<std::string, Tensor>& tensors, const std::string& layer,
                                const std::string& name, std::vector<std::uint32_t> expectedDims) {
  const auto it = tensors.find(name);
  if (it == tensors.end()) {
    throw NetworkFormatError(Kind::MissingTensor, layer,
                             "layer " + layer + ": weight file has no tensor " + name);
  }
  Tensor& tensor = it->second;
  if (tensor.dims != expectedDims) {
    std::ostringstream os;
    os << "layer " << layer << ": tensor " << name << " has shape [";
    for (std::size_t i = 0; i < tensor.dims.size(); ++i) os << (i ? "," : "") << tensor.dims[i];
    os << "] (" << tensor.values.size() << " values), manifest declares [";
    for (std::size_t i = 0; i < expectedDims.size(); ++i) os << (i ? "," : "") << expectedDims[i];
    os << "]";
    throw NetworkFormatError(Kind::ShapeMismatch, layer, os.str());
  }
  tensor.used = true;
  return tensor.values;
}

int parse_int(std::istringstream& fields, int line, const std::string& what) {
  long long v = 0;
  if (!(fields >> v) || v < 0 || v > 1'000'000) {
    throw NetworkFormatError(Kind::Malformed, "",
                             "manifest line " + std::to_string(line) + ": bad " + what);
  }
  return static_cast<int>(v);
}

}  // namespace

Network load_network(std::string_view manifestText, std::span<const std::uint8_t> weightBytes) {
  auto tensors = read_tensors(weightBytes);

  std::array<double, 3> mean{};
  std::vector<Layer> layers;
  std::vector<PyramidTag> tags;
  std::istringstream lines{std::string(manifestText)};
  std::string raw;
  int lineNo = 0;
  while (std::getline(lines, raw)) {
    ++lineNo;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream fields(raw);
    std::string directive;
    if (!(fields >> directive)) continue;
    const std::string at = "manifest line " + std::to_string(lineNo);

    if (directive == "mean") {
      if (!(fields >> mean[0] >> mean[1] >> mean[2])) {
        throw NetworkFormatError(Kind::Malformed, "", at + ": mean needs three values");
      }
    } else if (directive == "conv") {
      ConvLayer conv;
      if (!(fields >> conv.name)) throw NetworkFormatError(Kind::Malformed, "", at + ": conv needs a name");
      conv.outChannels = parse_int(fields, lineNo, "outC");
      conv.inChannels = parse_int(fields, lineNo, "inC");
      conv.kernelH = parse_int(fields, lineNo, "kH");
      conv.kernelW = parse_int(fields, lineNo, "kW");
      conv.stride = parse_int(fields, lineNo, "stride");
      conv.padding = parse_int(fields, lineNo, "pad");
      const auto u = [](int v) { return static_cast<std::uint32_t>(v); };
      conv.weight = take_tensor(tensors, conv.name, conv.name + ".weight",
                                {u(conv.outChannels), u(conv.inChannels), u(conv.kernelH), u(conv.kernelW)});
      conv.bias = take_tensor(tensors, conv.name, conv.name + ".bias", {u(conv.outChannels)});
      layers.emplace_back(std::move(conv));
    } else if (directive == "relu") {
      layers.emplace_back(ReluLayer{});
    } else if (directive == "maxpool") {
      MaxPoolLayer pool;
      pool.kernel = parse_int(fields, lineNo, "pool kernel");
      pool.stride = parse_int(fields, lineNo, "pool stride");
      layers.emplace_back(pool);
    } else if (directive == "tag") {
      std::string label;
      if (!(fields >> label)) throw NetworkFormatError(Kind::Malformed, "", at + ": tag needs a label");
      if (layers.empty() || (!tags.empty() && tags.back().end == layers.size())) {
        throw NetworkFormatError(Kind::DanglingTag, label,
                                 at + ": tag " + label + " does not follow a layer");
      }
      tags.push_back({label, layers.size()});
    } else {
      throw NetworkFormatError(Kind::UnknownLayerKind, directive,
                               at + ": unknown layer kind '" + directive + "'");
    }
  }
  for (const auto& [name, tensor] : tensors) {
    if (!tensor.used) {
      throw NetworkFormatError(Kind::UnusedTensor, name,
                               "weight file tensor " + name + " is not referenced by the manifest");
    }
  }
  return Network(mean, std::move(layers), std::move(tags));
}

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path, path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Network load_network_files(const std::string& manifestPath, const std::string& weightsPath) {
  const auto manifest = read_file(manifestPath);
  const auto weights = read_file(weightsPath);
  return load_network(std::string_view(reinterpret_cast<const char*>(manifest.data()), manifest.size()),
                      weights);
}

std::string encode_manifest(const Network& net) {
  std::ostringstream os;
  os.precision(17);
  os << "mean " << net.mean()[0] << " " << net.mean()[1] << " " << net.mean()[2] << "\n";
  std::size_t nextTag = 0;
  const auto& layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (const auto* conv = std::get_if<ConvLayer>(&layers[i])) {
      os << "conv " << conv->name << " " << conv->outChannels << " " << conv->inChannels << " "
         << conv->kernelH << " " << conv->kernelW << " " << conv->stride << " " << conv->padding
         << "\n";
    } else if (const auto* pool = std::get_if<MaxPoolLayer>(&layers[i])) {
      os << "maxpool " << pool->kernel << " " << pool->stride << "\n";
    } else {
      os << "relu\n";
    }
    while (nextTag < net.tags().size() && net.tags()[nextTag].end == i + 1) {
      os << "tag " << net.tags()[nextTag].label << "\n";
      ++nextTag;
    }
  }
  return os.str();
}

std::vector<std::uint8_t> encode_weights(const Network& net) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  const auto put32 = [&out](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  const auto putTensor = [&](const std::string& name, const std::vector<std::uint32_t>& dims,
                             const std::vector<double>& values) {
    out.push_back(static_cast<std::uint8_t>(name.size() & 0xff));
    out.push_back(static_cast<std::uint8_t>(name.size() >> 8));
    out.insert(out.end(), name.begin(), name.end());
    out.push_back(static_cast<std::uint8_t>(dims.size()));
    for (auto d : dims) put32(d);
    for (double v : values) put32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  };
  put32(kVersion);
  put32(static_cast<std::uint32_t>(2 * net.conv_count()));
  for (const Layer& layer : net.layers()) {
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
      const auto u = [](int v) { return static_cast<std::uint32_t>(v); };
      putTensor(conv->name + ".weight",
                {u(conv->outChannels), u(conv->inChannels), u(conv->kernelH), u(conv->kernelW)},
                conv->weight);
      putTensor(conv->name + ".bias", {u(conv->outChannels)}, conv->bias);
    }
  }
  return out;
}

}  // namespace dia
