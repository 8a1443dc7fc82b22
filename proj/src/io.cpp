#include "dia/io.hpp"

#include <png.h>

#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>

#include "dia/error.hpp"

namespace dia {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

constexpr char kNnfMagic[4] = {'D', 'N', 'N', 'F'};
constexpr std::uint32_t kNnfVersion = 1;

}  // namespace

Image read_png(const std::string& path) {
  File file(std::fopen(path.c_str(), "rb"));
  if (!file) throw FileError("cannot open " + path, path);
  png_byte header[8];
  if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) {
    throw FormatError(path + ": not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError(path + ": cannot initialize PNG decoder");
  }
  std::vector<std::uint8_t> rgb;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path + ": corrupt PNG data");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int colorType = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (colorType == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (colorType == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (colorType == PNG_COLOR_TYPE_GRAY || colorType == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  if (colorType & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(width) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path + ": unsupported PNG layout");
  }
  rgb.resize(static_cast<std::size_t>(width) * height * 3);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = rgb.data() + static_cast<std::size_t>(r) * width * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return Image(static_cast<int>(height), static_cast<int>(width), std::move(rgb));
}

void write_png(const std::string& path, const Image& img) {
  File file(std::fopen(path.c_str(), "wb"));
  if (!file) throw FileError("cannot create " + path, path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(path + ": cannot initialize PNG encoder");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(path + ": PNG encoding failed");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()),
               8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const auto data = img.rgb();
  for (int r = 0; r < img.height(); ++r) {
    png_write_row(png, const_cast<png_bytep>(data.data() + static_cast<std::size_t>(r) * img.width() * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::vector<std::uint8_t> encode_nnf(const NNField& nnf) {
  std::vector<std::uint8_t> out(kNnfMagic, kNnfMagic + 4);
  const auto put = [&out](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put(kNnfVersion);
  put(static_cast<std::uint32_t>(nnf.height()));
  put(static_cast<std::uint32_t>(nnf.width()));
  put(static_cast<std::uint32_t>(nnf.target_height()));
  put(static_cast<std::uint32_t>(nnf.target_width()));
  for (const Coord& q : nnf.targets()) {
    put(static_cast<std::uint32_t>(q.row));
    put(static_cast<std::uint32_t>(q.col));
  }
  return out;
}

NNField decode_nnf(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  const auto get = [&]() {
    if (bytes.size() - pos < 4) throw FormatError("NNF dump truncated");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[pos + static_cast<std::size_t>(i)];
    pos += 4;
    return v;
  };
  if (bytes.size() < 4 || !std::equal(kNnfMagic, kNnfMagic + 4, bytes.begin())) {
    throw FormatError("NNF dump: bad magic (expected DNNF)");
  }
  pos = 4;
  if (const auto version = get(); version != kNnfVersion) {
    throw FormatError("NNF dump: unsupported version " + std::to_string(version));
  }
  const auto h = get();
  const auto w = get();
  const auto th = get();
  const auto tw = get();
  constexpr std::uint32_t kMaxSide = 1u << 16;
  if (h == 0 || w == 0 || th == 0 || tw == 0 || h > kMaxSide || w > kMaxSide || th > kMaxSide ||
      tw > kMaxSide) {
    throw FormatError("NNF dump: invalid dimensions");
  }
  if (bytes.size() != 24 + static_cast<std::size_t>(h) * w * 8) {
    throw FormatError("NNF dump: payload length does not match dimensions");
  }
  NNField nnf(static_cast<int>(h), static_cast<int>(w), static_cast<int>(th), static_cast<int>(tw));
  for (std::uint32_t r = 0; r < h; ++r) {
    for (std::uint32_t c = 0; c < w; ++c) {
      const auto qr = get();
      const auto qc = get();
      if (qr >= th || qc >= tw) throw FormatError("NNF dump: target outside bounds");
      nnf.set(static_cast<int>(r), static_cast<int>(c), {static_cast<int>(qr), static_cast<int>(qc)});
    }
  }
  return nnf;
}

void write_nnf(const std::string& path, const NNField& nnf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot create " + path, path);
  const auto bytes = encode_nnf(nnf);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FileError("write failed for " + path, path);
}

NNField read_nnf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path, path);
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return decode_nnf(bytes);
}

}  // namespace dia
