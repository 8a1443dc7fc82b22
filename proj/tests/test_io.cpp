#include <doctest.h>
#include <png.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dia/error.hpp"
#include "dia/io.hpp"
#include "dia/match.hpp"
#include "support/toy_network.hpp"

using namespace dia;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dia_test_io";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Gray+alpha 8-bit PNG written straight through libpng.
void write_gray_alpha(const fs::path& p, int h, int w) {
  FILE* f = std::fopen(p.c_str(), "wb");
  REQUIRE(f);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, f);
  png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_GRAY_ALPHA, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(static_cast<std::size_t>(w) * 2);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      row[static_cast<std::size_t>(c) * 2] = static_cast<png_byte>(10 * r + c);
      row[static_cast<std::size_t>(c) * 2 + 1] = 255;
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

}  // namespace

TEST_CASE("PNG round trip is lossless") {
  const Image img = dia::testing::textured_image(13, 17, 4);
  const fs::path p = scratch("round.png");
  write_png(p.string(), img);
  CHECK(read_png(p.string()) == img);
}

TEST_CASE("gray+alpha PNG is expanded to RGB") {
  const fs::path p = scratch("gray.png");
  write_gray_alpha(p, 3, 4);
  const Image img = read_png(p.string());
  REQUIRE(img.height() == 3);
  REQUIRE(img.width() == 4);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      for (int ch = 0; ch < 3; ++ch) CHECK(img(r, c, ch) == 10 * r + c);
    }
  }
}

TEST_CASE("PNG read errors are classified") {
  CHECK_THROWS_AS(read_png(scratch("absent.png").string()), FileError);
  const fs::path junk = scratch("junk.png");
  write_bytes(junk, {'n', 'o', 't', ' ', 'p', 'n', 'g', '!', 0, 0});
  CHECK_THROWS_AS(read_png(junk.string()), FormatError);

  const fs::path good = scratch("trunc_src.png");
  write_png(good.string(), dia::testing::textured_image(32, 32, 1));
  std::ifstream in(good, std::ios::binary);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), {});
  bytes.resize(bytes.size() / 2);
  const fs::path trunc = scratch("trunc.png");
  write_bytes(trunc, bytes);
  CHECK_THROWS_AS(read_png(trunc.string()), FormatError);
}

TEST_CASE("NNF dump layout") {
  NNField nnf(1, 2, 3, 4);
  nnf.set(0, 1, {2, 3});
  const auto bytes = encode_nnf(nnf);
  const std::vector<std::uint8_t> expected{'D', 'N', 'N', 'F', 1, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0,
                                           3,   0,   0,   0,   4, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
                                           2,   0,   0,   0,   3, 0, 0, 0};
  CHECK(bytes == expected);
  CHECK(decode_nnf(bytes) == nnf);
}

TEST_CASE("NNF round trip through a file") {
  const NNField nnf = random_nnf(9, 7, 5, 11, 3);
  const fs::path p = scratch("field.nnf");
  write_nnf(p.string(), nnf);
  CHECK(read_nnf(p.string()) == nnf);
  CHECK_THROWS_AS(read_nnf(scratch("absent.nnf").string()), FileError);
}

TEST_CASE("corrupt NNF dumps are rejected") {
  NNField nnf(2, 2, 2, 2);
  const auto good = encode_nnf(nnf);

  auto bad = good;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_nnf(bad), FormatError);

  bad = good;
  bad[4] = 2;
  CHECK_THROWS_AS(decode_nnf(bad), FormatError);

  bad = good;
  bad.pop_back();
  CHECK_THROWS_AS(decode_nnf(bad), FormatError);

  bad = good;
  bad.push_back(0);
  CHECK_THROWS_AS(decode_nnf(bad), FormatError);

  bad = good;
  bad[24] = 2;  // first row index equals target height
  CHECK_THROWS_AS(decode_nnf(bad), FormatError);

  CHECK_THROWS_AS(decode_nnf(std::vector<std::uint8_t>{'D', 'N'}), FormatError);
}
