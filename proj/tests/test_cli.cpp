#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "dia/cli.hpp"
#include "dia/io.hpp"
#include "dia/net.hpp"
#include "support/toy_network.hpp"

using namespace dia;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  fs::path dir;
  std::string manifest, weights, content, style;

  explicit Fixture(const std::string& name, const Network& net, const Image& a, const Image& bp) {
    dir = fs::temp_directory_path() / "dia_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    manifest = (dir / "net.txt").string();
    weights = (dir / "net.diaw").string();
    content = (dir / "a.png").string();
    style = (dir / "bp.png").string();
    std::ofstream(manifest) << encode_manifest(net);
    const auto bytes = encode_weights(net);
    std::ofstream(weights, std::ios::binary)
        .write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    write_png(content, a);
    write_png(style, bp);
  }

  int run(std::vector<std::string> extra, std::string* errText = nullptr) const {
    std::vector<std::string> args{"dia_analogy", "--content", content, "--style", style,
                                  "--weights", weights, "--manifest", manifest,
                                  "--out", (dir / "out").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    std::vector<const char*> argv;
    for (const auto& s : args) argv.push_back(s.c_str());
    std::ostringstream out, err;
    const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    if (errText) *errText = err.str();
    return code;
  }
};

}  // namespace

TEST_CASE("a valid run writes the four outputs and optional diagnostics") {
  const Fixture fx("valid", dia::testing::toy3(), dia::testing::textured_image(32, 32, 1),
                   dia::testing::textured_image(32, 32, 2));
  REQUIRE(fx.run({"--deconv-iters", "10", "--sweeps", "3", "--diagnostics"}) == cli::kOk);
  const fs::path out = fx.dir / "out";
  const Image aPrime = read_png((out / "A_prime.png").string());
  CHECK(aPrime.height() == 32);
  CHECK(read_png((out / "B.png").string()).width() == 32);
  CHECK(read_nnf((out / "phi_ab.nnf").string()).height() == 32);
  CHECK(read_nnf((out / "phi_ba.nnf").string()).target_width() == 32);
  CHECK(fs::file_size(out / "diagnostics.txt") > 0);
}

TEST_CASE("identical inputs with the identical preset reproduce the content image") {
  const Image a = dia::testing::textured_image(32, 32, 3);
  const Fixture fx("identical", dia::testing::invertible_toy3(), a, a);
  REQUIRE(fx.run({"--preset", "identical"}) == cli::kOk);
  const Image aPrime = read_png((fx.dir / "out" / "A_prime.png").string());
  int worst = 0;
  for (std::size_t i = 0; i < a.rgb().size(); ++i) {
    worst = std::max(worst, std::abs(int{a.rgb()[i]} - int{aPrime.rgb()[i]}));
  }
  CHECK(worst <= 2);
}

TEST_CASE("exit codes") {
  const Fixture fx("codes", dia::testing::toy3(), dia::testing::textured_image(16, 16, 1),
                   dia::testing::textured_image(16, 16, 2));
  std::string err;

  SUBCASE("missing weight file") {
    Fixture broken = fx;
    broken.weights = (fx.dir / "absent.diaw").string();
    CHECK(broken.run({}, &err) == cli::kMissingFile);
    CHECK(err.find("absent.diaw") != std::string::npos);
  }
  SUBCASE("corrupt weight file") {
    std::ofstream(fx.weights, std::ios::binary) << "garbage";
    CHECK(fx.run({}, &err) == cli::kFormatError);
  }
  SUBCASE("corrupt image") {
    std::ofstream(fx.style, std::ios::binary) << "not a png";
    CHECK(fx.run({}) == cli::kFormatError);
  }
  SUBCASE("out-of-range alpha offset") {
    CHECK(fx.run({"--alpha-offset", "0.5"}) == cli::kUsage);
  }
  SUBCASE("unknown preset") {
    CHECK(fx.run({"--preset", "loud"}) == cli::kUsage);
  }
  SUBCASE("image size not divisible by the downsampling") {
    write_png(fx.content, dia::testing::textured_image(18, 16, 1));
    CHECK(fx.run({}, &err) == cli::kPipelineError);
    CHECK(err.find("divisible") != std::string::npos);
  }
}
