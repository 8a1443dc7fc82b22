#include "dia/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <map>

#include "dia/error.hpp"
#include "dia/io.hpp"
#include "dia/pipeline.hpp"

namespace dia::cli {

namespace {

namespace fs = std::filesystem;

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw FileError("no such file: " + path, path);
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dense semantic correspondence and attribute transfer between two images"};
  std::string content;
  std::string style;
  std::string weights;
  std::string manifest;
  std::string outDir;
  double alphaOffset = 0.0;
  std::string preset = "default";
  std::string mode = "full";
  std::uint64_t seed = 0;
  int sweeps = 0;
  int deconvIters = 0;
  bool diagnostics = false;

  app.add_option("--content", content, "image A (PNG)")->required();
  app.add_option("--style", style, "image B' (PNG)")->required();
  app.add_option("--weights", weights, "DIAW weight file")->required();
  app.add_option("--manifest", manifest, "network manifest")->required();
  app.add_option("--out", outDir, "output directory")->required();
  app.add_option("--alpha-offset", alphaOffset, "global offset added to every layer weight")
      ->check(CLI::Range(-0.1, 0.2));
  app.add_option("--preset", preset, "weight profile")
      ->check(CLI::IsMember({"default", "photo", "identical"}));
  app.add_option("--mode", mode, "full or color-transfer")
      ->check(CLI::IsMember({"full", "color-transfer"}));
  app.add_option("--seed", seed, "random seed");
  app.add_option("--sweeps", sweeps, "PatchMatch sweeps per layer")->check(CLI::PositiveNumber);
  app.add_option("--deconv-iters", deconvIters, "deconvolution iteration budget")
      ->check(CLI::PositiveNumber);
  app.add_flag("--diagnostics", diagnostics, "write diagnostics.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    for (const auto* path : {&content, &style, &weights, &manifest}) require_file(*path);
    const Network net = load_network_files(manifest, weights);
    const Image a = read_png(content);
    const Image bPrime = read_png(style);

    PipelineConfig cfg = PipelineConfig::defaults(net.levels());
    const std::map<std::string, AlphaSchedule> presets{
        {"default", AlphaSchedule::standard()},
        {"photo", AlphaSchedule::photo()},
        {"identical", AlphaSchedule::identical()},
    };
    cfg.alphaSchedule = presets.at(preset);
    cfg.alphaSchedule.globalOffset += alphaOffset;
    cfg.mode = mode == "color-transfer" ? Mode::ColorTransfer : Mode::Full;
    cfg.seed = seed;
    if (sweeps > 0) cfg.sweepsPerLayer = sweeps;
    if (deconvIters > 0) cfg.deconv.maxIterations = deconvIters;

    const AnalogyResult result = run(a, bPrime, net, cfg);

    fs::create_directories(outDir);
    const fs::path dir(outDir);
    write_png((dir / "A_prime.png").string(), result.aPrime);
    write_png((dir / "B.png").string(), result.b);
    write_nnf((dir / "phi_ab.nnf").string(), result.phiAB);
    write_nnf((dir / "phi_ba.nnf").string(), result.phiBA);
    if (diagnostics) {
      std::ofstream file(dir / "diagnostics.txt");
      if (!file) throw FileError("cannot create diagnostics.txt", (dir / "diagnostics.txt").string());
      file << format_diagnostics(result);
    }
    return kOk;
  } catch (const FileError& e) {
    err << "error: " << e.what() << "\n";
    return kMissingFile;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kFormatError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kPipelineError;
  }
}

}  // namespace dia::cli
