// Writes a procedural asset set (backgrounds, person sprites and a matching
// config file) so the pipeline can be exercised without photographs.

#include <fmt/format.h>

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "prkit/png_io.hpp"
#include "scenes.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate demo backgrounds and person sprites"};
  std::string out = "demo";
  int backgrounds = 50;
  int sprites = 10;
  int width = 128;
  int height = 96;
  std::uint64_t seed = 1;
  app.add_option("out", out, "Output directory")->required();
  app.add_option("--backgrounds", backgrounds, "Number of backgrounds")->check(CLI::PositiveNumber);
  app.add_option("--sprites", sprites, "Number of person sprites")->check(CLI::PositiveNumber);
  app.add_option("--width", width, "Background width")->check(CLI::Range(16, 4096));
  app.add_option("--height", height, "Background height")->check(CLI::Range(16, 4096));
  app.add_option("--seed", seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);

  try {
    const std::filesystem::path root(out);
    for (int i = 0; i < backgrounds; ++i) {
      const auto image = prkit::demo::smooth_background(width, height, seed * 1000 + i);
      prkit::write_image(root / "backgrounds" / fmt::format("bg_{:02d}.png", i), image);
    }
    const int sprite_h = std::max(8, height / 4);
    const int sprite_w = std::max(4, sprite_h / 2);
    for (int i = 0; i < sprites; ++i) {
      const auto id = fmt::format("person_{:02d}", i);
      const auto asset = prkit::demo::person_asset(sprite_w, sprite_h, seed * 7919 + i, id);
      prkit::write_image(root / "sprites" / (id + ".png"), asset.donor);
      prkit::write_mask(root / "sprites" / (id + ".mask.png"), asset.donor_mask);
    }
    std::ofstream config(root / "demo.toml");
    config << "# Generated by prkit_demo_assets\n"
           << "seed = " << seed << "\n"
           << "count = 500\n"
           << "feather_radius = 2\n"
           << "background_dir = \"backgrounds\"\n"
           << "sprite_dir = \"sprites\"\n"
           << "out_dir = \"dataset\"\n\n"
           << "[scale_rule]\n"
           << "base_scale = 1.0\n"
           << "horizon_offset = " << height << "\n"
           << "min_scale = 0.5\n"
           << "max_scale = 1.5\n\n"
           << "[removal]\n"
           << "mode = \"mask_guided\"\n"
           << "restorer = \"diffusion\"\n"
           << "refine_iters = 2\n"
           << "mask_dilation = 1\n\n"
           << "[eval]\n"
           << "train_fraction = 0.7\n"
           << "split_seed = " << seed << "\n";
    if (!config) throw prkit::IoError("cannot write " + (root / "demo.toml").string());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
