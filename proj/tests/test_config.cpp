#include <fstream>

#include "doctest.h"
#include "prkit/config.hpp"
#include "prkit/mosaic.hpp"
#include "prkit/removal.hpp"
#include "prkit/render.hpp"
#include "support.hpp"

using namespace prkit;

TEST_CASE("parse sections, comments and strings") {
  const auto file = ConfigFile::parse(R"(
# top-level
seed = 42
background_dir = "assets/bg # not a comment"  # trailing
allow_flip = false

[removal]
mode = "legacy_inpaint"
refine_iters = 3
diffusion_tol = 1e-6
)");
  CHECK(file.get_int("seed") == 42);
  CHECK(file.get_string("background_dir") == "assets/bg # not a comment");
  CHECK(file.get_bool("allow_flip") == false);
  CHECK(file.get_string("removal.mode") == "legacy_inpaint");
  CHECK(file.get_double("removal.diffusion_tol") == 1e-6);
  CHECK_FALSE(file.get_int("count").has_value());
  CHECK_NOTHROW(file.reject_unknown(known_config_keys()));
}

TEST_CASE("malformed input") {
  CHECK_THROWS_AS(ConfigFile::parse("seed 4"), ArgumentError);
  CHECK_THROWS_AS(ConfigFile::parse("[removal\nmode = x"), ArgumentError);
  CHECK_THROWS_AS(ConfigFile::parse("seed = 1\nseed = 2"), ArgumentError);
  CHECK_THROWS_AS(ConfigFile::parse("x = \"open"), ArgumentError);
  CHECK_THROWS_AS(ConfigFile::parse("seed = abc").get_int("seed"), ArgumentError);
  CHECK_THROWS_AS(ConfigFile::parse("allow_flip = yes").get_bool("allow_flip"), ArgumentError);
  CHECK_THROWS_WITH_AS(ConfigFile::parse("colour = 1").reject_unknown(known_config_keys()),
                       doctest::Contains("colour"), ArgumentError);
}

TEST_CASE("apply_config fills the module configs") {
  testing::TempDir dir("config");
  const auto path = dir.path() / "run.toml";
  std::ofstream(path) << R"(seed = 9
count = 12
feather_radius = 3
workers = 2
background_dir = "bg"
out_dir = "/abs/out"
[scale_rule]
base_scale = 0.5
horizon_offset = 96
[render]
angles = 15
lighting = "fit_grid"
[removal]
mode = "legacy"
restorer = "exemplar"
patch_size = 7
mask_dilation = 0
)";
  const auto file = ConfigFile::load(path);
  MosaicConfig mosaic;
  apply_config(file, mosaic);
  CHECK(mosaic.seed == 9);
  CHECK(mosaic.count == 12);
  CHECK(mosaic.feather_radius == 3);
  CHECK(mosaic.workers == 2);
  CHECK(mosaic.background_dir == dir.path() / "bg");
  CHECK(mosaic.out_dir == "/abs/out");
  CHECK(mosaic.scale_rule.base_scale == 0.5);
  CHECK(mosaic.scale_rule.horizon_offset == 96);

  RenderBatchConfig render;
  apply_config(file, render);
  CHECK(render.angles == 15);
  CHECK(render.lighting == LightingSource::fit_grid);

  RemovalConfig removal;
  apply_config(file, removal);
  CHECK(removal.mode == RemovalMode::legacy_inpaint);
  CHECK(removal.restorer == "exemplar");
  CHECK(removal.exemplar.patch_size == 7);
  CHECK(removal.mask_dilation == 0);
  CHECK(removal.refine_iters == 2);

  CHECK_THROWS_AS(ConfigFile::load(dir.path() / "missing.toml"), IoError);
}
