#include <fstream>
#include <sstream>

#include "doctest.h"
#include "prkit/harness.hpp"
#include "prkit/png_io.hpp"
#include "scenes.hpp"
#include "support.hpp"

using namespace prkit;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Manifest synthetic_dataset(const std::filesystem::path& dir, int count) {
  std::vector<BackgroundAsset> bgs;
  for (int i = 0; i < 3; ++i) {
    bgs.push_back({"bg" + std::to_string(i), demo::smooth_background(40, 32, i), default_region(40, 32)});
  }
  std::vector<SpriteAsset> sps{demo::person_asset(6, 12, 1, "a"), demo::person_asset(6, 12, 2, "b")};
  MosaicConfig config;
  config.seed = 3;
  config.scale_rule = {1.0, 32.0, 0.6, 1.2};
  return write_dataset(dir, synth_mosaic_batch(bgs, sps, count, config));
}

Manifest numbered(int n) {
  Manifest m;
  for (int i = 0; i < n; ++i) {
    ManifestEntry e;
    e.id = std::to_string(1000 + i);
    m.entries.push_back(e);
  }
  return m;
}

}  // namespace

TEST_CASE("manifest round-trip") {
  testing::TempDir dir("manifest");
  Manifest m = numbered(3);
  m.entries[0].split = Split::train;
  m.entries[1].depth = "depth/1.png";
  m.entries[2].provenance = {{"seed", 4}};
  write_manifest(dir.path() / "m.jsonl", m);
  const Manifest back = read_manifest(dir.path() / "m.jsonl");
  REQUIRE(back.entries.size() == 3);
  CHECK(back.base_dir == dir.path());
  CHECK(back.entries[0].split == Split::train);
  CHECK(back.entries[1].depth == std::filesystem::path("depth/1.png"));
  CHECK(back.entries[2].provenance["seed"] == 4);
  CHECK(back.resolve("a.png") == dir.path() / "a.png");
  CHECK(back.resolve("/x/a.png") == "/x/a.png");

  std::ofstream(dir.path() / "bad.jsonl") << "{\"id\": \"1\"}\n";
  CHECK_THROWS_WITH_AS(read_manifest(dir.path() / "bad.jsonl"), doctest::Contains(":1:"), IoError);
  std::ofstream(dir.path() / "tag.jsonl")
      << R"({"id":"1","source":"s","target":"t","mask":"m","split":"validation"})" << "\n";
  CHECK_THROWS_AS(read_manifest(dir.path() / "tag.jsonl"), IoError);
}

TEST_CASE("validate_manifest") {
  testing::TempDir dir("validate");
  Manifest m = synthetic_dataset(dir.path(), 3);
  CHECK(validate_manifest(m).empty());
  m.entries[1].id = m.entries[0].id;
  std::filesystem::remove(dir.path() / m.entries[2].mask);
  const auto problems = validate_manifest(m);
  REQUIRE(problems.size() == 2);
  CHECK(problems[0].find("duplicate") != std::string::npos);
  CHECK(problems[1].find("mask") != std::string::npos);
}

TEST_CASE("write_dataset layout and provenance") {
  testing::TempDir dir("dataset");
  const Manifest m = synthetic_dataset(dir.path(), 4);
  CHECK(std::filesystem::exists(dir.path() / "manifest.jsonl"));
  CHECK(std::filesystem::exists(dir.path() / "source" / "00003.png"));
  CHECK(std::filesystem::exists(dir.path() / "target" / "00000.png"));
  CHECK(std::filesystem::exists(dir.path() / "mask" / "00002.png"));
  const auto& p = m.entries[1].provenance;
  CHECK(p["seed"] == 4);
  CHECK(p.contains("background"));
  CHECK(p.contains("sprite"));
  CHECK(p["placement"].contains("anchor_x"));
  CHECK_FALSE(p.contains("lighting"));
}

TEST_CASE("split") {
  SUBCASE("counts") {
    const Manifest s = split(numbered(500), 0.7, 1);
    CHECK(s.count(Split::train) == 350);
    CHECK(s.count(Split::test) == 150);
    const Manifest two = split(numbered(2), 0.5, 9);
    CHECK(two.count(Split::train) == 1);
    CHECK(two.count(Split::test) == 1);
  }
  SUBCASE("deterministic and independent of line order") {
    Manifest m = numbered(40);
    const Manifest a = split(m, 0.7, 5);
    std::reverse(m.entries.begin(), m.entries.end());
    const Manifest b = split(m, 0.7, 5);
    for (const auto& e : a.entries) {
      const auto it = std::find_if(b.entries.begin(), b.entries.end(),
                                   [&](const ManifestEntry& x) { return x.id == e.id; });
      CHECK(it->split == e.split);
    }
    const Manifest c = split(numbered(40), 0.7, 6);
    bool differs = false;
    for (std::size_t i = 0; i < 40; ++i) differs |= c.entries[i].split != a.entries[i].split;
    CHECK(differs);
  }
  SUBCASE("incremental split keeps existing tags") {
    const Manifest first = split(numbered(20), 0.7, 2);
    Manifest grown = first;
    for (int i = 20; i < 30; ++i) {
      ManifestEntry e;
      e.id = std::to_string(1000 + i);
      grown.entries.push_back(e);
    }
    const Manifest second = split(grown, 0.7, 3, true);
    for (std::size_t i = 0; i < 20; ++i) CHECK(second.entries[i].split == first.entries[i].split);
    CHECK(second.count(Split::unassigned) == 0);
    CHECK(second.count(Split::train) == 21);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(split(numbered(1), 0.7, 1), ArgumentError);
    CHECK_THROWS_AS(split(numbered(5), 0.0, 1), ArgumentError);
    CHECK_THROWS_AS(split(numbered(5), 1.0, 1), ArgumentError);
  }
}

TEST_CASE("config hash is stable and sensitive") {
  RemovalConfig a;
  RemovalConfig b;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.refine_iters = 3;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("run_eval") {
  testing::TempDir dir("eval");
  const auto data = dir.path() / "data";

  SUBCASE("identity pipeline on an unchanged image") {
    const Image bg = demo::smooth_background(20, 20, 1);
    CompositeTriplet t{bg, bg, Mask(20, 20), {}};
    Manifest m = write_dataset(data, {t, t});
    m.entries[0].split = Split::test;
    m.entries[1].split = Split::train;
    const MetricsReport r = run_eval(m, {}, {dir.path() / "out"});
    REQUIRE(r.per_image.size() == 1);
    CHECK(r.per_image[0].psnr == kPsnrCap);
    CHECK(r.per_image[0].ssim == 1.0);
    CHECK(std::filesystem::exists(dir.path() / "out" / "pred" / "00000.png"));
  }
  SUBCASE("refine_iters changes metrics but not ids, and runs are byte-identical") {
    const Manifest m = split(synthetic_dataset(data, 10), 0.5, 1);
    RemovalConfig one;
    one.refine_iters = 1;
    one.diffusion.iters = 40;
    RemovalConfig two = one;
    two.refine_iters = 2;
    const MetricsReport r1 = run_eval(m, one, {dir.path() / "o1"});
    EvalOptions parallel{dir.path() / "o2"};
    parallel.workers = 3;
    const MetricsReport r2 = run_eval(m, two, parallel);
    REQUIRE(r1.per_image.size() == 5);
    REQUIRE(r2.per_image.size() == 5);
    bool differs = false;
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(r1.per_image[i].id == r2.per_image[i].id);
      differs |= r1.per_image[i].rmsew != r2.per_image[i].rmsew;
    }
    CHECK(differs);
    CHECK(r1.config_hash != r2.config_hash);
    CHECK(std::is_sorted(r1.per_image.begin(), r1.per_image.end(),
                         [](const auto& a, const auto& b) { return a.id < b.id; }));

    write_report(dir.path() / "rep_a", r1);
    const MetricsReport again = run_eval(m, one, {dir.path() / "o3"});
    write_report(dir.path() / "rep_b", again);
    CHECK(slurp(dir.path() / "rep_a" / "report.csv") == slurp(dir.path() / "rep_b" / "report.csv"));
    CHECK(std::filesystem::exists(dir.path() / "rep_a" / "report.md"));
  }
  SUBCASE("missing files become failures naming the entry") {
    Manifest m = split(synthetic_dataset(data, 6), 0.5, 2);
    const auto victim = std::find_if(m.entries.begin(), m.entries.end(),
                                     [](const auto& e) { return e.split == Split::test; });
    std::filesystem::remove(m.resolve(victim->source));
    const MetricsReport r = run_eval(m, {}, {dir.path() / "out"});
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures[0].id == victim->id);
    CHECK(r.per_image.size() == 2);
  }
  SUBCASE("lpips side values land in the report") {
    const Manifest m = split(synthetic_dataset(data, 4), 0.5, 2);
    EvalOptions options{dir.path() / "out"};
    for (const auto& e : m.entries) options.lpips[e.id] = 0.5;
    const MetricsReport r = run_eval(m, {}, options);
    for (const auto& row : r.per_image) CHECK(row.lpips == 0.5);
  }
  SUBCASE("empty test split is rejected") {
    CHECK_THROWS_AS(run_eval(numbered(3), {}, {dir.path() / "out"}), ArgumentError);
  }
}
