#include <cstring>
#include <fstream>

#include "doctest.h"
#include "eeval/dataset.hpp"
#include "eeval/synth.hpp"
#include "support/helpers.hpp"

using namespace eeval;
using testsupport::TempDir;

namespace {

MultiExitDataset small_dataset(std::size_t n = 10, int num_exits = 3,
                               int num_classes = 4) {
  SynthConfig cfg;
  cfg.seed = 11;
  cfg.num_calib = n;
  cfg.num_val = n;
  cfg.num_test = n;
  cfg.num_exits = num_exits;
  cfg.num_classes = num_classes;
  cfg.head_skill = {0.5, 0.6, 0.7};
  return generate(cfg);
}

void corrupt_labels(const std::filesystem::path& file, std::uint32_t value) {
  std::fstream f(file, std::ios::binary | std::ios::in | std::ios::out);
  f.seekp(0);
  f.write(reinterpret_cast<const char*>(&value), 4);
}

}  // namespace

TEST_CASE("save/load round-trips bit-exactly") {
  TempDir dir("roundtrip");
  const MultiExitDataset original = small_dataset();
  save_dataset(original, dir.path());
  const MultiExitDataset loaded = load_dataset(dir.path());

  CHECK(loaded.manifest.num_classes == 4);
  CHECK(loaded.manifest.num_exits == 3);
  CHECK(loaded.manifest.exit_costs == original.manifest.exit_costs);
  for (const auto& [name, split] : original.splits) {
    REQUIRE(loaded.has_split(name));
    const Split& got = loaded.split(name);
    CHECK(got.labels == split.labels);
    REQUIRE(got.logits.values.size() == split.logits.values.size());
    CHECK(std::memcmp(got.logits.values.data(), split.logits.values.data(),
                      got.logits.values.size() * 4) == 0);
  }
}

TEST_CASE("load rejects malformed inputs with distinct errors") {
  TempDir dir("malformed");
  save_dataset(small_dataset(), dir.path());

  SUBCASE("missing manifest") {
    std::filesystem::remove(dir.path() / "manifest.json");
    CHECK_THROWS_AS(load_dataset(dir.path()), MissingFileError);
  }
  SUBCASE("missing binary file") {
    std::filesystem::remove(dir.path() / "val_logits.bin");
    CHECK_THROWS_AS(load_dataset(dir.path()), MissingFileError);
  }
  SUBCASE("truncated logits") {
    std::filesystem::resize_file(dir.path() / "test_logits.bin", 8);
    CHECK_THROWS_AS(load_dataset(dir.path()), ShapeMismatchError);
  }
  SUBCASE("label equal to C is out of range") {
    corrupt_labels(dir.path() / "test_labels.bin", 4);
    CHECK_THROWS_AS(load_dataset(dir.path()), LabelOutOfRangeError);
  }
  SUBCASE("non-finite logit") {
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::fstream f(dir.path() / "calib_logits.bin",
                   std::ios::binary | std::ios::in | std::ios::out);
    f.write(reinterpret_cast<const char*>(&nan), 4);
    f.close();
    CHECK_THROWS_AS(load_dataset(dir.path()), NonFiniteLogitError);
  }
  SUBCASE("non-increasing exit costs") {
    auto ds = small_dataset();
    ds.manifest.exit_costs = {3.0, 2.0, 5.0};
    save_dataset(ds, dir.path());
    CHECK_THROWS_AS(load_dataset(dir.path()), NonIncreasingCostsError);
  }
  SUBCASE("error message names the offending file") {
    std::filesystem::remove(dir.path() / "val_logits.bin");
    try {
      load_dataset(dir.path());
      FAIL("expected MissingFileError");
    } catch (const MissingFileError& e) {
      CHECK(std::string(e.what()).find("val_logits.bin") !=
            std::string::npos);
    }
  }
}

TEST_CASE("save to an unwritable path raises IoError") {
  CHECK_THROWS_AS(save_dataset(small_dataset(), "/proc/eeval_forbidden"),
                  IoError);
}

TEST_CASE("correctness follows argmax with low-index tie break") {
  // Head 1 rows come from the toy tables; ties pick the lowest class.
  const std::vector<std::vector<std::vector<float>>> logits = {
      {{0.65f, 0.34f, -1.03f, 0.0f}},
      {{0.0f, 0.0f, 0.0f, 0.0f}},
      {{-0.7985f, -0.9163f, -2.3026f, -2.9957f}},
  };
  SUBCASE("labels match argmax") {
    const auto ds = testsupport::make_dataset(logits, {0, 0, 0}, {1.0});
    const auto y = correctness(ds.split("test").logits,
                               ds.split("test").labels);
    CHECK(y.at(0, 0));
    CHECK(y.at(1, 0));  // all-zero row ties toward class 0
    CHECK(y.at(2, 0));
  }
  SUBCASE("tie does not go to a later class") {
    const auto ds = testsupport::make_dataset(logits, {0, 2, 1}, {1.0});
    const auto y = correctness(ds.split("test").logits,
                               ds.split("test").labels);
    CHECK(y.at(0, 0));
    CHECK_FALSE(y.at(1, 0));
    CHECK_FALSE(y.at(2, 0));
  }
}

TEST_CASE("correctness is invariant under positive per-exit scaling") {
  SplitMix64 rng(99);
  const auto ds = small_dataset(64);
  const Split& split = ds.split("test");
  const CorrectnessMatrix base = correctness(split.logits, split.labels);

  LogitTensor scaled = split.logits;
  for (int j = 0; j < scaled.num_exits; ++j) {
    const double factor = 0.01 + 20.0 * rng.unit();
    for (std::size_t i = 0; i < scaled.num_samples; ++i) {
      float* row = scaled.values.data() +
                   (i * scaled.num_exits + j) * scaled.num_classes;
      for (int k = 0; k < scaled.num_classes; ++k) {
        row[k] = static_cast<float>(row[k] * factor);
      }
    }
  }
  const CorrectnessMatrix after = correctness(scaled, split.labels);
  CHECK(after.y == base.y);
}

TEST_CASE("manifest validation") {
  TempDir dir("manifest");
  save_dataset(small_dataset(), dir.path());

  auto rewrite = [&](const std::string& from, const std::string& to) {
    std::ifstream in(dir.path() / "manifest.json");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    in.close();
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, from.size(), to);
    std::ofstream out(dir.path() / "manifest.json", std::ios::trunc);
    out << text;
  };

  SUBCASE("num_classes below 2") {
    rewrite("\"num_classes\": 4", "\"num_classes\": 1");
    CHECK_THROWS_AS(load_dataset(dir.path()), ManifestError);
  }
  SUBCASE("num_exits below 2") {
    rewrite("\"num_exits\": 3", "\"num_exits\": 1");
    CHECK_THROWS_AS(load_dataset(dir.path()), ManifestError);
  }
  SUBCASE("unknown split name") {
    rewrite("\"calib\"", "\"train\"");
    CHECK_THROWS_AS(load_dataset(dir.path()), ManifestError);
  }
  SUBCASE("invalid JSON") {
    std::ofstream out(dir.path() / "manifest.json", std::ios::trunc);
    out << "{not json";
    out.close();
    CHECK_THROWS_AS(load_dataset(dir.path()), ManifestError);
  }
}
