#include <cmath>

#include "doctest.h"
#include "eeval/simulate.hpp"
#include "eeval/synth.hpp"

using namespace eeval;

namespace {

ConfidenceTable column_table(const std::vector<std::vector<double>>& rows) {
  ConfidenceTable t;
  t.num_samples = rows.size();
  t.num_exits = static_cast<int>(rows[0].size());
  for (const auto& row : rows) {
    for (double v : row) t.conf.push_back(v);
  }
  return t;
}

CorrectnessMatrix matrix_from_rows(
    const std::vector<std::vector<std::uint8_t>>& rows) {
  CorrectnessMatrix m;
  m.num_samples = rows.size();
  m.num_exits = static_cast<int>(rows[0].size());
  for (const auto& row : rows) {
    for (std::uint8_t v : row) m.y.push_back(v);
  }
  return m;
}

MultiExitDataset default_synth(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.num_calib = 200;
  cfg.num_val = 1500;
  cfg.num_test = 3000;
  return generate(cfg);
}

}  // namespace

TEST_CASE("hand-traced simulation") {
  const auto conf = column_table({{0.8, 0.9}, {0.4, 0.9}});
  const auto correct = matrix_from_rows({{1, 0}, {0, 1}});
  ThresholdVector taus;
  taus.taus = {0.7};
  const std::vector<double> costs = {1.0, 3.0};
  const SimulationResult r = simulate(conf, correct, taus, costs);
  CHECK(r.per_sample_exit == std::vector<int>{0, 1});
  CHECK(r.accuracy == doctest::Approx(1.0));
  CHECK(r.mean_cost == doctest::Approx(2.0));
  CHECK(r.exit_histogram == std::vector<std::size_t>{1, 1});
}

TEST_CASE("threshold limits reproduce standalone head accuracies") {
  const auto ds = default_synth(8);
  const Split& test = ds.split("test");
  TransformChain chain;
  const ConfidenceTable conf = confidence_table(test.logits, chain);
  const CorrectnessMatrix correct = correctness(test.logits, test.labels);
  const int num_exits = ds.manifest.num_exits;

  auto head_accuracy = [&](int j) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < correct.num_samples; ++i) {
      hits += correct.at(i, j) ? 1 : 0;
    }
    return static_cast<double>(hits) /
           static_cast<double>(correct.num_samples);
  };

  SUBCASE("all-exit-first") {
    ThresholdVector taus;
    taus.taus.assign(num_exits - 1, 0.0);
    const SimulationResult r =
        simulate(conf, correct, taus, ds.manifest.exit_costs);
    CHECK(r.accuracy == head_accuracy(0));
    CHECK(r.mean_cost == doctest::Approx(ds.manifest.exit_costs.front()));
    CHECK(r.exit_histogram[0] == correct.num_samples);
  }
  SUBCASE("never-exit-early") {
    ThresholdVector taus;
    taus.taus.assign(num_exits - 1, ThresholdVector::kExitNothing);
    const SimulationResult r =
        simulate(conf, correct, taus, ds.manifest.exit_costs);
    CHECK(r.accuracy == head_accuracy(num_exits - 1));
    CHECK(r.mean_cost == doctest::Approx(ds.manifest.exit_costs.back()));
    CHECK(r.exit_histogram[num_exits - 1] == correct.num_samples);
  }
}

TEST_CASE("first-exit property against a brute-force scan") {
  const auto ds = default_synth(99);
  const Split& test = ds.split("test");
  TransformChain chain;
  const ConfidenceTable conf = confidence_table(test.logits, chain);
  const CorrectnessMatrix correct = correctness(test.logits, test.labels);
  const int num_exits = ds.manifest.num_exits;

  SplitMix64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    ThresholdVector taus;
    for (int j = 0; j < num_exits - 1; ++j) {
      taus.taus.push_back(0.1 + 0.9 * rng.unit());
    }
    const SimulationResult r =
        simulate(conf, correct, taus, ds.manifest.exit_costs);
    for (std::size_t i = 0; i < 500; ++i) {
      int expected = num_exits - 1;
      for (int j = 0; j < num_exits - 1; ++j) {
        if (conf.at(i, j) >= taus.taus[j]) {
          expected = j;
          break;
        }
      }
      CHECK(r.per_sample_exit[i] == expected);
    }
  }
}

TEST_CASE("tightening every threshold never lowers the mean cost") {
  const auto ds = default_synth(123);
  const Split& test = ds.split("test");
  TransformChain chain;
  const ConfidenceTable conf = confidence_table(test.logits, chain);
  const CorrectnessMatrix correct = correctness(test.logits, test.labels);
  const int num_exits = ds.manifest.num_exits;

  double previous = -1.0;
  for (double level : {0.0, 0.3, 0.6, 0.8, 0.9, 0.99, 1.1}) {
    ThresholdVector taus;
    taus.taus.assign(num_exits - 1, level);
    const SimulationResult r =
        simulate(conf, correct, taus, ds.manifest.exit_costs);
    CHECK(r.mean_cost >= previous);
    previous = r.mean_cost;
  }
}

TEST_CASE("shape mismatches are rejected") {
  const auto conf = column_table({{0.8, 0.9}});
  const auto correct = matrix_from_rows({{1, 0}});
  const std::vector<double> two_costs = {1.0, 2.0};
  const std::vector<double> one_cost = {1.0};
  ThresholdVector taus;
  taus.taus = {0.5, 0.5};  // too many for J=2
  CHECK_THROWS_AS(simulate(conf, correct, taus, two_costs),
                  ShapeMismatchError);
  taus.taus = {0.5};
  CHECK_THROWS_AS(simulate(conf, correct, taus, one_cost),
                  ShapeMismatchError);
}

TEST_CASE("single-q curve equals a direct simulation") {
  const auto ds = default_synth(5);
  TransformChain chain;
  const std::vector<double> grid = {1.3};
  const CostAccuracyCurve curve = build_curve(ds, chain, grid, 15);
  REQUIRE(curve.points.size() == 1);

  const Split& val = ds.split("val");
  const Split& test = ds.split("test");
  const ConfidenceTable val_conf = confidence_table(val.logits, chain);
  const ConfidenceTable test_conf = confidence_table(test.logits, chain);
  const CorrectnessMatrix test_correct =
      correctness(test.logits, test.labels);
  const ThresholdVector taus = derive_thresholds(
      val_conf, exit_shares(1.3, ds.manifest.num_exits));
  const SimulationResult direct =
      simulate(test_conf, test_correct, taus, ds.manifest.exit_costs);

  CHECK(curve.points[0].thresholds.taus == taus.taus);
  CHECK(curve.points[0].sim.accuracy == direct.accuracy);
  CHECK(curve.points[0].sim.mean_cost == direct.mean_cost);
  CHECK(curve.points[0].sim.per_sample_exit == direct.per_sample_exit);
}

TEST_CASE("alpha chains produce pointwise identical curves") {
  const auto ds = default_synth(7);
  const auto grid = make_q_grid(kDefaultQMin, kDefaultQMax, 9);

  TransformChain plain;
  const CostAccuracyCurve base = build_curve(ds, plain, grid, 15);
  for (double alpha : {0.1, 10.0}) {
    TransformChain chain;
    chain.alpha = alpha;
    const CostAccuracyCurve mapped = build_curve(ds, chain, grid, 15);
    REQUIRE(mapped.points.size() == base.points.size());
    for (std::size_t p = 0; p < base.points.size(); ++p) {
      CHECK(mapped.points[p].sim.per_sample_exit ==
            base.points[p].sim.per_sample_exit);
      CHECK(mapped.points[p].sim.mean_cost == base.points[p].sim.mean_cost);
      CHECK(mapped.points[p].sim.accuracy == base.points[p].sim.accuracy);
    }
  }
}

TEST_CASE("curve points are sorted by realized mean cost") {
  const auto ds = default_synth(77);
  TransformChain chain;
  const auto grid = make_q_grid(kDefaultQMin, kDefaultQMax, 15);
  const CostAccuracyCurve curve = build_curve(ds, chain, grid, 15);
  for (std::size_t p = 1; p < curve.points.size(); ++p) {
    CHECK(curve.points[p].sim.mean_cost >=
          curve.points[p - 1].sim.mean_cost);
  }
  // EEFP is threshold-free: identical on every point.
  for (const CurvePoint& point : curve.points) {
    for (int j = 0; j < ds.manifest.num_exits - 1; ++j) {
      CHECK(point.heads.eefp[j] == curve.points[0].heads.eefp[j]);
    }
  }
}

TEST_CASE("temperature multiplier curves differ on synthetic data") {
  // Regression for the seed-7 outcome: the three multiplier chains yield
  // different exit decisions somewhere on the grid.
  const auto ds = default_synth(7);
  const auto grid = make_q_grid(kDefaultQMin, kDefaultQMax, 9);

  std::vector<CostAccuracyCurve> curves;
  for (double mult : {1.0, 3.0, 0.3}) {
    TransformChain chain;
    chain.temperature_multiplier = mult;
    curves.push_back(build_curve(ds, chain, grid, 15));
  }
  bool differs_30 = false;
  bool differs_03 = false;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    differs_30 |= curves[0].points[p].sim.per_sample_exit !=
                  curves[1].points[p].sim.per_sample_exit;
    differs_03 |= curves[0].points[p].sim.per_sample_exit !=
                  curves[2].points[p].sim.per_sample_exit;
  }
  CHECK(differs_30);
  CHECK(differs_03);
}
