#include "eeval/simulate.hpp"

#include <algorithm>
#include <string>

#include "eeval/calibration.hpp"
#include "eeval/failure.hpp"
#include "eeval/parallel.hpp"

namespace eeval {

SimulationResult simulate(const ConfidenceTable& conf,
                          const CorrectnessMatrix& correct,
                          const ThresholdVector& thresholds,
                          std::span<const double> exit_costs) {
  const int num_exits = conf.num_exits;
  if (correct.num_samples != conf.num_samples ||
      correct.num_exits != num_exits ||
      thresholds.taus.size() != static_cast<std::size_t>(num_exits - 1) ||
      exit_costs.size() != static_cast<std::size_t>(num_exits)) {
    throw ShapeMismatchError("simulate: inconsistent shapes");
  }

  SimulationResult result;
  result.exit_histogram.assign(num_exits, 0);
  result.per_sample_exit.resize(conf.num_samples);

  std::size_t correct_count = 0;
  double cost_total = 0.0;
  for (std::size_t i = 0; i < conf.num_samples; ++i) {
    int exit = num_exits - 1;
    for (int j = 0; j < num_exits - 1; ++j) {
      if (conf.at(i, j) >= thresholds.taus[j]) {
        exit = j;
        break;
      }
    }
    result.per_sample_exit[i] = exit;
    result.exit_histogram[exit] += 1;
    cost_total += exit_costs[exit];
    if (correct.at(i, exit)) ++correct_count;
  }
  const auto n = static_cast<double>(conf.num_samples);
  result.accuracy = static_cast<double>(correct_count) / n;
  result.mean_cost = cost_total / n;
  return result;
}

CostAccuracyCurve build_curve(const MultiExitDataset& dataset,
                              const TransformChain& chain,
                              std::span<const double> q_grid, int ece_bins) {
  const Split& val = dataset.split("val");
  const Split& test = dataset.split("test");
  const int num_exits = dataset.manifest.num_exits;

  const ConfidenceTable val_conf = confidence_table(val.logits, chain);
  const ConfidenceTable test_conf = confidence_table(test.logits, chain);
  const CorrectnessMatrix test_correct = correctness(test.logits, test.labels);

  // Threshold-free per-head metrics, shared by every point.
  HeadMetrics shared;
  shared.accuracy.resize(num_exits);
  shared.ece.resize(num_exits);
  for (int j = 0; j < num_exits; ++j) {
    std::size_t hits = 0;
    std::vector<std::uint8_t> col(test_correct.num_samples);
    for (std::size_t i = 0; i < test_correct.num_samples; ++i) {
      col[i] = test_correct.at(i, j) ? 1 : 0;
      hits += col[i];
    }
    shared.accuracy[j] =
        static_cast<double>(hits) / static_cast<double>(test_correct.num_samples);
    shared.ece[j] = ece(reliability_bins(test_conf.column(j), col, ece_bins));
  }
  shared.eefp.assign(num_exits, std::nullopt);
  const auto eefp = eefp_scores(test_conf, test_correct);
  for (int j = 0; j < num_exits - 1; ++j) shared.eefp[j] = eefp[j];

  CostAccuracyCurve curve;
  curve.exit_costs = dataset.manifest.exit_costs;
  curve.points.resize(q_grid.size());

  parallel_for(q_grid.size(), [&](std::size_t idx) {
    CurvePoint& point = curve.points[idx];
    point.q = q_grid[idx];
    point.thresholds =
        derive_thresholds(val_conf, exit_shares(point.q, num_exits));
    point.sim = simulate(test_conf, test_correct, point.thresholds,
                         dataset.manifest.exit_costs);
    point.heads = shared;
    const Eef1Result f1 = eef1(test_conf, test_correct, point.thresholds);
    point.heads.eef1 = f1.per_exit;
    point.heads.eef1_mean = f1.mean;
    point.heads.eef1_defined = f1.defined_count;
  });

  std::stable_sort(curve.points.begin(), curve.points.end(),
                   [](const CurvePoint& a, const CurvePoint& b) {
                     if (a.sim.mean_cost != b.sim.mean_cost) {
                       return a.sim.mean_cost < b.sim.mean_cost;
                     }
                     return a.q < b.q;
                   });
  return curve;
}

}  // namespace eeval
