#pragma once

#include <optional>
#include <span>
#include <vector>

#include "eeval/budget.hpp"
#include "eeval/dataset.hpp"
#include "eeval/transforms.hpp"

namespace eeval {

struct SimulationResult {
  double accuracy = 0.0;
  double mean_cost = 0.0;
  std::vector<std::size_t> exit_histogram;  // per exit, sums to N
  std::vector<int> per_sample_exit;         // 0-based exit index per sample
};

// Per-head metrics attached to each curve point. Standalone accuracy, ECE
// and EEFP do not depend on the thresholds; EEF1 does.
struct HeadMetrics {
  std::vector<double> accuracy;             // size J
  std::vector<double> ece;                  // size J
  std::vector<std::optional<double>> eefp;  // size J, final head undefined
  std::vector<std::optional<double>> eef1;  // size J
  std::optional<double> eef1_mean;
  int eef1_defined = 0;
};

struct CurvePoint {
  double q = 0.0;
  ThresholdVector thresholds;
  SimulationResult sim;
  HeadMetrics heads;
};

struct CostAccuracyCurve {
  std::vector<CurvePoint> points;  // sorted by realized mean_cost ascending
  std::vector<double> exit_costs;
};

// Each sample exits at the first head whose confidence reaches its
// threshold, or at the final head.
SimulationResult simulate(const ConfidenceTable& conf,
                          const CorrectnessMatrix& correct,
                          const ThresholdVector& thresholds,
                          std::span<const double> exit_costs);

// Thresholds are derived on the validation split per q and applied to the
// test split. Points evaluate in parallel (capped by EEVAL_THREADS).
CostAccuracyCurve build_curve(const MultiExitDataset& dataset,
                              const TransformChain& chain,
                              std::span<const double> q_grid, int ece_bins);

}  // namespace eeval
