#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eeval/dataset.hpp"

namespace eeval {

// Ordered description of the confidence-producing steps. Per-head softmax
// temperatures T_j are multiplied by a global factor m, and the resulting
// max-probability can optionally be pushed through the rank-preserving
// alpha transform.
struct TransformChain {
  // Empty means "all ones"; otherwise must have one entry per exit.
  std::vector<double> base_temperatures;
  double temperature_multiplier = 1.0;
  std::optional<double> alpha;

  // Blend weight of the alpha transform, fixed so slowly-varying regions
  // stay strictly increasing under finite precision.
  static constexpr double kEpsilon = 0.05;

  double temperature_for(int exit) const {
    const double base =
        base_temperatures.empty() ? 1.0 : base_temperatures[exit];
    return base * temperature_multiplier;
  }

  void validate(int num_exits) const;
  std::string describe() const;
};

// Per-sample per-exit scalar confidences; every entry lies in [1/C, 1].
struct ConfidenceTable {
  std::size_t num_samples = 0;
  int num_exits = 0;
  int num_classes = 0;
  std::vector<double> conf;
  TransformChain provenance;

  double at(std::size_t sample, int exit) const {
    return conf[sample * num_exits + exit];
  }
  // All samples' confidences at one exit, contiguous copy.
  std::vector<double> column(int exit) const;
};

// Numerically stabilized softmax of one logit row at temperature T.
std::vector<double> softmax(std::span<const double> logit_row,
                            double temperature);
std::vector<double> softmax(std::span<const float> logit_row,
                            double temperature);

// f_hat_alpha(c): strictly increasing remap of a confidence in [1/C, 1]
// with fixed points at both ends. alpha < 1 inflates, alpha > 1 deflates.
double rank_preserving_transform(double confidence, double alpha,
                                 int num_classes);

ConfidenceTable confidence_table(const LogitTensor& logits,
                                 const TransformChain& chain);

// Per-exit temperatures minimizing mean NLL of the true class on the given
// (calibration) logits. Scalar search over log T in [log 0.05, log 20].
std::vector<double> fit_temperatures(const LogitTensor& logits,
                                     const LabelVector& labels);

constexpr double kTemperatureSearchMin = 0.05;
constexpr double kTemperatureSearchMax = 20.0;

void save_temperatures(const std::filesystem::path& path,
                       std::span<const double> temperatures);
std::vector<double> load_temperatures(const std::filesystem::path& path,
                                      int num_exits);

}  // namespace eeval
