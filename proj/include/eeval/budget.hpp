#pragma once

#include <span>
#include <utility>
#include <vector>

#include "eeval/dataset.hpp"
#include "eeval/transforms.hpp"

namespace eeval {

// Geometric allocation of exit fractions: shares[j] = q^j / sum_l q^l,
// zero-based exponent so the shares normalize.
struct ExitShares {
  double q = 1.0;
  std::vector<double> shares;
};

// Per-exit thresholds tau_1..tau_{J-1}; the final exit always accepts.
// kExitNothing lies above every confidence, so that head exits no sample.
struct ThresholdVector {
  static constexpr double kExitNothing = 1.0 + 1e-9;
  std::vector<double> taus;
};

ExitShares exit_shares(double q, int num_exits);

// Sequential quantile rule on the validation confidences: head j's threshold
// is the k_j-th largest confidence among the samples still alive at head j,
// with k_j = round-half-up(shares[j] * N_val) clamped to the survivor count.
ThresholdVector derive_thresholds(const ConfidenceTable& val_conf,
                                  const ExitShares& shares);

std::vector<std::pair<double, ThresholdVector>> q_sweep(
    const MultiExitDataset& dataset, const TransformChain& chain,
    std::span<const double> q_grid);

constexpr double kDefaultQMin = 0.00390625;  // 2^-8
constexpr double kDefaultQMax = 256.0;       // 2^8
constexpr int kDefaultQPoints = 33;

// Log-uniform grid from q_min to q_max inclusive.
std::vector<double> make_q_grid(double q_min, double q_max, int points);

}  // namespace eeval
