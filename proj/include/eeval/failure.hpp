#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "eeval/budget.hpp"
#include "eeval/dataset.hpp"
#include "eeval/transforms.hpp"

namespace eeval {

// Relabeled targets for early-exit failure prediction: ybar[i,j] = 1 iff
// head j is correct on sample i or every deeper head is incorrect. Covers
// heads 1..J-1; the final head's label is vacuously 1 and is excluded.
struct EefpLabelMatrix {
  std::size_t num_samples = 0;
  int num_heads = 0;  // J - 1
  std::vector<std::uint8_t> ybar;

  bool at(std::size_t sample, int head) const {
    return ybar[sample * num_heads + head] != 0;
  }
  std::vector<std::uint8_t> column(int head) const;
};

// Mann-Whitney AUROC with midrank tie handling, O(N log N).
// Throws DegenerateLabelsError when either class is absent.
double auroc(std::span<const double> scores,
             std::span<const std::uint8_t> labels);

EefpLabelMatrix eefp_labels(const CorrectnessMatrix& correct);

// Per-head EEFP = AUROC(confidence at head j, ybar at head j), for the J-1
// non-final heads. A degenerate head reports nullopt instead of throwing.
std::vector<std::optional<double>> eefp_scores(const ConfidenceTable& conf,
                                               const CorrectnessMatrix& correct);

struct Eef1Result {
  std::vector<std::optional<double>> per_exit;  // size J; nullopt = undefined
  std::optional<double> mean;                   // over defined exits
  int defined_count = 0;
};

// Threshold-aware F1 between the exit indicator and ybar on the samples
// still alive at each head, averaged over the heads where it is defined.
Eef1Result eef1(const ConfidenceTable& conf, const CorrectnessMatrix& correct,
                const ThresholdVector& thresholds);

}  // namespace eeval
