#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "eeval/dataset.hpp"

namespace eeval {

// Equal-width reliability bins over [0, 1]. Bin m covers (m/M, (m+1)/M],
// except the first bin which also includes its left edge.
struct ReliabilityBins {
  int num_bins = 0;
  std::size_t total = 0;
  std::vector<std::size_t> counts;
  std::vector<double> mean_conf;
  std::vector<double> mean_acc;

  double edge(int m) const {
    return static_cast<double>(m) / static_cast<double>(num_bins);
  }
};

constexpr int kDefaultEceBins = 15;

ReliabilityBins reliability_bins(std::span<const double> conf,
                                 std::span<const std::uint8_t> correct,
                                 int num_bins);

double ece(const ReliabilityBins& bins);

// Mean negative log-likelihood of the true class; probabilities are floored
// at 1e-12 before the log.
double nll(const std::vector<std::vector<double>>& probabilities,
           std::span<const std::uint32_t> labels);

}  // namespace eeval
