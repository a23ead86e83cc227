#include "eeval/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace eeval {

ReliabilityBins reliability_bins(std::span<const double> conf,
                                 std::span<const std::uint8_t> correct,
                                 int num_bins) {
  if (conf.size() != correct.size()) {
    throw LengthMismatchError("reliability_bins: " +
                              std::to_string(conf.size()) +
                              " confidences vs " +
                              std::to_string(correct.size()) + " labels");
  }
  if (num_bins < 1) {
    throw InvalidConfigError("reliability_bins: bin count must be >= 1");
  }

  ReliabilityBins bins;
  bins.num_bins = num_bins;
  bins.total = conf.size();
  bins.counts.assign(num_bins, 0);
  std::vector<double> conf_sum(num_bins, 0.0);
  std::vector<double> acc_sum(num_bins, 0.0);

  for (std::size_t i = 0; i < conf.size(); ++i) {
    const double c = conf[i];
    int m = static_cast<int>(std::ceil(c * num_bins)) - 1;
    m = std::clamp(m, 0, num_bins - 1);
    // Settle float disagreements between c*M and the edge values themselves
    // so membership is exactly (edge_m, edge_{m+1}].
    while (m > 0 && c <= bins.edge(m)) --m;
    while (m < num_bins - 1 && c > bins.edge(m + 1)) ++m;
    bins.counts[m] += 1;
    conf_sum[m] += c;
    acc_sum[m] += correct[i] ? 1.0 : 0.0;
  }

  bins.mean_conf.assign(num_bins, 0.0);
  bins.mean_acc.assign(num_bins, 0.0);
  for (int m = 0; m < num_bins; ++m) {
    if (bins.counts[m] > 0) {
      bins.mean_conf[m] = conf_sum[m] / static_cast<double>(bins.counts[m]);
      bins.mean_acc[m] = acc_sum[m] / static_cast<double>(bins.counts[m]);
    }
  }
  return bins;
}

double ece(const ReliabilityBins& bins) {
  if (bins.total == 0) {
    throw EmptyInputError("ece: no samples");
  }
  double total = 0.0;
  for (int m = 0; m < bins.num_bins; ++m) {
    if (bins.counts[m] == 0) continue;
    const double weight =
        static_cast<double>(bins.counts[m]) / static_cast<double>(bins.total);
    total += weight * std::abs(bins.mean_acc[m] - bins.mean_conf[m]);
  }
  return total;
}

double nll(const std::vector<std::vector<double>>& probabilities,
           std::span<const std::uint32_t> labels) {
  if (probabilities.size() != labels.size()) {
    throw LengthMismatchError("nll: " + std::to_string(probabilities.size()) +
                              " probability rows vs " +
                              std::to_string(labels.size()) + " labels");
  }
  if (probabilities.empty()) {
    throw EmptyInputError("nll: no samples");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double p = std::max(probabilities[i][labels[i]], 1e-12);
    total += -std::log(p);
  }
  return total / static_cast<double>(probabilities.size());
}

}  // namespace eeval
