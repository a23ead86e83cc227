#include "eeval/budget.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace eeval {

ExitShares exit_shares(double q, int num_exits) {
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw NonPositiveQError("exit_shares: q must be positive, got " +
                            std::to_string(q));
  }
  if (num_exits < 2) {
    throw InvalidConfigError("exit_shares: need at least 2 exits");
  }
  ExitShares s;
  s.q = q;
  s.shares.resize(num_exits);
  double denom = 0.0;
  for (int j = 0; j < num_exits; ++j) {
    s.shares[j] = std::pow(q, j);
    denom += s.shares[j];
  }
  for (double& v : s.shares) v /= denom;
  return s;
}

ThresholdVector derive_thresholds(const ConfidenceTable& val_conf,
                                  const ExitShares& shares) {
  if (val_conf.num_samples == 0) {
    throw EmptySplitError("derive_thresholds: validation split is empty");
  }
  if (shares.shares.size() != static_cast<std::size_t>(val_conf.num_exits)) {
    throw LengthMismatchError("derive_thresholds: " +
                              std::to_string(shares.shares.size()) +
                              " shares for " +
                              std::to_string(val_conf.num_exits) + " exits");
  }

  const double n_val = static_cast<double>(val_conf.num_samples);
  ThresholdVector thresholds;
  thresholds.taus.resize(val_conf.num_exits - 1);

  std::vector<std::size_t> survivors(val_conf.num_samples);
  std::iota(survivors.begin(), survivors.end(), 0);

  for (int j = 0; j < val_conf.num_exits - 1; ++j) {
    // Target exit count comes from the full validation size, not the
    // survivor count; round half up.
    const auto k =
        static_cast<std::size_t>(std::floor(shares.shares[j] * n_val + 0.5));

    double tau;
    if (k == 0) {
      tau = ThresholdVector::kExitNothing;
    } else if (k >= survivors.size()) {
      tau = 0.0;
    } else {
      std::vector<double> confs;
      confs.reserve(survivors.size());
      for (std::size_t i : survivors) confs.push_back(val_conf.at(i, j));
      std::nth_element(confs.begin(), confs.begin() + (k - 1), confs.end(),
                       std::greater<double>());
      tau = confs[k - 1];
    }
    thresholds.taus[j] = tau;

    std::vector<std::size_t> next;
    next.reserve(survivors.size());
    for (std::size_t i : survivors) {
      if (val_conf.at(i, j) < tau) next.push_back(i);
    }
    survivors = std::move(next);
  }
  return thresholds;
}

std::vector<std::pair<double, ThresholdVector>> q_sweep(
    const MultiExitDataset& dataset, const TransformChain& chain,
    std::span<const double> q_grid) {
  if (q_grid.empty()) {
    throw InvalidConfigError("q_sweep: empty q grid");
  }
  const Split& val = dataset.split("val");
  const ConfidenceTable val_conf = confidence_table(val.logits, chain);

  std::vector<std::pair<double, ThresholdVector>> out;
  out.reserve(q_grid.size());
  for (double q : q_grid) {
    const ExitShares shares = exit_shares(q, dataset.manifest.num_exits);
    out.emplace_back(q, derive_thresholds(val_conf, shares));
  }
  return out;
}

std::vector<double> make_q_grid(double q_min, double q_max, int points) {
  if (!(q_min > 0.0) || !(q_max > 0.0)) {
    throw NonPositiveQError("q grid bounds must be positive");
  }
  if (q_max < q_min) {
    throw InvalidConfigError("q grid: q_max must be >= q_min");
  }
  if (points < 1) {
    throw InvalidConfigError("q grid: need at least one point");
  }
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = q_min;
    return grid;
  }
  const double lo = std::log(q_min);
  const double hi = std::log(q_max);
  for (int i = 0; i < points; ++i) {
    grid[i] = std::exp(lo + (hi - lo) * i / (points - 1));
  }
  return grid;
}

}  // namespace eeval
