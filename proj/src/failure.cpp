#include "eeval/failure.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace eeval {

std::vector<std::uint8_t> EefpLabelMatrix::column(int head) const {
  std::vector<std::uint8_t> out(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) {
    out[i] = ybar[i * num_heads + head];
  }
  return out;
}

double auroc(std::span<const double> scores,
             std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw LengthMismatchError("auroc: " + std::to_string(scores.size()) +
                              " scores vs " + std::to_string(labels.size()) +
                              " labels");
  }
  const std::size_t n = scores.size();
  std::size_t positives = 0;
  for (std::uint8_t l : labels) positives += l ? 1 : 0;
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw DegenerateLabelsError(
        "auroc: needs at least one positive and one negative label (got " +
        std::to_string(positives) + " positives of " + std::to_string(n) +
        ")");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Rank sum of positives with midranks on tied groups.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]]) positive_rank_sum += midrank;
    }
    i = j + 1;
  }

  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

EefpLabelMatrix eefp_labels(const CorrectnessMatrix& correct) {
  EefpLabelMatrix m;
  m.num_samples = correct.num_samples;
  m.num_heads = correct.num_exits - 1;
  m.ybar.resize(m.num_samples * m.num_heads);
  for (std::size_t i = 0; i < m.num_samples; ++i) {
    bool any_deeper_correct = correct.at(i, correct.num_exits - 1);
    for (int j = correct.num_exits - 2; j >= 0; --j) {
      const bool exit_is_fine = correct.at(i, j) || !any_deeper_correct;
      m.ybar[i * m.num_heads + j] = exit_is_fine ? 1 : 0;
      any_deeper_correct = any_deeper_correct || correct.at(i, j);
    }
  }
  return m;
}

std::vector<std::optional<double>> eefp_scores(
    const ConfidenceTable& conf, const CorrectnessMatrix& correct) {
  const EefpLabelMatrix labels = eefp_labels(correct);
  std::vector<std::optional<double>> scores(labels.num_heads);
  for (int j = 0; j < labels.num_heads; ++j) {
    const auto col_conf = conf.column(j);
    const auto col_ybar = labels.column(j);
    try {
      scores[j] = auroc(col_conf, col_ybar);
    } catch (const DegenerateLabelsError&) {
      scores[j] = std::nullopt;
    }
  }
  return scores;
}

namespace {

double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  if (denom == 0) return 1.0;  // no positives anywhere: vacuously perfect
  return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

}  // namespace

Eef1Result eef1(const ConfidenceTable& conf, const CorrectnessMatrix& correct,
                const ThresholdVector& thresholds) {
  const int num_exits = conf.num_exits;
  if (thresholds.taus.size() != static_cast<std::size_t>(num_exits - 1)) {
    throw LengthMismatchError("eef1: " +
                              std::to_string(thresholds.taus.size()) +
                              " thresholds for " + std::to_string(num_exits) +
                              " exits");
  }
  const EefpLabelMatrix labels = eefp_labels(correct);

  Eef1Result result;
  result.per_exit.assign(num_exits, std::nullopt);

  std::vector<std::size_t> survivors(conf.num_samples);
  std::iota(survivors.begin(), survivors.end(), 0);

  double sum = 0.0;
  for (int j = 0; j < num_exits; ++j) {
    const bool final_head = (j == num_exits - 1);
    if (!survivors.empty()) {
      std::size_t tp = 0, fp = 0, fn = 0;
      for (std::size_t i : survivors) {
        // The final head accepts everyone and its relabeled target is
        // vacuously positive.
        const bool h = final_head || conf.at(i, j) >= thresholds.taus[j];
        const bool ybar = final_head || labels.at(i, j);
        if (h && ybar) {
          ++tp;
        } else if (h && !ybar) {
          ++fp;
        } else if (!h && ybar) {
          ++fn;
        }
      }
      const double f1 = f1_from_counts(tp, fp, fn);
      result.per_exit[j] = f1;
      sum += f1;
      ++result.defined_count;
    }
    if (!final_head) {
      std::vector<std::size_t> next;
      next.reserve(survivors.size());
      for (std::size_t i : survivors) {
        if (conf.at(i, j) < thresholds.taus[j]) next.push_back(i);
      }
      survivors = std::move(next);
    }
  }
  if (result.defined_count > 0) {
    result.mean = sum / result.defined_count;
  }
  return result;
}

}  // namespace eeval
