#include "eeval/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace eeval {

namespace {

// Mean NLL of the true class at temperature T, per exit. Used by the
// temperature fit; log-sum-exp keeps it stable for any T in the search range.
double mean_nll_at(const LogitTensor& logits, const LabelVector& labels,
                   int exit, double temperature) {
  double total = 0.0;
  for (std::size_t i = 0; i < logits.num_samples; ++i) {
    const auto row = logits.row(i, exit);
    double max_w = -INFINITY;
    for (float z : row) max_w = std::max(max_w, static_cast<double>(z) / temperature);
    double sum = 0.0;
    for (float z : row) sum += std::exp(static_cast<double>(z) / temperature - max_w);
    const double w_true = static_cast<double>(row[labels[i]]) / temperature;
    total += -(w_true - max_w - std::log(sum));
  }
  return total / static_cast<double>(logits.num_samples);
}

}  // namespace

void TransformChain::validate(int num_exits) const {
  if (!base_temperatures.empty() &&
      base_temperatures.size() != static_cast<std::size_t>(num_exits)) {
    throw InvalidConfigError(
        "transform chain has " + std::to_string(base_temperatures.size()) +
        " temperatures for " + std::to_string(num_exits) + " exits");
  }
  for (double t : base_temperatures) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw InvalidConfigError("temperatures must be positive and finite");
    }
  }
  if (!(temperature_multiplier > 0.0) ||
      !std::isfinite(temperature_multiplier)) {
    throw InvalidConfigError("temperature multiplier must be positive");
  }
  if (alpha && (!(*alpha > 0.0) || !std::isfinite(*alpha))) {
    throw InvalidConfigError("alpha must be positive and finite");
  }
}

std::string TransformChain::describe() const {
  std::ostringstream os;
  os << "temps=";
  if (base_temperatures.empty()) {
    os << "ones";
  } else {
    os << "[";
    for (std::size_t i = 0; i < base_temperatures.size(); ++i) {
      if (i) os << " ";
      os << base_temperatures[i];
    }
    os << "]";
  }
  os << " mult=" << temperature_multiplier;
  os << " alpha=";
  if (alpha) {
    os << *alpha;
  } else {
    os << "none";
  }
  return os.str();
}

std::vector<double> ConfidenceTable::column(int exit) const {
  std::vector<double> out(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) out[i] = at(i, exit);
  return out;
}

std::vector<double> softmax(std::span<const double> logit_row,
                            double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw NonFiniteInputError("softmax temperature must be positive, got " +
                              std::to_string(temperature));
  }
  std::vector<double> out(logit_row.size());
  double max_w = -INFINITY;
  for (std::size_t k = 0; k < logit_row.size(); ++k) {
    if (!std::isfinite(logit_row[k])) {
      throw NonFiniteInputError("softmax input contains a non-finite logit");
    }
    out[k] = logit_row[k] / temperature;
    max_w = std::max(max_w, out[k]);
  }
  double sum = 0.0;
  for (double& w : out) {
    w = std::exp(w - max_w);
    sum += w;
  }
  for (double& w : out) w /= sum;
  return out;
}

std::vector<double> softmax(std::span<const float> logit_row,
                            double temperature) {
  std::vector<double> as_double(logit_row.begin(), logit_row.end());
  return softmax(std::span<const double>(as_double), temperature);
}

double rank_preserving_transform(double confidence, double alpha,
                                 int num_classes) {
  const double floor = 1.0 / num_classes;
  if (confidence < floor - 1e-9 || confidence > 1.0 + 1e-9) {
    throw DomainError("confidence " + std::to_string(confidence) +
                      " outside [1/C, 1] for C=" + std::to_string(num_classes));
  }
  const double c = std::clamp(confidence, floor, 1.0);
  // Exact fixed points at both ends, and alpha = 1 is the identity.
  if (c <= floor) return floor;
  if (c >= 1.0) return 1.0;
  if (alpha == 1.0) return c;
  const double u = (c - floor) / (1.0 - floor);
  const double f = floor + (1.0 - floor) * std::pow(u, alpha);
  return TransformChain::kEpsilon * c + (1.0 - TransformChain::kEpsilon) * f;
}

ConfidenceTable confidence_table(const LogitTensor& logits,
                                 const TransformChain& chain) {
  chain.validate(logits.num_exits);
  ConfidenceTable table;
  table.num_samples = logits.num_samples;
  table.num_exits = logits.num_exits;
  table.num_classes = logits.num_classes;
  table.provenance = chain;
  table.conf.resize(table.num_samples * table.num_exits);

  const double floor = 1.0 / logits.num_classes;
  for (std::size_t i = 0; i < logits.num_samples; ++i) {
    for (int j = 0; j < logits.num_exits; ++j) {
      const auto probs = softmax(logits.row(i, j), chain.temperature_for(j));
      double c = *std::max_element(probs.begin(), probs.end());
      c = std::clamp(c, floor, 1.0);
      if (chain.alpha) {
        c = rank_preserving_transform(c, *chain.alpha, logits.num_classes);
      }
      table.conf[i * table.num_exits + j] = c;
    }
  }
  return table;
}

std::vector<double> fit_temperatures(const LogitTensor& logits,
                                     const LabelVector& labels) {
  if (logits.num_samples == 0) {
    throw EmptySplitError("fit_temperatures: calibration split is empty");
  }
  if (labels.size() != logits.num_samples) {
    throw LengthMismatchError("fit_temperatures: labels length mismatch");
  }

  const double lo = std::log(kTemperatureSearchMin);
  const double hi = std::log(kTemperatureSearchMax);
  constexpr int kGridPoints = 64;
  constexpr double kLogTol = 1e-4;

  std::vector<double> temps(logits.num_exits);
  for (int j = 0; j < logits.num_exits; ++j) {
    double best_log_t = 0.0;
    double best_nll = mean_nll_at(logits, labels, j, 1.0);  // T = 1 anchor

    auto consider = [&](double log_t) {
      const double nll = mean_nll_at(logits, labels, j, std::exp(log_t));
      if (nll < best_nll) {
        best_nll = nll;
        best_log_t = log_t;
      }
      return nll;
    };

    std::vector<double> grid_nll(kGridPoints);
    int best_idx = 0;
    for (int g = 0; g < kGridPoints; ++g) {
      const double log_t = lo + (hi - lo) * g / (kGridPoints - 1);
      grid_nll[g] = consider(log_t);
      if (grid_nll[g] < grid_nll[best_idx]) best_idx = g;
    }

    // Golden-section refinement inside the bracket around the grid minimum.
    const double step = (hi - lo) / (kGridPoints - 1);
    double a = lo + step * std::max(0, best_idx - 1);
    double b = lo + step * std::min(kGridPoints - 1, best_idx + 1);
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = consider(x1);
    double f2 = consider(x2);
    while (b - a > kLogTol) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - kInvPhi * (b - a);
        f1 = consider(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + kInvPhi * (b - a);
        f2 = consider(x2);
      }
    }
    temps[j] = std::exp(best_log_t);
  }
  return temps;
}

void save_temperatures(const std::filesystem::path& path,
                       std::span<const double> temperatures) {
  nlohmann::json j = std::vector<double>(temperatures.begin(),
                                         temperatures.end());
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot open for writing: " + path.string());
  }
  out << j.dump() << "\n";
  out.flush();
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

std::vector<double> load_temperatures(const std::filesystem::path& path,
                                      int num_exits) {
  std::ifstream in(path);
  if (!in) {
    throw MissingFileError("missing file: " + path.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfigError("temperature file is not valid JSON: " +
                             std::string(e.what()));
  }
  if (!j.is_array()) {
    throw InvalidConfigError("temperature file must hold a JSON array");
  }
  std::vector<double> temps = j.get<std::vector<double>>();
  if (temps.size() != static_cast<std::size_t>(num_exits)) {
    throw InvalidConfigError("temperature file has " +
                             std::to_string(temps.size()) + " entries for " +
                             std::to_string(num_exits) + " exits");
  }
  for (double t : temps) {
    if (!(t > 0.0)) {
      throw InvalidConfigError("temperatures must be positive");
    }
  }
  return temps;
}

}  // namespace eeval
