#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eeval/simulate.hpp"

namespace eeval {

// Shortest decimal representation that round-trips the exact double.
std::string format_double(double value);

// Metadata lines emitted at the top of every report ("# key: value").
// Every defaulted parameter is spelled out here; nothing is implicit.
struct ReportMeta {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value) {
    entries.emplace_back(key, value);
  }
  const std::string* find(const std::string& key) const;
};

void write_curve_csv(std::ostream& out, const CostAccuracyCurve& curve,
                     const ReportMeta& meta);

struct CurveAggregateRow {
  double q = 0.0;
  double mean_cost = 0.0;
  double accuracy = 0.0;
  std::vector<double> exit_frac;
};

struct CurveHeadRow {
  double q = 0.0;
  int head = 0;  // 1-based in the file
  double acc_head = 0.0;
  double ece = 0.0;
  std::optional<double> eefp;
  std::optional<double> eef1;
};

struct ParsedCurve {
  ReportMeta meta;
  std::vector<CurveAggregateRow> aggregate;
  std::vector<CurveHeadRow> heads;
  std::vector<double> exit_costs;  // from metadata

  int num_exits() const;
};

ParsedCurve read_curve_csv(const std::filesystem::path& path);

struct MetricsRow {
  int head = 0;  // 1-based
  double accuracy = 0.0;
  double ece = 0.0;
  std::optional<double> eefp;
  double nll = 0.0;
};

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows,
                       const ReportMeta& meta);

}  // namespace eeval
