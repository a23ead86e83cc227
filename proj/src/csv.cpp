#include "eeval/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace eeval {

namespace {

std::string format_optional(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string("null");
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw IoError("bad numeric field '" + s + "' in " + context);
  }
  return v;
}

std::optional<double> parse_nullable(const std::string& s,
                                     const std::string& context) {
  if (s == "null" || s.empty()) return std::nullopt;
  return parse_double(s, context);
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

const std::string* ReportMeta::find(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

void write_curve_csv(std::ostream& out, const CostAccuracyCurve& curve,
                     const ReportMeta& meta) {
  for (const auto& [key, value] : meta.entries) {
    out << "# " << key << ": " << value << "\n";
  }
  const int num_exits = static_cast<int>(curve.exit_costs.size());

  out << "q,mean_cost,accuracy";
  for (int j = 1; j <= num_exits; ++j) out << ",exit_frac_" << j;
  out << "\n";
  for (const CurvePoint& p : curve.points) {
    out << format_double(p.q) << "," << format_double(p.sim.mean_cost) << ","
        << format_double(p.sim.accuracy);
    const auto n = static_cast<double>(p.sim.per_sample_exit.size());
    for (int j = 0; j < num_exits; ++j) {
      out << ","
          << format_double(static_cast<double>(p.sim.exit_histogram[j]) / n);
    }
    out << "\n";
  }

  out << "q,head,acc_head,ece,eefp,eef1\n";
  for (const CurvePoint& p : curve.points) {
    for (int j = 0; j < num_exits; ++j) {
      out << format_double(p.q) << "," << (j + 1) << ","
          << format_double(p.heads.accuracy[j]) << ","
          << format_double(p.heads.ece[j]) << ","
          << format_optional(p.heads.eefp[j]) << ","
          << format_optional(p.heads.eef1[j]) << "\n";
    }
  }
}

int ParsedCurve::num_exits() const {
  int max_head = 0;
  for (const auto& row : heads) max_head = std::max(max_head, row.head);
  return max_head;
}

ParsedCurve read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw MissingFileError("missing file: " + path.string());
  }
  const std::string context = path.string();

  ParsedCurve curve;
  enum class Section { kPreamble, kAggregate, kHeads };
  Section section = Section::kPreamble;

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto colon = line.find(": ", 2);
      if (colon != std::string::npos) {
        curve.meta.add(line.substr(2, colon - 2), line.substr(colon + 2));
      }
      continue;
    }
    if (line.rfind("q,head,", 0) == 0) {
      section = Section::kHeads;
      continue;
    }
    if (line.rfind("q,", 0) == 0) {
      section = Section::kAggregate;
      continue;
    }
    const auto fields = split_fields(line);
    if (section == Section::kAggregate) {
      if (fields.size() < 4) {
        throw IoError("short aggregate row in " + context);
      }
      CurveAggregateRow row;
      row.q = parse_double(fields[0], context);
      row.mean_cost = parse_double(fields[1], context);
      row.accuracy = parse_double(fields[2], context);
      for (std::size_t f = 3; f < fields.size(); ++f) {
        row.exit_frac.push_back(parse_double(fields[f], context));
      }
      curve.aggregate.push_back(std::move(row));
    } else if (section == Section::kHeads) {
      if (fields.size() != 6) {
        throw IoError("bad per-head row in " + context);
      }
      CurveHeadRow row;
      row.q = parse_double(fields[0], context);
      row.head = static_cast<int>(parse_double(fields[1], context));
      row.acc_head = parse_double(fields[2], context);
      row.ece = parse_double(fields[3], context);
      row.eefp = parse_nullable(fields[4], context);
      row.eef1 = parse_nullable(fields[5], context);
      curve.heads.push_back(std::move(row));
    } else {
      throw IoError("unexpected content before header in " + context);
    }
  }

  if (curve.aggregate.empty()) {
    throw IoError("curve file has no data rows: " + context);
  }
  if (const std::string* costs = curve.meta.find("exit_costs")) {
    for (const auto& field : split_fields(*costs)) {
      curve.exit_costs.push_back(parse_double(field, context));
    }
  }
  return curve;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows,
                       const ReportMeta& meta) {
  for (const auto& [key, value] : meta.entries) {
    out << "# " << key << ": " << value << "\n";
  }
  out << "head,accuracy,ece,eefp,nll\n";
  for (const MetricsRow& row : rows) {
    out << row.head << "," << format_double(row.accuracy) << ","
        << format_double(row.ece) << "," << format_optional(row.eefp) << ","
        << format_double(row.nll) << "\n";
  }
}

}  // namespace eeval
