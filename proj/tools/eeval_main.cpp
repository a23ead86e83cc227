// eeval: evaluation toolkit for early-exit classifiers operating on
// precomputed per-exit logits. Subcommands: synth, calibrate, metrics,
// sweep, report.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eeval/budget.hpp"
#include "eeval/calibration.hpp"
#include "eeval/csv.hpp"
#include "eeval/dataset.hpp"
#include "eeval/failure.hpp"
#include "eeval/simulate.hpp"
#include "eeval/svg.hpp"
#include "eeval/synth.hpp"
#include "eeval/transforms.hpp"
#include "eeval/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;

struct ChainFlags {
  std::string temps_path;
  double temp_mult = 1.0;
  double alpha = 0.0;  // 0 = disabled

  void attach(CLI::App* cmd) {
    cmd->add_option("--temps", temps_path,
                    "JSON file with fitted per-head temperatures "
                    "(default: all 1.0)");
    cmd->add_option("--temp-mult", temp_mult,
                    "multiplier applied to every head temperature")
        ->capture_default_str();
    cmd->add_option("--alpha", alpha,
                    "rank-preserving decalibration coefficient "
                    "(default: disabled)")
        ->capture_default_str();
  }

  eeval::TransformChain build(int num_exits) const {
    eeval::TransformChain chain;
    if (!temps_path.empty()) {
      chain.base_temperatures =
          eeval::load_temperatures(temps_path, num_exits);
    }
    chain.temperature_multiplier = temp_mult;
    if (alpha != 0.0) {
      if (alpha < 0.0) {
        throw eeval::InvalidConfigError("--alpha must be positive");
      }
      chain.alpha = alpha;
    }
    chain.validate(num_exits);
    return chain;
  }
};

std::vector<double> parse_skill_list(const std::string& csv) {
  std::vector<double> skills;
  std::istringstream is(csv);
  std::string field;
  while (std::getline(is, field, ',')) {
    try {
      skills.push_back(std::stod(field));
    } catch (const std::exception&) {
      throw eeval::InvalidConfigError("--skill: bad number '" + field + "'");
    }
  }
  return skills;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw eeval::IoError("cannot open for writing: " + path.string());
  }
  out << text;
  out.flush();
  if (!out) {
    throw eeval::IoError("failed writing " + path.string());
  }
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += eeval::format_double(v[i]);
  }
  return out;
}

int run_synth(const std::string& out_dir, const eeval::SynthConfig& config) {
  const eeval::MultiExitDataset ds = eeval::generate(config);
  eeval::save_dataset(ds, out_dir);
  std::cout << "synth: wrote dataset to " << out_dir << " (seed=" << config.seed
            << " J=" << config.num_exits << " C=" << config.num_classes
            << " calib=" << config.num_calib << " val=" << config.num_val
            << " test=" << config.num_test
            << " skill=" << join_doubles(config.effective_skill())
            << " sharpness=" << eeval::format_double(config.signal_sharpness)
            << " distortion-temp="
            << eeval::format_double(config.distortion_temperature) << ")\n";
  return kExitOk;
}

int run_calibrate(const std::string& data_dir, const std::string& out_path) {
  const eeval::MultiExitDataset ds = eeval::load_dataset(data_dir);
  if (!ds.has_split("calib")) {
    throw eeval::EmptySplitError("dataset at " + data_dir +
                                 " has no 'calib' split");
  }
  const eeval::Split& calib = ds.split("calib");
  const std::vector<double> temps =
      eeval::fit_temperatures(calib.logits, calib.labels);
  eeval::save_temperatures(out_path, temps);
  std::cout << "calibrate: fitted temperatures " << join_doubles(temps)
            << " -> " << out_path << "\n";
  return kExitOk;
}

eeval::ReportMeta base_meta(const std::string& data_dir,
                            const eeval::TransformChain& chain) {
  eeval::ReportMeta meta;
  meta.add("tool_version", eeval::kVersion);
  meta.add("dataset", data_dir);
  meta.add("chain", chain.describe());
  return meta;
}

int run_metrics(const std::string& data_dir, const std::string& split_name,
                const ChainFlags& chain_flags, int ece_bins,
                const std::string& out_path, bool debug) {
  const eeval::MultiExitDataset ds = eeval::load_dataset(data_dir);
  const eeval::Split& split = ds.split(split_name);
  const eeval::TransformChain chain =
      chain_flags.build(ds.manifest.num_exits);

  const eeval::ConfidenceTable conf =
      eeval::confidence_table(split.logits, chain);
  const eeval::CorrectnessMatrix correct =
      eeval::correctness(split.logits, split.labels);
  const auto eefp = eeval::eefp_scores(conf, correct);

  std::vector<eeval::MetricsRow> rows;
  for (int j = 0; j < ds.manifest.num_exits; ++j) {
    eeval::MetricsRow row;
    row.head = j + 1;

    std::size_t hits = 0;
    std::vector<std::uint8_t> col(correct.num_samples);
    for (std::size_t i = 0; i < correct.num_samples; ++i) {
      col[i] = correct.at(i, j) ? 1 : 0;
      hits += col[i];
    }
    row.accuracy = static_cast<double>(hits) /
                   static_cast<double>(correct.num_samples);
    row.ece = eeval::ece(eeval::reliability_bins(conf.column(j), col, ece_bins));
    if (j < ds.manifest.num_exits - 1) row.eefp = eefp[j];

    std::vector<std::vector<double>> probs(split.logits.num_samples);
    for (std::size_t i = 0; i < split.logits.num_samples; ++i) {
      probs[i] = eeval::softmax(split.logits.row(i, j),
                                chain.temperature_for(j));
    }
    row.nll = eeval::nll(probs, split.labels);
    rows.push_back(row);
  }

  eeval::ReportMeta meta = base_meta(data_dir, chain);
  meta.add("split", split_name);
  meta.add("ece_bins", std::to_string(ece_bins));
  meta.add("ece_population", "all split samples per head");

  std::ostringstream csv;
  eeval::write_metrics_csv(csv, rows, meta);
  std::cout << csv.str();
  if (!out_path.empty()) {
    write_text_file(out_path, csv.str());
  }

  if (debug) {
    const std::size_t show = std::min<std::size_t>(conf.num_samples, 10);
    for (int j = 0; j < ds.manifest.num_exits; ++j) {
      std::vector<std::size_t> order(show);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) {
                  return conf.at(a, j) > conf.at(b, j);
                });
      std::cerr << "debug: head " << (j + 1) << " confidence ranking:";
      for (std::size_t i : order) {
        std::cerr << " " << i << "(" << eeval::format_double(conf.at(i, j))
                  << ")";
      }
      std::cerr << "\n";
    }
  }
  return kExitOk;
}

int run_sweep(const std::string& data_dir, const ChainFlags& chain_flags,
              double q_min, double q_max, int q_points, int ece_bins,
              const std::string& out_path) {
  const eeval::MultiExitDataset ds = eeval::load_dataset(data_dir);
  const eeval::TransformChain chain =
      chain_flags.build(ds.manifest.num_exits);
  const std::vector<double> grid = eeval::make_q_grid(q_min, q_max, q_points);
  const eeval::CostAccuracyCurve curve =
      eeval::build_curve(ds, chain, grid, ece_bins);

  eeval::ReportMeta meta = base_meta(data_dir, chain);
  meta.add("ece_bins", std::to_string(ece_bins));
  meta.add("ece_population", "all test samples per head");
  meta.add("thresholds_split", "val");
  meta.add("metrics_split", "test");
  meta.add("q_grid", "min=" + eeval::format_double(q_min) +
                         " max=" + eeval::format_double(q_max) +
                         " points=" + std::to_string(q_points));
  meta.add("exit_costs", join_doubles(ds.manifest.exit_costs));

  std::ostringstream csv;
  eeval::write_curve_csv(csv, curve, meta);
  write_text_file(out_path, csv.str());
  std::cout << "sweep: wrote " << curve.points.size() << " curve points to "
            << out_path << "\n";
  return kExitOk;
}

int run_report(const std::string& curves_csv, const std::string& labels_csv,
               const std::string& svg_path) {
  std::vector<std::string> paths;
  std::vector<std::string> labels;
  {
    std::istringstream is(curves_csv);
    std::string field;
    while (std::getline(is, field, ',')) paths.push_back(field);
  }
  {
    std::istringstream is(labels_csv);
    std::string field;
    while (std::getline(is, field, ',')) labels.push_back(field);
  }
  if (paths.size() != labels.size()) {
    throw eeval::InvalidConfigError(
        "--curves has " + std::to_string(paths.size()) + " entries but "
        "--labels has " + std::to_string(labels.size()));
  }
  std::vector<eeval::ParsedCurve> curves;
  curves.reserve(paths.size());
  for (const std::string& path : paths) {
    curves.push_back(eeval::read_curve_csv(path));
  }
  write_text_file(svg_path, eeval::render_report_svg(curves, labels));
  std::cout << "report: wrote " << svg_path << "\n";
  return kExitOk;
}

bool is_usage_error(const eeval::Error& e) {
  return dynamic_cast<const eeval::InvalidConfigError*>(&e) ||
         dynamic_cast<const eeval::MissingFileError*>(&e) ||
         dynamic_cast<const eeval::ManifestError*>(&e) ||
         dynamic_cast<const eeval::ShapeMismatchError*>(&e) ||
         dynamic_cast<const eeval::NonFiniteLogitError*>(&e) ||
         dynamic_cast<const eeval::LabelOutOfRangeError*>(&e) ||
         dynamic_cast<const eeval::NonIncreasingCostsError*>(&e) ||
         dynamic_cast<const eeval::EmptySplitError*>(&e) ||
         dynamic_cast<const eeval::NonPositiveQError*>(&e);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Early-exit classifier evaluation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", eeval::kVersion);

  // synth
  auto* synth = app.add_subcommand(
      "synth", "Generate a synthetic multi-exit logit dataset");
  std::string synth_out;
  eeval::SynthConfig synth_cfg;
  std::string skill_csv;
  synth->add_option("--out", synth_out, "output dataset directory")
      ->required();
  synth->add_option("--seed", synth_cfg.seed, "PRNG seed")->required();
  synth->add_option("--samples-calib", synth_cfg.num_calib,
                    "calibration split size")
      ->capture_default_str();
  synth->add_option("--samples-val", synth_cfg.num_val,
                    "validation split size")
      ->capture_default_str();
  synth->add_option("--samples-test", synth_cfg.num_test, "test split size")
      ->capture_default_str();
  synth->add_option("--exits", synth_cfg.num_exits, "number of exits J")
      ->capture_default_str();
  synth->add_option("--classes", synth_cfg.num_classes, "number of classes C")
      ->capture_default_str();
  synth->add_option("--skill", skill_csv,
                    "comma-separated per-head target accuracies "
                    "(default: evenly spaced 0.5..0.9)");
  synth->add_option("--sharpness", synth_cfg.signal_sharpness,
                    "confidence informativeness scale")
      ->capture_default_str();
  synth->add_option("--distortion-temp", synth_cfg.distortion_temperature,
                    "temperature distortion applied to emitted logits")
      ->capture_default_str();

  // calibrate
  auto* calibrate = app.add_subcommand(
      "calibrate", "Fit per-head temperatures on the calib split");
  std::string cal_data, cal_out;
  calibrate->add_option("--data", cal_data, "dataset directory")->required();
  calibrate->add_option("--out", cal_out, "output temperature JSON file")
      ->required();

  // metrics
  auto* metrics = app.add_subcommand(
      "metrics", "Per-head accuracy, ECE, EEFP and NLL on one split");
  std::string met_data, met_split = "test", met_out;
  ChainFlags met_chain;
  int met_bins = eeval::kDefaultEceBins;
  bool met_debug = false;
  metrics->add_option("--data", met_data, "dataset directory")->required();
  metrics->add_option("--split", met_split, "split to evaluate")
      ->capture_default_str();
  met_chain.attach(metrics);
  metrics->add_option("--ece-bins", met_bins, "number of ECE bins")
      ->capture_default_str();
  metrics->add_option("--out", met_out, "also write the CSV to this file");
  metrics->add_flag("--debug", met_debug,
                    "print per-head confidence rankings to stderr");

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "Build a cost-accuracy curve over a q grid");
  std::string sweep_data, sweep_out;
  ChainFlags sweep_chain;
  double q_min = eeval::kDefaultQMin;
  double q_max = eeval::kDefaultQMax;
  int q_points = eeval::kDefaultQPoints;
  int sweep_bins = eeval::kDefaultEceBins;
  sweep->add_option("--data", sweep_data, "dataset directory")->required();
  sweep_chain.attach(sweep);
  sweep->add_option("--q-min", q_min, "smallest q")->capture_default_str();
  sweep->add_option("--q-max", q_max, "largest q")->capture_default_str();
  sweep->add_option("--q-points", q_points, "number of grid points")
      ->capture_default_str();
  sweep->add_option("--ece-bins", sweep_bins, "number of ECE bins")
      ->capture_default_str();
  sweep->add_option("--out", sweep_out, "output curve CSV file")->required();

  // report
  auto* report = app.add_subcommand(
      "report", "Render curve CSVs into a three-panel SVG figure");
  std::string rep_curves, rep_labels, rep_svg;
  report->add_option("--curves", rep_curves,
                     "comma-separated curve CSV files")
      ->required();
  report->add_option("--labels", rep_labels, "comma-separated curve labels")
      ->required();
  report->add_option("--svg", rep_svg, "output SVG file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      if (!skill_csv.empty()) synth_cfg.head_skill = parse_skill_list(skill_csv);
      return run_synth(synth_out, synth_cfg);
    }
    if (calibrate->parsed()) {
      return run_calibrate(cal_data, cal_out);
    }
    if (metrics->parsed()) {
      return run_metrics(met_data, met_split, met_chain, met_bins, met_out,
                         met_debug);
    }
    if (sweep->parsed()) {
      return run_sweep(sweep_data, sweep_chain, q_min, q_max, q_points,
                       sweep_bins, sweep_out);
    }
    if (report->parsed()) {
      return run_report(rep_curves, rep_labels, rep_svg);
    }
  } catch (const eeval::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_usage_error(e) ? kExitUsage : kExitComputation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitComputation;
  }
  return kExitUsage;
}
