#include "eeval/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "on-disk format is little-endian; big-endian hosts need byte "
              "swapping that is not implemented");

namespace eeval {

namespace {

using ordered_json = nlohmann::ordered_json;

const char* kSplitNames[] = {"calib", "val", "test"};

bool known_split(const std::string& name) {
  for (const char* s : kSplitNames) {
    if (name == s) return true;
  }
  return false;
}

std::vector<char> read_file_bytes(const std::filesystem::path& path,
                                  std::size_t expected_bytes,
                                  const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MissingFileError("missing file: " + path.string());
  }
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  if (size != expected_bytes) {
    throw ShapeMismatchError(what + " '" + path.string() + "' has " +
                             std::to_string(size) + " bytes, expected " +
                             std::to_string(expected_bytes));
  }
  in.seekg(0, std::ios::beg);
  std::vector<char> bytes(size);
  in.read(bytes.data(), static_cast<std::streamsize>(size));
  if (!in) {
    throw IoError("failed reading " + path.string());
  }
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, const void* data,
                      std::size_t bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open for writing: " + path.string());
  }
  out.write(static_cast<const char*>(data),
            static_cast<std::streamsize>(bytes));
  out.flush();
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

DatasetManifest parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw MissingFileError("missing file: " + path.string());
  }
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError("manifest.json is not valid JSON: " +
                        std::string(e.what()));
  }

  DatasetManifest m;
  try {
    m.num_classes = j.at("num_classes").get<int>();
    m.num_exits = j.at("num_exits").get<int>();
    m.exit_costs = j.at("exit_costs").get<std::vector<double>>();
    for (const auto& [name, desc] : j.at("splits").items()) {
      if (!known_split(name)) {
        throw ManifestError("manifest field 'splits' has unknown split '" +
                            name + "'");
      }
      SplitDescriptor sd;
      sd.num_samples = desc.at("num_samples").get<std::size_t>();
      sd.logits_file = desc.at("logits").get<std::string>();
      sd.labels_file = desc.at("labels").get<std::string>();
      m.splits[name] = sd;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError("manifest.json: " + std::string(e.what()));
  }

  if (m.num_classes < 2) {
    throw ManifestError("manifest field 'num_classes' must be >= 2, got " +
                        std::to_string(m.num_classes));
  }
  if (m.num_exits < 2) {
    throw ManifestError("manifest field 'num_exits' must be >= 2, got " +
                        std::to_string(m.num_exits));
  }
  if (m.exit_costs.size() != static_cast<std::size_t>(m.num_exits)) {
    throw ManifestError("manifest field 'exit_costs' must have num_exits=" +
                        std::to_string(m.num_exits) + " entries, got " +
                        std::to_string(m.exit_costs.size()));
  }
  if (m.exit_costs.front() < 0.0) {
    throw ManifestError("manifest field 'exit_costs' must be non-negative");
  }
  for (std::size_t i = 1; i < m.exit_costs.size(); ++i) {
    if (!(m.exit_costs[i] > m.exit_costs[i - 1])) {
      throw NonIncreasingCostsError(
          "manifest field 'exit_costs' must be strictly increasing; entry " +
          std::to_string(i) + " (" + std::to_string(m.exit_costs[i]) +
          ") does not exceed entry " + std::to_string(i - 1) + " (" +
          std::to_string(m.exit_costs[i - 1]) + ")");
    }
  }
  return m;
}

Split load_split(const std::filesystem::path& root, const DatasetManifest& m,
                 const SplitDescriptor& desc) {
  const std::size_t n = desc.num_samples;
  const auto j = static_cast<std::size_t>(m.num_exits);
  const auto c = static_cast<std::size_t>(m.num_classes);

  Split split;
  split.logits.num_samples = n;
  split.logits.num_exits = m.num_exits;
  split.logits.num_classes = m.num_classes;

  {
    const auto bytes = read_file_bytes(root / desc.logits_file,
                                       n * j * c * 4, "logits file");
    split.logits.values.resize(n * j * c);
    std::memcpy(split.logits.values.data(), bytes.data(), bytes.size());
  }
  for (std::size_t i = 0; i < split.logits.values.size(); ++i) {
    if (!std::isfinite(split.logits.values[i])) {
      throw NonFiniteLogitError("logits file '" + desc.logits_file +
                                "' contains a non-finite value at index " +
                                std::to_string(i));
    }
  }

  {
    const auto bytes =
        read_file_bytes(root / desc.labels_file, n * 4, "labels file");
    split.labels.resize(n);
    std::memcpy(split.labels.data(), bytes.data(), bytes.size());
  }
  for (std::size_t i = 0; i < split.labels.size(); ++i) {
    if (split.labels[i] >= static_cast<std::uint32_t>(m.num_classes)) {
      throw LabelOutOfRangeError(
          "labels file '" + desc.labels_file + "' entry " + std::to_string(i) +
          " is " + std::to_string(split.labels[i]) + ", must be < " +
          std::to_string(m.num_classes));
    }
  }
  return split;
}

}  // namespace

const Split& MultiExitDataset::split(const std::string& name) const {
  auto it = splits.find(name);
  if (it == splits.end()) {
    throw EmptySplitError("dataset has no '" + name + "' split");
  }
  return it->second;
}

int argmax_lowest(std::span<const float> row) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(row.size()); ++k) {
    if (row[k] > row[best]) best = k;
  }
  return best;
}

MultiExitDataset load_dataset(const std::filesystem::path& root) {
  MultiExitDataset ds;
  ds.manifest = parse_manifest(root / "manifest.json");
  for (const auto& [name, desc] : ds.manifest.splits) {
    ds.splits[name] = load_split(root, ds.manifest, desc);
  }
  return ds;
}

void save_dataset(const MultiExitDataset& dataset,
                  const std::filesystem::path& root) {
  std::error_code ec;
  std::filesystem::create_directories(root, ec);

  ordered_json j;
  j["num_classes"] = dataset.manifest.num_classes;
  j["num_exits"] = dataset.manifest.num_exits;
  j["exit_costs"] = dataset.manifest.exit_costs;
  ordered_json splits = ordered_json::object();
  for (const char* name : kSplitNames) {
    auto it = dataset.manifest.splits.find(name);
    if (it == dataset.manifest.splits.end()) continue;
    splits[name] = {{"num_samples", it->second.num_samples},
                    {"logits", it->second.logits_file},
                    {"labels", it->second.labels_file}};
  }
  j["splits"] = splits;

  {
    std::ofstream out(root / "manifest.json", std::ios::trunc);
    if (!out) {
      throw IoError("cannot open for writing: " +
                    (root / "manifest.json").string());
    }
    out << j.dump(2) << "\n";
    out.flush();
    if (!out) {
      throw IoError("failed writing " + (root / "manifest.json").string());
    }
  }

  for (const auto& [name, desc] : dataset.manifest.splits) {
    const Split& split = dataset.split(name);
    write_file_bytes(root / desc.logits_file, split.logits.values.data(),
                     split.logits.values.size() * 4);
    write_file_bytes(root / desc.labels_file, split.labels.data(),
                     split.labels.size() * 4);
  }
}

CorrectnessMatrix correctness(const LogitTensor& logits,
                              const LabelVector& labels) {
  if (labels.size() != logits.num_samples) {
    throw LengthMismatchError(
        "correctness: labels length " + std::to_string(labels.size()) +
        " != sample count " + std::to_string(logits.num_samples));
  }
  CorrectnessMatrix m;
  m.num_samples = logits.num_samples;
  m.num_exits = logits.num_exits;
  m.y.resize(m.num_samples * m.num_exits);
  for (std::size_t i = 0; i < m.num_samples; ++i) {
    for (int j = 0; j < m.num_exits; ++j) {
      const int pred = argmax_lowest(logits.row(i, j));
      m.y[i * m.num_exits + j] =
          (pred == static_cast<int>(labels[i])) ? 1 : 0;
    }
  }
  return m;
}

}  // namespace eeval
