#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "eeval/errors.hpp"

namespace eeval {

struct SplitDescriptor {
  std::size_t num_samples = 0;
  std::string logits_file;
  std::string labels_file;
};

// Parsed manifest.json. Costs are cumulative compute up to and including
// each exit, strictly increasing.
struct DatasetManifest {
  int num_classes = 0;
  int num_exits = 0;
  std::vector<double> exit_costs;
  std::map<std::string, SplitDescriptor> splits;
};

// Raw pre-softmax scores, shape [N, J, C], stored exactly as on disk
// (little-endian float32) so save/load round-trips are bit-exact.
struct LogitTensor {
  std::size_t num_samples = 0;
  int num_exits = 0;
  int num_classes = 0;
  std::vector<float> values;  // sample-major, then exit, then class

  std::span<const float> row(std::size_t sample, int exit) const {
    const std::size_t offset =
        (sample * static_cast<std::size_t>(num_exits) + exit) * num_classes;
    return {values.data() + offset, static_cast<std::size_t>(num_classes)};
  }
};

using LabelVector = std::vector<std::uint32_t>;

// y[i,j] = true iff exit j's argmax class equals the label of sample i.
// Ties break toward the lowest class index.
struct CorrectnessMatrix {
  std::size_t num_samples = 0;
  int num_exits = 0;
  std::vector<std::uint8_t> y;

  bool at(std::size_t sample, int exit) const {
    return y[sample * num_exits + exit] != 0;
  }
};

struct Split {
  LogitTensor logits;
  LabelVector labels;
};

struct MultiExitDataset {
  DatasetManifest manifest;
  std::map<std::string, Split> splits;

  bool has_split(const std::string& name) const {
    return splits.count(name) != 0;
  }
  const Split& split(const std::string& name) const;
};

// Index of the largest value; ties resolved to the lowest index.
int argmax_lowest(std::span<const float> row);

MultiExitDataset load_dataset(const std::filesystem::path& root);
void save_dataset(const MultiExitDataset& dataset,
                  const std::filesystem::path& root);

CorrectnessMatrix correctness(const LogitTensor& logits,
                              const LabelVector& labels);

}  // namespace eeval
