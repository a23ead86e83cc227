#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "eeval/dataset.hpp"

namespace testsupport {

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("eeval_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

// Runs the eeval binary (path from EEVAL_BIN) with the given arguments.
inline CliResult run_cli(const std::string& args) {
  const char* bin = std::getenv("EEVAL_BIN");
  if (!bin) {
    throw std::runtime_error("EEVAL_BIN is not set");
  }
  const std::string cmd = std::string(bin) + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) {
    throw std::runtime_error("popen failed for: " + cmd);
  }
  CliResult result;
  char buf[4096];
  while (true) {
    const std::size_t got = std::fread(buf, 1, sizeof(buf), pipe);
    if (got > 0) result.output.append(buf, got);
    if (got < sizeof(buf)) break;
  }
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

// Dataset with explicit logits rows: logits[sample][exit][class].
inline eeval::MultiExitDataset make_dataset(
    const std::vector<std::vector<std::vector<float>>>& logits,
    const std::vector<std::uint32_t>& labels,
    const std::vector<double>& costs) {
  eeval::MultiExitDataset ds;
  const std::size_t n = logits.size();
  const int num_exits = static_cast<int>(logits[0].size());
  const int num_classes = static_cast<int>(logits[0][0].size());
  ds.manifest.num_classes = num_classes;
  ds.manifest.num_exits = num_exits;
  ds.manifest.exit_costs = costs;

  eeval::Split split;
  split.logits.num_samples = n;
  split.logits.num_exits = num_exits;
  split.logits.num_classes = num_classes;
  for (const auto& sample : logits) {
    for (const auto& exit : sample) {
      for (float v : exit) split.logits.values.push_back(v);
    }
  }
  split.labels = labels;

  eeval::SplitDescriptor desc;
  desc.num_samples = n;
  desc.logits_file = "test_logits.bin";
  desc.labels_file = "test_labels.bin";
  ds.manifest.splits["test"] = desc;
  ds.splits["test"] = std::move(split);
  return ds;
}

}  // namespace testsupport
