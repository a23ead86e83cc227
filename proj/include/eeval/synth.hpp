#pragma once

#include <cstdint>
#include <vector>

#include "eeval/dataset.hpp"

namespace eeval {

// SplitMix64 stream (Steele, Lea & Flood). Fixed here so generated datasets
// are byte-identical on every platform:
//   state += 0x9E3779B97F4A7C15
//   z = state; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9
//   z = (z ^ z>>27) * 0x94D049BB133111EB; output z ^ z>>31
// unit() maps the top 53 bits to [0, 1); gaussian() sums 12 uniforms and
// subtracts 6 (unit variance, no libm, so results carry no libm variance).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform index in [0, n).
  int below(int n) {
    const int v = static_cast<int>(unit() * n);
    return v < n ? v : n - 1;
  }

  double gaussian() {
    double sum = 0.0;
    for (int i = 0; i < 12; ++i) sum += unit();
    return sum - 6.0;
  }

 private:
  std::uint64_t state_;
};

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t num_calib = 2000;
  std::size_t num_val = 5000;
  std::size_t num_test = 10000;
  int num_exits = 5;
  int num_classes = 10;
  // Target marginal accuracy per head, strictly increasing in (1/C, 1).
  // Empty means evenly spaced from 0.5 to 0.9.
  std::vector<double> head_skill;
  double signal_sharpness = 6.0;
  double distortion_temperature = 1.0;

  std::vector<double> effective_skill() const;
  void validate() const;
};

// Probability that a head deeper than the first flips its nested
// correctness bit.
constexpr double kSynthFlipProbability = 0.05;

MultiExitDataset generate(const SynthConfig& config);

}  // namespace eeval
