#include "eeval/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eeval/transforms.hpp"

namespace eeval {

namespace {

const char* kSplitOrder[] = {"calib", "val", "test"};

void fill_split(Split& split, const SynthConfig& cfg, std::size_t n,
                std::uint64_t stream_seed) {
  SplitMix64 rng(stream_seed);
  const int num_exits = cfg.num_exits;
  const int num_classes = cfg.num_classes;
  const std::vector<double> skill = cfg.effective_skill();

  // Base pass rates before flip noise, so the marginal accuracy still hits
  // the target: P(correct) = p_flip + (1 - 2 p_flip) * P(d < s').
  std::vector<double> pass_rate(num_exits);
  pass_rate[0] = skill[0];
  for (int j = 1; j < num_exits; ++j) {
    pass_rate[j] = std::clamp(
        (skill[j] - kSynthFlipProbability) / (1.0 - 2.0 * kSynthFlipProbability),
        0.0, 1.0);
  }

  split.logits.num_samples = n;
  split.logits.num_exits = num_exits;
  split.logits.num_classes = num_classes;
  split.logits.values.resize(n * num_exits * num_classes);
  split.labels.resize(n);

  std::vector<double> row(num_classes);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = rng.below(num_classes);
    split.labels[i] = static_cast<std::uint32_t>(label);
    const double difficulty = rng.unit();

    for (int j = 0; j < num_exits; ++j) {
      bool intended = difficulty < pass_rate[j];
      if (j > 0 && rng.unit() < kSynthFlipProbability) {
        intended = !intended;
      }

      int boosted = label;
      if (!intended) {
        const int wrong = rng.below(num_classes - 1);
        boosted = wrong >= label ? wrong + 1 : wrong;
      }

      for (int k = 0; k < num_classes; ++k) row[k] = rng.gaussian();
      row[boosted] += cfg.signal_sharpness * (1.0 - difficulty);

      // The noise draw may push another class above the intended winner;
      // swapping keeps the marginal logit distribution and makes realized
      // correctness match the d < s' rule exactly.
      int top = 0;
      for (int k = 1; k < num_classes; ++k) {
        if (row[k] > row[top]) top = k;
      }
      if (top != boosted) std::swap(row[top], row[boosted]);

      float* out = split.logits.values.data() +
                   (i * num_exits + j) * num_classes;
      for (int k = 0; k < num_classes; ++k) {
        out[k] = static_cast<float>(row[k]);
      }
    }
  }
}

// The raw construction is not calibrated on its own (shallow heads come out
// overconfident, deep heads underconfident), so each head is normalized by
// the temperature fitted on its own calib split. After this step a fit on
// the emitted logits recovers distortion_temperature on every head. The
// factor is rounded so the emitted bytes do not inherit last-ulp libm
// variance from the fit.
std::vector<double> head_scales(const Split& calib, double distortion) {
  const std::vector<double> fitted =
      fit_temperatures(calib.logits, calib.labels);
  std::vector<double> scales(fitted.size());
  for (std::size_t j = 0; j < fitted.size(); ++j) {
    const double rounded = std::round(fitted[j] * 1e4) / 1e4;
    scales[j] = distortion / rounded;
  }
  return scales;
}

void apply_head_scales(Split& split, const std::vector<double>& scales) {
  const int num_exits = split.logits.num_exits;
  const int num_classes = split.logits.num_classes;
  for (std::size_t i = 0; i < split.logits.num_samples; ++i) {
    for (int j = 0; j < num_exits; ++j) {
      float* row =
          split.logits.values.data() + (i * num_exits + j) * num_classes;
      for (int k = 0; k < num_classes; ++k) {
        row[k] = static_cast<float>(static_cast<double>(row[k]) * scales[j]);
      }
    }
  }
}

}  // namespace

std::vector<double> SynthConfig::effective_skill() const {
  if (!head_skill.empty()) return head_skill;
  std::vector<double> skill(num_exits);
  for (int j = 0; j < num_exits; ++j) {
    skill[j] = 0.5 + 0.4 * j / (num_exits - 1);
  }
  return skill;
}

void SynthConfig::validate() const {
  if (num_exits < 2) {
    throw InvalidConfigError("synth: num_exits must be >= 2, got " +
                             std::to_string(num_exits));
  }
  if (num_classes < 2) {
    throw InvalidConfigError("synth: num_classes must be >= 2, got " +
                             std::to_string(num_classes));
  }
  if (num_calib < 1 || num_val < 1 || num_test < 1) {
    throw InvalidConfigError("synth: every split needs at least one sample");
  }
  if (!(signal_sharpness > 0.0) || !std::isfinite(signal_sharpness)) {
    throw InvalidConfigError("synth: signal_sharpness must be positive");
  }
  if (!(distortion_temperature > 0.0) ||
      !std::isfinite(distortion_temperature)) {
    throw InvalidConfigError("synth: distortion_temperature must be positive");
  }
  if (!head_skill.empty()) {
    if (head_skill.size() != static_cast<std::size_t>(num_exits)) {
      throw InvalidConfigError("synth: head_skill needs one entry per exit (" +
                               std::to_string(num_exits) + "), got " +
                               std::to_string(head_skill.size()));
    }
    const double floor = 1.0 / num_classes;
    for (std::size_t j = 0; j < head_skill.size(); ++j) {
      if (!(head_skill[j] > floor) || !(head_skill[j] < 1.0)) {
        throw InvalidConfigError("synth: head_skill entries must lie in (1/C, 1)");
      }
      if (j > 0 && !(head_skill[j] > head_skill[j - 1])) {
        throw InvalidConfigError("synth: head_skill must be strictly increasing");
      }
    }
  }
}

MultiExitDataset generate(const SynthConfig& config) {
  config.validate();

  MultiExitDataset ds;
  ds.manifest.num_classes = config.num_classes;
  ds.manifest.num_exits = config.num_exits;
  ds.manifest.exit_costs.resize(config.num_exits);
  for (int j = 0; j < config.num_exits; ++j) {
    ds.manifest.exit_costs[j] = j + 1;
  }

  const std::size_t sizes[] = {config.num_calib, config.num_val,
                               config.num_test};
  for (int s = 0; s < 3; ++s) {
    const std::string name = kSplitOrder[s];
    SplitDescriptor desc;
    desc.num_samples = sizes[s];
    desc.logits_file = name + "_logits.bin";
    desc.labels_file = name + "_labels.bin";
    ds.manifest.splits[name] = desc;

    Split split;
    const std::uint64_t stream_seed =
        config.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(s + 1);
    fill_split(split, config, sizes[s], stream_seed);
    ds.splits[name] = std::move(split);
  }

  const std::vector<double> scales =
      head_scales(ds.splits["calib"], config.distortion_temperature);
  for (auto& [name, split] : ds.splits) {
    apply_head_scales(split, scales);
  }
  return ds;
}

}  // namespace eeval
