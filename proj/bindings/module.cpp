// Python bindings for the eeval core. Tensors cross the boundary as numpy
// arrays; shapes follow the on-disk layout [N, J, C].

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "eeval/budget.hpp"
#include "eeval/calibration.hpp"
#include "eeval/dataset.hpp"
#include "eeval/failure.hpp"
#include "eeval/simulate.hpp"
#include "eeval/synth.hpp"
#include "eeval/transforms.hpp"
#include "eeval/version.hpp"

namespace py = pybind11;
using namespace eeval;

namespace {

LogitTensor to_logits(const py::array& arr) {
  auto a = py::array_t<float, py::array::c_style | py::array::forcecast>(arr);
  if (a.ndim() != 3) {
    throw ShapeMismatchError("logits must have shape [N, J, C]");
  }
  LogitTensor t;
  t.num_samples = static_cast<std::size_t>(a.shape(0));
  t.num_exits = static_cast<int>(a.shape(1));
  t.num_classes = static_cast<int>(a.shape(2));
  t.values.assign(a.data(), a.data() + a.size());
  return t;
}

LabelVector to_labels(const py::array& arr) {
  auto a =
      py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>(
          arr);
  if (a.ndim() != 1) {
    throw ShapeMismatchError("labels must be one-dimensional");
  }
  return LabelVector(a.data(), a.data() + a.size());
}

ConfidenceTable to_conf(const py::array& arr) {
  auto a = py::array_t<double, py::array::c_style | py::array::forcecast>(arr);
  if (a.ndim() != 2) {
    throw ShapeMismatchError("confidences must have shape [N, J]");
  }
  ConfidenceTable t;
  t.num_samples = static_cast<std::size_t>(a.shape(0));
  t.num_exits = static_cast<int>(a.shape(1));
  t.conf.assign(a.data(), a.data() + a.size());
  return t;
}

CorrectnessMatrix to_correct(const py::array& arr) {
  auto a =
      py::array_t<bool, py::array::c_style | py::array::forcecast>(arr);
  if (a.ndim() != 2) {
    throw ShapeMismatchError("correctness must have shape [N, J]");
  }
  CorrectnessMatrix m;
  m.num_samples = static_cast<std::size_t>(a.shape(0));
  m.num_exits = static_cast<int>(a.shape(1));
  m.y.resize(static_cast<std::size_t>(a.size()));
  for (py::ssize_t i = 0; i < a.size(); ++i) {
    m.y[i] = a.data()[i] ? 1 : 0;
  }
  return m;
}

std::vector<std::uint8_t> to_u8(const py::array& arr) {
  auto a = py::array_t<bool, py::array::c_style | py::array::forcecast>(arr);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(a.size()));
  for (py::ssize_t i = 0; i < a.size(); ++i) out[i] = a.data()[i] ? 1 : 0;
  return out;
}

TransformChain make_chain(const std::optional<std::vector<double>>& temps,
                          double temp_mult, std::optional<double> alpha) {
  TransformChain chain;
  if (temps) chain.base_temperatures = *temps;
  chain.temperature_multiplier = temp_mult;
  chain.alpha = alpha;
  return chain;
}

py::array logits_array(const LogitTensor& t) {
  py::array_t<float> out({t.num_samples,
                          static_cast<std::size_t>(t.num_exits),
                          static_cast<std::size_t>(t.num_classes)});
  std::copy(t.values.begin(), t.values.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_eeval, m) {
  m.doc() = "Early-exit classifier evaluation core";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "EevalError", PyExc_RuntimeError);

  py::class_<MultiExitDataset>(m, "Dataset")
      .def_property_readonly(
          "num_classes",
          [](const MultiExitDataset& d) { return d.manifest.num_classes; })
      .def_property_readonly(
          "num_exits",
          [](const MultiExitDataset& d) { return d.manifest.num_exits; })
      .def_property_readonly(
          "exit_costs",
          [](const MultiExitDataset& d) { return d.manifest.exit_costs; })
      .def_property_readonly("split_names",
                             [](const MultiExitDataset& d) {
                               std::vector<std::string> names;
                               for (const auto& [name, split] : d.splits) {
                                 names.push_back(name);
                               }
                               return names;
                             })
      .def("num_samples",
           [](const MultiExitDataset& d, const std::string& split) {
             return d.split(split).logits.num_samples;
           })
      .def("logits",
           [](const MultiExitDataset& d, const std::string& split) {
             return logits_array(d.split(split).logits);
           })
      .def("labels", [](const MultiExitDataset& d, const std::string& split) {
        const LabelVector& l = d.split(split).labels;
        py::array_t<std::uint32_t> out(l.size());
        std::copy(l.begin(), l.end(), out.mutable_data());
        return out;
      });

  m.def(
      "generate",
      [](std::uint64_t seed, std::size_t num_calib, std::size_t num_val,
         std::size_t num_test, int num_exits, int num_classes,
         const std::optional<std::vector<double>>& head_skill,
         double signal_sharpness, double distortion_temperature) {
        SynthConfig cfg;
        cfg.seed = seed;
        cfg.num_calib = num_calib;
        cfg.num_val = num_val;
        cfg.num_test = num_test;
        cfg.num_exits = num_exits;
        cfg.num_classes = num_classes;
        if (head_skill) cfg.head_skill = *head_skill;
        cfg.signal_sharpness = signal_sharpness;
        cfg.distortion_temperature = distortion_temperature;
        return generate(cfg);
      },
      py::arg("seed"), py::arg("num_calib") = 2000, py::arg("num_val") = 5000,
      py::arg("num_test") = 10000, py::arg("num_exits") = 5,
      py::arg("num_classes") = 10, py::arg("head_skill") = std::nullopt,
      py::arg("signal_sharpness") = 6.0,
      py::arg("distortion_temperature") = 1.0);

  m.def("load_dataset", &load_dataset, py::arg("path"));
  m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("path"));

  m.def(
      "softmax",
      [](const std::vector<double>& row, double temperature) {
        return softmax(std::span<const double>(row), temperature);
      },
      py::arg("logit_row"), py::arg("temperature") = 1.0);

  m.def("rank_preserving_transform", &rank_preserving_transform,
        py::arg("confidence"), py::arg("alpha"), py::arg("num_classes"));

  m.def(
      "confidence_table",
      [](const py::array& logits,
         const std::optional<std::vector<double>>& temperatures,
         double temp_mult, std::optional<double> alpha) {
        const LogitTensor t = to_logits(logits);
        const ConfidenceTable c =
            confidence_table(t, make_chain(temperatures, temp_mult, alpha));
        py::array_t<double> out(
            {c.num_samples, static_cast<std::size_t>(c.num_exits)});
        std::copy(c.conf.begin(), c.conf.end(), out.mutable_data());
        return out;
      },
      py::arg("logits"), py::arg("temperatures") = std::nullopt,
      py::arg("temp_mult") = 1.0, py::arg("alpha") = std::nullopt);

  m.def(
      "correctness",
      [](const py::array& logits, const py::array& labels) {
        const CorrectnessMatrix c =
            correctness(to_logits(logits), to_labels(labels));
        py::array_t<bool> out(
            {c.num_samples, static_cast<std::size_t>(c.num_exits)});
        for (std::size_t i = 0; i < c.y.size(); ++i) {
          out.mutable_data()[i] = c.y[i] != 0;
        }
        return out;
      },
      py::arg("logits"), py::arg("labels"));

  m.def(
      "fit_temperatures",
      [](const py::array& logits, const py::array& labels) {
        return fit_temperatures(to_logits(logits), to_labels(labels));
      },
      py::arg("logits"), py::arg("labels"));

  m.def(
      "ece",
      [](const py::array& conf, const py::array& correct, int bins) {
        auto c = py::array_t<double, py::array::c_style | py::array::forcecast>(
            conf);
        const auto y = to_u8(correct);
        return ece(reliability_bins(
            std::span<const double>(c.data(),
                                    static_cast<std::size_t>(c.size())),
            y, bins));
      },
      py::arg("conf"), py::arg("correct"), py::arg("bins") = kDefaultEceBins);

  m.def(
      "nll",
      [](const std::vector<std::vector<double>>& probs,
         const py::array& labels) {
        const LabelVector l = to_labels(labels);
        return nll(probs, l);
      },
      py::arg("probabilities"), py::arg("labels"));

  m.def(
      "auroc",
      [](const py::array& scores, const py::array& labels) {
        auto s = py::array_t<double, py::array::c_style | py::array::forcecast>(
            scores);
        const auto y = to_u8(labels);
        return auroc(std::span<const double>(
                         s.data(), static_cast<std::size_t>(s.size())),
                     y);
      },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "eefp_labels",
      [](const py::array& correct) {
        const EefpLabelMatrix l = eefp_labels(to_correct(correct));
        py::array_t<bool> out(
            {l.num_samples, static_cast<std::size_t>(l.num_heads)});
        for (std::size_t i = 0; i < l.ybar.size(); ++i) {
          out.mutable_data()[i] = l.ybar[i] != 0;
        }
        return out;
      },
      py::arg("correct"));

  m.def(
      "eefp_scores",
      [](const py::array& conf, const py::array& correct) {
        return eefp_scores(to_conf(conf), to_correct(correct));
      },
      py::arg("conf"), py::arg("correct"));

  m.def(
      "eef1",
      [](const py::array& conf, const py::array& correct,
         const std::vector<double>& taus) {
        ThresholdVector t;
        t.taus = taus;
        const Eef1Result r = eef1(to_conf(conf), to_correct(correct), t);
        py::dict out;
        out["per_exit"] = r.per_exit;
        out["mean"] = r.mean;
        out["defined_count"] = r.defined_count;
        return out;
      },
      py::arg("conf"), py::arg("correct"), py::arg("thresholds"));

  m.def(
      "exit_shares",
      [](double q, int num_exits) { return exit_shares(q, num_exits).shares; },
      py::arg("q"), py::arg("num_exits"));

  m.def(
      "derive_thresholds",
      [](const py::array& val_conf, double q) {
        const ConfidenceTable c = to_conf(val_conf);
        return derive_thresholds(c, exit_shares(q, c.num_exits)).taus;
      },
      py::arg("val_conf"), py::arg("q"));

  m.def("make_q_grid", &make_q_grid, py::arg("q_min") = kDefaultQMin,
        py::arg("q_max") = kDefaultQMax, py::arg("points") = kDefaultQPoints);

  m.def(
      "simulate",
      [](const py::array& conf, const py::array& correct,
         const std::vector<double>& taus, const std::vector<double>& costs) {
        ThresholdVector t;
        t.taus = taus;
        const SimulationResult r =
            simulate(to_conf(conf), to_correct(correct), t, costs);
        py::dict out;
        out["accuracy"] = r.accuracy;
        out["mean_cost"] = r.mean_cost;
        out["exit_histogram"] = r.exit_histogram;
        out["per_sample_exit"] = r.per_sample_exit;
        return out;
      },
      py::arg("conf"), py::arg("correct"), py::arg("thresholds"),
      py::arg("exit_costs"));
}
