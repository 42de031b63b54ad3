#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <vector>

#include "wavedet/detector.hpp"
#include "wavedet/gaussian.hpp"
#include "wavedet/harness.hpp"
#include "wavedet/io.hpp"
#include "wavedet/optimum.hpp"
#include "wavedet/rng.hpp"
#include "wavedet/signal.hpp"
#include "wavedet/svm.hpp"
#include "wavedet/wavelet.hpp"

namespace py = pybind11;
using namespace wavedet;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <class Range>
Array to_array(const Range& values) {
  const std::vector<double> copy(std::begin(values), std::end(values));
  return Array(static_cast<py::ssize_t>(copy.size()), copy.data());
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

DetailCoefficients details_of(const SampledSignal& x, const std::string& family,
                              const std::vector<int>& scales) {
  int deepest = 0;
  for (int s : scales) deepest = std::max(deepest, s);
  return concat_scales(dwt_details(x, filters_by_name(family), deepest), scales);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wavelet-domain linear detector core";
  m.attr("__version__") = "0.1.0";
  m.attr("RNG_ALGORITHM") = std::string(kRngAlgorithm);

  py::enum_<SignalKind>(m, "SignalKind")
      .value("noise", SignalKind::noise)
      .value("observation", SignalKind::observation)
      .value("pulse_template", SignalKind::pulse_template);

  py::enum_<SumRange>(m, "SumRange").value("steady", SumRange::steady).value("full", SumRange::full);

  py::class_<NoiseModel>(m, "NoiseModel")
      .def(py::init<double>(), py::arg("sigma") = 1.0)
      .def_property_readonly("sigma", &NoiseModel::sigma);

  py::class_<SampledSignal>(m, "SampledSignal")
      .def(py::init([](const Array& samples, SignalKind kind, std::optional<double> snr_db,
                       std::optional<std::uint64_t> seed) {
             return SampledSignal(to_vector(samples), kind, snr_db, seed);
           }),
           py::arg("samples"), py::arg("kind"), py::arg("snr_db") = py::none(),
           py::arg("seed") = py::none())
      .def_property_readonly("samples", [](const SampledSignal& s) { return to_array(s.samples()); })
      .def_property_readonly("kind", &SampledSignal::kind)
      .def_property_readonly("snr_db", &SampledSignal::snr_db)
      .def_property_readonly("seed", &SampledSignal::seed)
      .def("__len__", &SampledSignal::size);

  m.def("make_chirp", py::overload_cast<std::size_t, double, double>(&make_chirp),
        py::arg("length") = ChirpSpec{}.length, py::arg("f_start") = ChirpSpec{}.f_start,
        py::arg("f_end") = ChirpSpec{}.f_end);
  m.def("make_noise", &make_noise, py::arg("length"), py::arg("model"), py::arg("seed"));
  m.def("make_observation", &make_observation, py::arg("pulse"), py::arg("snr_db"),
        py::arg("model"), py::arg("seed"));
  m.def("pulse_amplitude", &pulse_amplitude, py::arg("snr_db"), py::arg("model"));
  m.def("read_signal", &io::read_signal, py::arg("path"));
  m.def("write_signal", &io::write_signal, py::arg("path"), py::arg("signal"));

  m.def("q_function", &q_function, py::arg("x"));
  m.def("q_inverse", &q_inverse, py::arg("p"));

  m.def(
      "lowpass", [](const std::string& family) { return to_array(filters_by_name(family).lowpass()); },
      py::arg("family"));
  m.def(
      "highpass",
      [](const std::string& family) { return to_array(filters_by_name(family).highpass()); },
      py::arg("family"));
  m.def(
      "dwt",
      [](const Array& x, const std::string& family, int levels) {
        const auto samples = to_vector(x);
        const auto dec = decompose(samples, filters_by_name(family), levels);
        py::list details;
        for (const auto& d : dec.details) details.append(to_array(d.values));
        return py::make_tuple(details, to_array(dec.approximation));
      },
      py::arg("x"), py::arg("family") = "db5", py::arg("levels") = 6,
      "Detail vectors of levels 1..levels and the final approximation.");
  m.def(
      "scale_details",
      [](const SampledSignal& x, const std::vector<int>& scales, const std::string& family) {
        return to_array(details_of(x, family, scales).values);
      },
      py::arg("signal"), py::arg("scales"), py::arg("family") = "db5",
      "d_B: the requested scales' detail vectors concatenated.");

  py::class_<LinearDetector>(m, "LinearDetector")
      .def_property_readonly("coefficients",
                             [](const LinearDetector& d) { return to_array(d.coefficients()); })
      .def_property_readonly("threshold", &LinearDetector::threshold)
      .def_property_readonly("target_pfa", &LinearDetector::target_pfa)
      .def_property_readonly("scales", [](const LinearDetector& d) { return d.layout().scales(); })
      .def_property_readonly("family", [](const LinearDetector& d) { return d.layout().family; })
      .def_property_readonly("source_length",
                             [](const LinearDetector& d) { return d.layout().source_length; })
      .def("score", [](const LinearDetector& d, const Array& v) { return d.score(to_vector(v)); })
      .def("detect", [](const LinearDetector& d, const Array& v) { return d.detect(to_vector(v)); });

  m.def(
      "optimum_detector",
      [](const SampledSignal& pulse, const std::vector<int>& scales, double pfa,
         const std::string& family, const NoiseModel& model) {
        return optimum_a(details_of(pulse, family, scales), pfa, model, 0.0);
      },
      py::arg("pulse"), py::arg("scales"), py::arg("pfa") = 1e-3, py::arg("family") = "db5",
      py::arg("model") = NoiseModel(1.0));
  m.def(
      "calibrate_mc",
      [](const LinearDetector& det, const NoiseModel& model, std::size_t trials,
         std::uint64_t seed) {
        py::gil_scoped_release release;
        return calibrate_mc(det, model, trials, seed);
      },
      py::arg("detector"), py::arg("model"), py::arg("trials"), py::arg("seed"));
  m.def(
      "analytic_pd",
      [](const LinearDetector& det, const SampledSignal& pulse, double snr_db,
         const NoiseModel& model) {
        const auto d = details_of(pulse, det.layout().family, det.layout().scales());
        return analytic_stats(d, det.coefficients(), snr_db, model, det.threshold(), det.range()).pd;
      },
      py::arg("detector"), py::arg("pulse"), py::arg("snr_db"), py::arg("model") = NoiseModel(1.0));
  m.def(
      "estimate_pd",
      [](const LinearDetector& det, const SampledSignal& pulse, double snr_db,
         const NoiseModel& model, std::size_t trials, std::uint64_t seed) {
        py::gil_scoped_release release;
        const auto est = estimate_pd(det, pulse, snr_db, model, trials, seed);
        return std::make_pair(est.pd, est.std_error);
      },
      py::arg("detector"), py::arg("pulse"), py::arg("snr_db"), py::arg("model"),
      py::arg("trials"), py::arg("seed"), "(pd, stderr) from Monte Carlo.");
  m.def("read_detector", [](const std::filesystem::path& p) { return io::read_detector(p).detector; },
        py::arg("path"));
  m.def(
      "write_detector",
      [](const std::filesystem::path& p, const LinearDetector& det) { io::write_detector(p, det); },
      py::arg("path"), py::arg("detector"));

  py::class_<SvmModel>(m, "SvmModel")
      .def_property_readonly("w", [](const SvmModel& s) { return to_array(s.w); })
      .def_property_readonly("alphas", [](const SvmModel& s) { return to_array(s.alphas); })
      .def_readonly("b", &SvmModel::b)
      .def_readonly("converged", &SvmModel::converged)
      .def_readonly("iterations", &SvmModel::iterations)
      .def_readonly("support_count", &SvmModel::support_count)
      .def_readonly("dual_objective", &SvmModel::dual_objective);

  m.def(
      "train_svm",
      [](const Array& patterns, const std::vector<int>& labels, double c_plus, double c_minus,
         double kkt_tolerance, std::size_t max_passes) {
        if (patterns.ndim() != 2) throw py::value_error("patterns must be a 2-D array");
        const auto n = static_cast<std::size_t>(patterns.shape(0));
        const auto dim = static_cast<std::size_t>(patterns.shape(1));
        if (n == 0 || dim == 0) throw py::value_error("patterns must be non-empty");
        TrainingSet ts;
        // A single segment of `dim` coefficients summed in full.
        ts.layout = {"raw", dim, {ScaleSegment{1, 0, dim, 0}}};
        ts.range = SumRange::full;
        ts.dimension = dim;
        ts.patterns.assign(patterns.data(), patterns.data() + n * dim);
        ts.labels = labels;
        ts.snr_db.assign(n, 0.0);
        ts.validate();
        py::gil_scoped_release release;
        return train(ts, {c_plus, c_minus, kkt_tolerance, max_passes});
      },
      py::arg("patterns"), py::arg("labels"), py::arg("c_plus") = 1.0, py::arg("c_minus") = 1.0,
      py::arg("kkt_tolerance") = 1e-3, py::arg("max_passes") = 10000,
      "Class-weighted linear SVM on raw patterns (rows) with labels +-1.");

  m.def(
      "run_experiment",
      [](const std::string& config_text, const std::filesystem::path& out_dir) {
        const auto cfg = parse_config(config_text);
        ExperimentReport report = [&] {
          py::gil_scoped_release release;
          return run_experiment(cfg);
        }();
        write_report(report, out_dir);
        return report.valid();
      },
      py::arg("config_text"), py::arg("out_dir"),
      "Runs the experiment, writes the report and returns whether every self-check passed.");
  m.def(
      "check_output_dir",
      [](const std::filesystem::path& dir) {
        const auto outcome = check_output_dir(dir);
        py::list rows;
        for (const auto& c : outcome.checks) rows.append(py::make_tuple(c.name, c.passed, c.detail));
        return py::make_tuple(outcome.passed(), rows);
      },
      py::arg("out_dir"));
}
