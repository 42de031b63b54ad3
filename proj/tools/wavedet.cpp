// wavedet command-line front end.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "wavedet/detector.hpp"
#include "wavedet/harness.hpp"
#include "wavedet/io.hpp"
#include "wavedet/montecarlo.hpp"
#include "wavedet/optimum.hpp"
#include "wavedet/rng.hpp"
#include "wavedet/signal.hpp"
#include "wavedet/svm.hpp"
#include "wavedet/wavelet.hpp"

using namespace wavedet;

namespace {

struct GenArgs {
  std::size_t length = 1024;
  std::string kind = "chirp";
  double snr_db = 0.0;
  double sigma = 1.0;
  std::uint64_t seed = 1;
  double f_start = ChirpSpec{}.f_start;
  double f_end = ChirpSpec{}.f_end;
  std::string out;
};

int run_gen(const GenArgs& a) {
  const NoiseModel model(a.sigma);
  const auto kind = kind_from_name(a.kind);
  std::optional<SampledSignal> sig;
  switch (kind) {
    case SignalKind::pulse_template: sig = make_chirp(a.length, a.f_start, a.f_end); break;
    case SignalKind::noise: sig = make_noise(a.length, model, a.seed); break;
    case SignalKind::observation:
      sig = make_observation(make_chirp(a.length, a.f_start, a.f_end), a.snr_db, model, a.seed);
      break;
  }
  io::write_signal(a.out, *sig);
  return 0;
}

struct DwtArgs {
  std::string in;
  std::string family = "db5";
  int levels = 6;
  std::vector<int> scales;
  std::string out;
};

int run_dwt(const DwtArgs& a) {
  const auto sig = io::read_signal(a.in);
  const auto filters = filters_by_name(a.family);
  auto scales = a.scales;
  if (scales.empty()) {
    for (int i = 1; i <= a.levels; ++i) scales.push_back(i);
  }
  int deepest = 0;
  for (int s : scales) deepest = std::max(deepest, s);
  const auto details = dwt_details(sig, filters, deepest);
  io::write_coefficients(a.out, {concat_scales(details, scales), sig.kind(), sig.snr_db(),
                                 sig.seed()});
  return 0;
}

struct OptimumArgs {
  std::string pulse;
  std::vector<int> scales = {3, 4, 5, 6};
  double pfa = 1e-3;
  std::string family = "db5";
  double sigma = 1.0;
  std::string range = "steady";
  std::string out;
};

DetailCoefficients pulse_details(const SampledSignal& pulse, const std::string& family,
                                 const std::vector<int>& scales) {
  int deepest = 0;
  for (int s : scales) deepest = std::max(deepest, s);
  return concat_scales(dwt_details(pulse, filters_by_name(family), deepest), scales);
}

int run_optimum(const OptimumArgs& a) {
  const auto pulse = io::read_signal(a.pulse);
  const auto d = pulse_details(pulse, a.family, a.scales);
  const auto det = optimum_a(d, a.pfa, NoiseModel(a.sigma), 0.0, range_from_name(a.range));
  io::write_detector(a.out, det, {{"detector", "optimum"}});
  return 0;
}

struct CalibrateArgs {
  std::string a_file;
  double pfa = 1e-3;
  std::string method = "analytic";
  std::size_t trials = 1000000;
  std::uint64_t seed = 1;
  double sigma = 1.0;
  std::string out;
};

int run_calibrate(const CalibrateArgs& a) {
  auto file = io::read_detector(a.a_file);
  const NoiseModel model(a.sigma);
  const auto& base = file.detector;
  const LinearDetector retarget(base.layout(),
                                std::vector<double>(base.coefficients().begin(),
                                                    base.coefficients().end()),
                                base.threshold(), a.pfa, {}, base.range());
  LinearDetector det = a.method == "analytic" ? calibrate_analytic(retarget, model)
                       : a.method == "mc"     ? calibrate_mc(retarget, model, a.trials, a.seed)
                                              : throw CLI::ValidationError("--method",
                                                                           "analytic or mc");
  io::write_detector(a.out.empty() ? a.a_file : a.out, det, file.metadata);
  std::printf("threshold=%.17g\n", det.threshold());
  return 0;
}

struct CurveArgs {
  std::string detector_file;
  std::string pulse;
  double snr_min = -15.0;
  double snr_max = 0.0;
  double snr_step = 1.0;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  double sigma = 1.0;
  bool analytic = false;
  std::string out;
};

int run_curve(const CurveArgs& a) {
  const auto file = io::read_detector(a.detector_file);
  const auto& det = file.detector;
  const NoiseModel model(a.sigma);
  const auto pulse = a.pulse.empty() ? make_chirp(ChirpSpec{det.layout().source_length})
                                     : io::read_signal(a.pulse);
  const auto grid = make_snr_grid(a.snr_min, a.snr_max, a.snr_step);
  const auto id = file.metadata.count("detector") ? file.metadata.at("detector") : "linear";
  DetectionCurve curve;
  if (a.analytic) {
    curve = analytic_curve(det, pulse_details(pulse, det.layout().family, det.layout().scales()),
                           grid, model, id);
  } else {
    curve = sweep_curve(det, pulse, grid, model, a.trials, a.seed, id);
  }
  const auto text = io::format_curve_csv(curve, {"rng=" + std::string(kRngAlgorithm)});
  if (a.out.empty()) {
    std::cout << text;
  } else {
    io::write_atomic(a.out, text);
  }
  return 0;
}

struct TrainArgs {
  std::string pulse;
  std::vector<int> scales = {4};
  std::string family = "db5";
  double sigma = 1.0;
  std::size_t n_pos = 1000;
  std::size_t n_neg = 1000;
  double snr_lo = -15.0;
  double snr_hi = 0.0;
  double c_plus = 1.0;
  double c_minus = 1.0;
  double kkt = 1e-3;
  std::size_t max_passes = 10000;
  double pfa = 1e-3;
  std::size_t calibration_trials = 200000;
  std::uint64_t seed = 1;
  std::string out;
};

int run_train(const TrainArgs& a) {
  const auto pulse = io::read_signal(a.pulse);
  const NoiseModel model(a.sigma);
  const auto ts = build_training_set(pulse, a.scales, filters_by_name(a.family), model, a.n_pos,
                                     a.n_neg, a.snr_lo, a.snr_hi, substream_seed(a.seed, 1));
  const auto svm = train(ts, {a.c_plus, a.c_minus, a.kkt, a.max_passes});
  if (!svm.converged) {
    std::cerr << "warning: SMO stopped at the pass cap before reaching the KKT tolerance\n";
  }
  const auto det =
      calibrate_bias(svm, model, a.pfa, a.calibration_trials, substream_seed(a.seed, 2));
  io::write_detector(a.out, det, io::model_metadata(svm));
  return svm.converged ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet-domain linear detection of a known pulse in white Gaussian noise"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a chirp, noise or observation signal file");
  g->add_option("--length", gen.length)->capture_default_str();
  g->add_option("--kind", gen.kind)->check(CLI::IsMember({"chirp", "noise", "observation"}))
      ->capture_default_str();
  g->add_option("--snr-db", gen.snr_db)->capture_default_str();
  g->add_option("--sigma", gen.sigma)->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--f-start", gen.f_start)->capture_default_str();
  g->add_option("--f-end", gen.f_end)->capture_default_str();
  g->add_option("--out", gen.out)->required();

  DwtArgs dwt;
  auto* d = app.add_subcommand("dwt", "Detail coefficients of a signal file");
  d->add_option("--in", dwt.in)->required()->check(CLI::ExistingFile);
  d->add_option("--family", dwt.family)->capture_default_str();
  d->add_option("--levels", dwt.levels)->capture_default_str();
  d->add_option("--scales", dwt.scales, "Subset of levels to keep, in order")->delimiter(',');
  d->add_option("--out", dwt.out)->required();

  OptimumArgs opt;
  auto* o = app.add_subcommand("optimum", "Theoretical optimum detector for a pulse");
  o->add_option("--pulse", opt.pulse)->required()->check(CLI::ExistingFile);
  o->add_option("--scales", opt.scales)->delimiter(',');
  o->add_option("--pfa", opt.pfa)->capture_default_str();
  o->add_option("--family", opt.family)->capture_default_str();
  o->add_option("--sigma", opt.sigma)->capture_default_str();
  o->add_option("--range", opt.range)->check(CLI::IsMember({"steady", "full"}))
      ->capture_default_str();
  o->add_option("--out", opt.out)->required();

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "Set a detector's threshold for a target Pfa");
  c->add_option("--a-file", cal.a_file)->required()->check(CLI::ExistingFile);
  c->add_option("--pfa", cal.pfa)->capture_default_str();
  c->add_option("--method", cal.method)->check(CLI::IsMember({"analytic", "mc"}))
      ->capture_default_str();
  c->add_option("--trials", cal.trials)->capture_default_str();
  c->add_option("--seed", cal.seed)->capture_default_str();
  c->add_option("--sigma", cal.sigma)->capture_default_str();
  c->add_option("--out", cal.out, "Defaults to rewriting --a-file");

  CurveArgs cur;
  auto* u = app.add_subcommand("curve", "Pd versus SNR for a detector file");
  u->add_option("--detector-file", cur.detector_file)->required()->check(CLI::ExistingFile);
  u->add_option("--pulse", cur.pulse, "Defaults to the standard chirp")
      ->check(CLI::ExistingFile);
  u->add_option("--snr-min", cur.snr_min)->capture_default_str();
  u->add_option("--snr-max", cur.snr_max)->capture_default_str();
  u->add_option("--snr-step", cur.snr_step)->capture_default_str();
  u->add_option("--trials", cur.trials)->capture_default_str();
  u->add_option("--seed", cur.seed)->capture_default_str();
  u->add_option("--sigma", cur.sigma)->capture_default_str();
  u->add_flag("--analytic", cur.analytic, "Closed-form Gaussian Pd instead of Monte Carlo");
  u->add_option("--out", cur.out, "CSV path; stdout if omitted");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train and calibrate a class-weighted linear SVM");
  t->add_option("--pulse", tr.pulse)->required()->check(CLI::ExistingFile);
  t->add_option("--scales", tr.scales)->delimiter(',');
  t->add_option("--family", tr.family)->capture_default_str();
  t->add_option("--sigma", tr.sigma)->capture_default_str();
  t->add_option("--n-pos", tr.n_pos)->capture_default_str();
  t->add_option("--n-neg", tr.n_neg)->capture_default_str();
  t->add_option("--snr-lo", tr.snr_lo)->capture_default_str();
  t->add_option("--snr-hi", tr.snr_hi)->capture_default_str();
  t->add_option("--c-plus", tr.c_plus)->capture_default_str();
  t->add_option("--c-minus", tr.c_minus)->capture_default_str();
  t->add_option("--kkt-tolerance", tr.kkt)->capture_default_str();
  t->add_option("--max-passes", tr.max_passes)->capture_default_str();
  t->add_option("--pfa", tr.pfa)->capture_default_str();
  t->add_option("--calibration-trials", tr.calibration_trials)->capture_default_str();
  t->add_option("--seed", tr.seed)->capture_default_str();
  t->add_option("--out", tr.out)->required();

  std::string config_path;
  std::string out_dir;
  bool quiet = false;
  auto* e = app.add_subcommand("experiment", "Run or re-check the full detection experiment");
  e->require_subcommand(1);
  auto* er = e->add_subcommand("run", "Run every scale set and write the report");
  er->add_option("--config", config_path, "Key-value config; built-in defaults if omitted")
      ->check(CLI::ExistingFile);
  er->add_option("--out-dir", out_dir)->required();
  er->add_flag("--quiet", quiet);
  auto* ec = e->add_subcommand("check", "Re-verify a written report from its files");
  ec->add_option("--out-dir", out_dir)->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) set_worker_threads(threads);

  try {
    if (*g) return run_gen(gen);
    if (*d) return run_dwt(dwt);
    if (*o) return run_optimum(opt);
    if (*c) return run_calibrate(cal);
    if (*u) return run_curve(cur);
    if (*t) return run_train(tr);
    if (*er) {
      const auto cfg = config_path.empty() ? ExperimentConfig{} : read_config(config_path);
      const auto report = run_experiment(cfg, quiet ? nullptr : &std::cerr);
      write_report(report, out_dir);
      for (const auto& chk : report.checks) {
        if (!chk.passed) std::cerr << "FAIL " << chk.name << ": " << chk.detail << "\n";
      }
      return report.valid() ? 0 : 1;
    }
    if (*ec) {
      const auto outcome = check_output_dir(out_dir);
      for (const auto& chk : outcome.checks) {
        std::cout << (chk.passed ? "PASS " : "FAIL ") << chk.name;
        if (!chk.detail.empty()) std::cout << " (" << chk.detail << ")";
        std::cout << "\n";
      }
      return outcome.passed() ? 0 : 1;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
