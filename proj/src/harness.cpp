#include "wavedet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "wavedet/gaussian.hpp"
#include "wavedet/io.hpp"
#include "wavedet/optimum.hpp"
#include "wavedet/rng.hpp"

namespace wavedet {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string format_scale_sets(const std::vector<std::vector<int>>& sets) {
  std::string out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (i) out += ';';
    out += io::join_ints(sets[i]);
  }
  return out;
}

std::vector<std::vector<int>> parse_scale_sets(std::string_view text) {
  std::vector<std::vector<int>> sets;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(';', start);
    const auto part = trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (!part.empty()) sets.push_back(io::parse_int_list(part));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return sets;
}

std::string format_c_grid(const std::vector<CPair>& grid) {
  std::string out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) out += ',';
    out += io::format_double(grid[i].first) + ":" + io::format_double(grid[i].second);
  }
  return out;
}

std::vector<CPair> parse_c_grid(std::string_view text) {
  std::vector<CPair> grid;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(',', start);
    const auto part = trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (!part.empty()) {
      const auto colon = part.find(':');
      if (colon == std::string_view::npos) throw std::invalid_argument("C grid entries are c_plus:c_minus");
      const auto values = io::parse_double_list(std::string(part.substr(0, colon)) + "," +
                                                std::string(part.substr(colon + 1)));
      grid.emplace_back(values[0], values[1]);
    }
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return grid;
}

std::string curve_file(const std::string& label, std::string_view kind) {
  return label + "_" + std::string(kind) + ".csv";
}

double quantile_stderr(double pfa, std::size_t trials) {
  return std::sqrt(pfa * (1.0 - pfa) / static_cast<double>(trials)) / normal_pdf(q_inverse(pfa));
}

// True when multi-scale set `big` contains every scale of `small`.
bool contains_all(const std::vector<int>& big, const std::vector<int>& small) {
  return std::all_of(small.begin(), small.end(), [&](int s) {
    return std::find(big.begin(), big.end(), s) != big.end();
  });
}

struct CurveSpec {
  Statistic score;
  double threshold = 0.0;
  std::string id;
};

// Monte Carlo Pd curves of several detectors on shared observations; point p
// draws from substream_seed(seed, p), as sweep_curve does.
std::vector<DetectionCurve> paired_curves(const CoefficientLayout& layout,
                                          const SampledSignal& pulse,
                                          std::span<const double> grid, const NoiseModel& model,
                                          std::size_t trials, std::uint64_t seed,
                                          const std::vector<CurveSpec>& specs, double pfa) {
  std::vector<DetectionCurve> curves;
  std::vector<Statistic> stats;
  for (const auto& spec : specs) {
    curves.push_back({pfa, {}, spec.id, trials, seed});
    stats.push_back(spec.score);
  }
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto scores =
        evaluate_observations(layout, pulse, grid[p], model, trials, substream_seed(seed, p), stats);
    for (std::size_t k = 0; k < specs.size(); ++k) {
      const double pd = exceed_fraction(scores[k], specs[k].threshold);
      curves[k].points.push_back({grid[p], pd, binomial_stderr(pd, trials)});
    }
  }
  return curves;
}

std::vector<SelfCheck> curve_checks(const ExperimentConfig& cfg,
                                    const std::vector<std::string>& labels,
                                    const std::vector<DetectionCurve>& theory,
                                    const std::vector<DetectionCurve>& svm,
                                    const std::vector<DetectionCurve>& baseline,
                                    const std::vector<DetectionCurve>& optimum_mc,
                                    const std::vector<std::size_t>& svm_calibration_trials) {
  std::vector<SelfCheck> checks;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    // Ceiling: the SVM curve may not beat the theoretical limit beyond noise.
    SelfCheck ceiling{labels[s] + ": svm below theoretical limit", true, "worst z = "};
    double worst = -1e300;
    for (std::size_t p = 0; p < theory[s].points.size(); ++p) {
      const double pd_t = theory[s].points[p].pd;
      const double pd_s = svm[s].points[p].pd;
      // Null-hypothesis spread (pd_svm == pd_theory), so saturated estimates keep a scale.
      const double se = std::hypot(binomial_stderr(pd_t, svm[s].trials_per_point),
                                   calibration_pd_stderr(pd_t, cfg.pfa, svm_calibration_trials[s]));
      const double excess = pd_s - pd_t;
      const double z = se > 0.0 ? excess / se : (excess > 0.0 ? 1e300 : 0.0);
      worst = std::max(worst, z);
      if (excess > 3.0 * se + 1e-12) ceiling.passed = false;
    }
    ceiling.detail += io::format_double(worst);
    checks.push_back(ceiling);

    // At equal Monte Carlo Pfa the optimum linear detector beats the baseline.
    SelfCheck dominance{labels[s] + ": optimum (Monte Carlo threshold) >= baseline", true, ""};
    for (std::size_t p = 0; p < optimum_mc[s].points.size(); ++p) {
      const auto& o = optimum_mc[s].points[p];
      const auto& b = baseline[s].points[p];
      if (o.pd < b.pd - 3.0 * std::hypot(o.pd_stderr, b.pd_stderr) - 1e-12) {
        dominance.passed = false;
        dominance.detail = "violated at snr " + io::format_double(o.snr_db);
      }
    }
    checks.push_back(dominance);

    for (const DetectionCurve* curve : {&svm[s], &baseline[s], &optimum_mc[s]}) {
      SelfCheck mono{labels[s] + ": " + curve->detector_id + " curve monotone in SNR", true, ""};
      for (std::size_t p = 1; p < curve->points.size(); ++p) {
        const auto& a = curve->points[p - 1];
        const auto& b = curve->points[p];
        if (b.pd < a.pd - 3.0 * std::hypot(a.pd_stderr, b.pd_stderr) - 1e-12) {
          mono.passed = false;
          mono.detail = "drop at snr " + io::format_double(b.snr_db);
        }
      }
      checks.push_back(mono);
    }
  }

  // Concatenations must not lose to any of their single scales.
  for (std::size_t s = 0; s < labels.size(); ++s) {
    if (cfg.scale_sets[s].size() < 2) continue;
    for (std::size_t t = 0; t < labels.size(); ++t) {
      if (t == s || !contains_all(cfg.scale_sets[s], cfg.scale_sets[t])) continue;
      SelfCheck dom{labels[s] + ": theory >= " + labels[t], true, ""};
      for (std::size_t p = 0; p < theory[s].points.size(); ++p) {
        if (theory[s].points[p].pd < theory[t].points[p].pd - 1e-12) {
          dom.passed = false;
          dom.detail = "violated at snr " + io::format_double(theory[s].points[p].snr_db);
        }
      }
      checks.push_back(dom);
    }
  }
  return checks;
}

}  // namespace

void ExperimentConfig::validate() const {
  const int depth = log2_length(pulse.length);
  const auto filters = filters_by_name(family);
  if (scale_sets.empty()) throw std::invalid_argument("config has no scale sets");
  for (const auto& set : scale_sets) {
    if (set.empty()) throw std::invalid_argument("config contains an empty scale set");
    for (int scale : set) {
      if (scale < 1 || scale > depth ||
          (pulse.length >> scale) <= filters.length()) {
        throw std::invalid_argument("scale " + std::to_string(scale) +
                                    " leaves no steady coefficients for this length and filter");
      }
    }
  }
  if (!(pfa > 0.0 && pfa < 1.0)) throw std::invalid_argument("pfa must lie in (0, 1)");
  if (static_cast<double>(calibration_trials) * pfa < 100.0 - 1e-9) {
    throw std::invalid_argument("pfa * calibration_trials must be at least 100");
  }
  if (trials_per_point < 100 || validation_pd_trials < 100) {
    throw std::invalid_argument("Monte Carlo point estimates need at least 100 trials");
  }
  if (validation_noise_trials == 0 || n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("trial and training-set sizes must be positive");
  }
  if (c_grid.empty()) throw std::invalid_argument("C grid is empty");
  make_snr_grid(snr_min, snr_max, snr_step);
  NoiseModel{sigma};
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream out;
  out << "pulse_length = " << pulse.length << "\n"
      << "f_start = " << io::format_double(pulse.f_start) << "\n"
      << "f_end = " << io::format_double(pulse.f_end) << "\n"
      << "family = " << family << "\n"
      << "sigma = " << io::format_double(sigma) << "\n"
      << "scale_sets = " << format_scale_sets(scale_sets) << "\n"
      << "pfa = " << io::format_double(pfa) << "\n"
      << "snr_min = " << io::format_double(snr_min) << "\n"
      << "snr_max = " << io::format_double(snr_max) << "\n"
      << "snr_step = " << io::format_double(snr_step) << "\n"
      << "trials_per_point = " << trials_per_point << "\n"
      << "calibration_trials = " << calibration_trials << "\n"
      << "validation_noise_trials = " << validation_noise_trials << "\n"
      << "validation_pd_trials = " << validation_pd_trials << "\n"
      << "n_pos = " << n_pos << "\n"
      << "n_neg = " << n_neg << "\n"
      << "train_snr_lo = " << io::format_double(train_snr_lo) << "\n"
      << "train_snr_hi = " << io::format_double(train_snr_hi) << "\n"
      << "c_grid = " << format_c_grid(c_grid) << "\n"
      << "kkt_tolerance = " << io::format_double(kkt_tolerance) << "\n"
      << "max_passes = " << max_passes << "\n"
      << "root_seed = " << root_seed << "\n";
  return out.str();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(to_text()); }

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> fields;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line without '=': " + std::string(line));
    }
    fields[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }

  auto num = [](const std::string& v) { return io::parse_double_list(v).at(0); };
  auto count = [](const std::string& v) {
    const auto list = io::parse_double_list(v);
    if (list.size() != 1 || list[0] < 0 || list[0] != std::floor(list[0])) {
      throw std::invalid_argument("expected a non-negative integer, got " + v);
    }
    return static_cast<std::size_t>(list[0]);
  };
  for (const auto& [key, value] : fields) {
    if (key == "pulse_length") cfg.pulse.length = count(value);
    else if (key == "f_start") cfg.pulse.f_start = num(value);
    else if (key == "f_end") cfg.pulse.f_end = num(value);
    else if (key == "family") cfg.family = value;
    else if (key == "sigma") cfg.sigma = num(value);
    else if (key == "scale_sets") cfg.scale_sets = parse_scale_sets(value);
    else if (key == "pfa") cfg.pfa = num(value);
    else if (key == "snr_min") cfg.snr_min = num(value);
    else if (key == "snr_max") cfg.snr_max = num(value);
    else if (key == "snr_step") cfg.snr_step = num(value);
    else if (key == "trials_per_point") cfg.trials_per_point = count(value);
    else if (key == "calibration_trials") cfg.calibration_trials = count(value);
    else if (key == "validation_noise_trials") cfg.validation_noise_trials = count(value);
    else if (key == "validation_pd_trials") cfg.validation_pd_trials = count(value);
    else if (key == "n_pos") cfg.n_pos = count(value);
    else if (key == "n_neg") cfg.n_neg = count(value);
    else if (key == "train_snr_lo") cfg.train_snr_lo = num(value);
    else if (key == "train_snr_hi") cfg.train_snr_hi = num(value);
    else if (key == "c_grid") cfg.c_grid = parse_c_grid(value);
    else if (key == "kkt_tolerance") cfg.kkt_tolerance = num(value);
    else if (key == "max_passes") cfg.max_passes = count(value);
    else if (key == "root_seed") cfg.root_seed = std::stoull(value);
    else throw std::invalid_argument("unknown config key: " + key);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig read_config(const std::filesystem::path& path) {
  return parse_config(io::read_text(path));
}

std::string scale_set_label(const std::vector<int>& scales) {
  std::string out;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (i) out += '_';
    out += "d" + std::to_string(scales[i]);
  }
  return out;
}

bool ExperimentReport::valid() const {
  return std::all_of(checks.begin(), checks.end(), [](const SelfCheck& c) { return c.passed; });
}

bool CheckOutcome::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const SelfCheck& c) { return c.passed; });
}

double calibration_pd_stderr(double pd, double pfa, std::size_t calibration_trials) {
  if (calibration_trials == 0) return 0.0;
  const double p = std::clamp(pd, 1e-12, 1.0 - 1e-12);
  return normal_pdf(q_inverse(p)) * quantile_stderr(pfa, calibration_trials);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.validate();
  ExperimentReport report{cfg, cfg.hash(), {}, {}};
  const NoiseModel model(cfg.sigma);
  const auto pulse = make_chirp(cfg.pulse);
  const auto filters = filters_by_name(cfg.family);
  const auto grid = make_snr_grid(cfg.snr_min, cfg.snr_max, cfg.snr_step);
  int deepest = 0;
  for (const auto& set : cfg.scale_sets) deepest = std::max(deepest, *std::max_element(set.begin(), set.end()));
  const auto pulse_levels = dwt_details(pulse, filters, deepest);

  for (std::size_t s = 0; s < cfg.scale_sets.size(); ++s) {
    const auto& scales = cfg.scale_sets[s];
    const auto label = scale_set_label(scales);
    const std::uint64_t set_seed = substream_seed(cfg.root_seed, s);
    std::string stage = "optimum";
    try {
      const auto pulse_details = concat_scales(pulse_levels, scales);
      const auto optimum = optimum_a(pulse_details, cfg.pfa, model, 0.0);
      auto theory = analytic_curve(optimum, pulse_details, grid, model, "theory");
      const double pulse_norm =
          std::sqrt(coefficient_energy(pulse_details.layout, pulse_details.values));

      stage = "svm training";
      if (log) *log << "[" << label << "] training " << cfg.c_grid.size() << " SVMs\n";
      const auto ts = build_training_set(pulse, scales, filters, model, cfg.n_pos, cfg.n_neg,
                                         cfg.train_snr_lo, cfg.train_snr_hi,
                                         substream_seed(set_seed, 1));
      TuningOptions opts;
      opts.kkt_tolerance = cfg.kkt_tolerance;
      opts.max_passes = cfg.max_passes;
      opts.calibration_trials = cfg.calibration_trials;
      opts.validation_pd_trials = cfg.validation_pd_trials;
      auto tuned = tune_c_for_pfa(ts, pulse, cfg.pfa, cfg.c_grid, cfg.validation_noise_trials,
                                  substream_seed(set_seed, 2), model, opts);

      stage = "baseline calibration";
      if (log) *log << "[" << label << "] baseline calibration\n";
      const std::uint64_t cal_seed = substream_seed(set_seed, 4);
      const Calibration mc_cal{CalibrationMethod::monte_carlo, cfg.calibration_trials, cal_seed};
      MaxCoefficientDetector baseline{pulse_details.layout, 0.0, cfg.pfa, mc_cal,
                                      SumRange::steady};
      const std::vector<Statistic> cal_stats = {
          [&baseline](std::span<const double> d) { return baseline.score(d); },
          [&optimum](std::span<const double> d) { return optimum.score(d); },
      };
      auto cal = evaluate_noise(pulse_details.layout, model, cfg.calibration_trials, cal_seed,
                                cal_stats);
      baseline.threshold = upper_quantile(std::move(cal[0]), cfg.pfa);
      const auto optimum_mc = optimum.with_threshold(upper_quantile(std::move(cal[1]), cfg.pfa),
                                                     mc_cal);

      stage = "detection curves";
      if (log) *log << "[" << label << "] detection curves\n";
      auto curves = paired_curves(
          pulse_details.layout, pulse, grid, model, cfg.trials_per_point,
          substream_seed(set_seed, 3),
          {{[&](std::span<const double> d) { return tuned.detector.score(d); },
            tuned.detector.threshold(), "svm"},
           {[&](std::span<const double> d) { return baseline.score(d); }, baseline.threshold,
            "baseline"},
           {[&](std::span<const double> d) { return optimum_mc.score(d); },
            optimum_mc.threshold(), "optimum_mc"}},
          cfg.pfa);

      stage = "self-check";
      const double q_se = quantile_stderr(cfg.pfa, cfg.calibration_trials);
      {
        const double sigma_v = model.sigma();  // optimum a has unit norm
        const double diff = std::abs(optimum_mc.threshold() - optimum.threshold());
        report.checks.push_back({label + ": optimum analytic vs Monte Carlo threshold",
                                 diff <= 4.0 * q_se * sigma_v,
                                 "analytic " + io::format_double(optimum.threshold()) + ", mc " +
                                     io::format_double(optimum_mc.threshold())});
      }
      {
        const double analytic = threshold_for_pfa_analytic(tuned.detector.layout(),
                                                           tuned.detector.coefficients(), model,
                                                           cfg.pfa);
        const double sigma_v =
            model.sigma() * std::sqrt(coefficient_energy(tuned.detector.layout(),
                                                         tuned.detector.coefficients()));
        const double diff = std::abs(analytic - tuned.detector.threshold());
        report.checks.push_back({label + ": svm analytic vs calibrated threshold",
                                 diff <= 4.0 * q_se * sigma_v,
                                 "analytic " + io::format_double(analytic) + ", calibrated " +
                                     io::format_double(tuned.detector.threshold())});
      }
      {
        const auto probe = make_noise(pulse.size(), model, substream_seed(set_seed, 6));
        const auto probe_d = concat_scales(dwt_details(probe, filters, deepest), scales);
        const double via_svm = decision(tuned.model, probe_d);
        const double via_detector = statistic(probe_d, to_detector(tuned.model, cfg.pfa)) +
                                    tuned.model.b;
        report.checks.push_back({label + ": svm decision equals detector statistic + b",
                                 std::abs(via_svm - via_detector) <=
                                     1e-9 * std::max(1.0, std::abs(via_svm)),
                                 io::format_double(via_svm) + " vs " +
                                     io::format_double(via_detector)});
      }
      {
        const double violation = kkt_violation(tuned.model, ts);
        report.checks.push_back({label + ": svm converged within KKT tolerance",
                                 tuned.model.converged && violation <= cfg.kkt_tolerance + 1e-9,
                                 "max violation " + io::format_double(violation)});
      }

      report.sets.push_back(ScaleSetResult{scales, label, pulse_norm, optimum, std::move(theory),
                                           optimum_mc, std::move(curves[2]),
                                           std::move(tuned.detector), std::move(tuned.model),
                                           std::move(tuned.outcomes), std::move(curves[0]),
                                           std::move(baseline), std::move(curves[1])});
    } catch (const std::exception& e) {
      throw std::runtime_error("scale set " + label + ", stage " + stage + ": " + e.what());
    }
  }

  std::vector<std::string> labels;
  std::vector<DetectionCurve> theory;
  std::vector<DetectionCurve> svm;
  std::vector<DetectionCurve> baseline;
  std::vector<DetectionCurve> optimum_mc;
  std::vector<std::size_t> cal_trials;
  for (const auto& r : report.sets) {
    labels.push_back(r.label);
    theory.push_back(r.theory);
    svm.push_back(r.svm_curve);
    baseline.push_back(r.baseline_curve);
    optimum_mc.push_back(r.optimum_mc_curve);
    cal_trials.push_back(r.svm.calibration().trials);
  }
  for (auto& c : curve_checks(cfg, labels, theory, svm, baseline, optimum_mc, cal_trials)) {
    report.checks.push_back(std::move(c));
  }
  return report;
}

std::vector<GapRow> gap_table(const ExperimentReport& report) {
  std::vector<GapRow> rows;
  for (const auto& r : report.sets) {
    const auto n = r.theory.points.size();
    if (r.svm_curve.points.size() != n) {
      throw std::invalid_argument("report for " + r.label + " is missing its SVM curve");
    }
    if (r.baseline_curve.points.size() != n) {
      throw std::invalid_argument("report for " + r.label + " is missing its baseline curve");
    }
    for (std::size_t p = 0; p < n; ++p) {
      const auto& t = r.theory.points[p];
      const auto& s = r.svm_curve.points[p];
      const auto& b = r.baseline_curve.points[p];
      if (s.snr_db != t.snr_db || b.snr_db != t.snr_db) {
        throw std::invalid_argument("curves for " + r.label + " use different SNR grids");
      }
      const double se =
          std::hypot(binomial_stderr(t.pd, r.svm_curve.trials_per_point),
                     calibration_pd_stderr(t.pd, r.svm.target_pfa(), r.svm.calibration().trials));
      rows.push_back({r.label, t.snr_db, t.pd, s.pd, b.pd, t.pd - s.pd, se});
    }
  }
  return rows;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::vector<std::string> provenance = {
      "config_hash=" + std::to_string(report.config_hash),
      "root_seed=" + std::to_string(report.config.root_seed),
      "rng=" + std::string(kRngAlgorithm),
  };
  io::write_atomic(dir / "config.txt", report.config.to_text());
  for (const auto& r : report.sets) {
    auto comments = provenance;
    comments.push_back("scales=" + io::join_ints(r.scales));
    io::write_atomic(dir / curve_file(r.label, "theory"), io::format_curve_csv(r.theory, comments));
    io::write_atomic(dir / curve_file(r.label, "svm"), io::format_curve_csv(r.svm_curve, comments));
    io::write_atomic(dir / curve_file(r.label, "baseline"),
                     io::format_curve_csv(r.baseline_curve, comments));
    io::write_atomic(dir / curve_file(r.label, "optimum_mc"),
                     io::format_curve_csv(r.optimum_mc_curve, comments));
    io::write_detector(dir / (r.label + "_optimum.det"), r.optimum, {{"detector", "optimum"}});
    io::write_detector(dir / (r.label + "_svm.det"), r.svm, io::model_metadata(r.svm_model));
  }

  std::string gaps;
  for (const auto& c : provenance) gaps += "# " + c + "\n";
  gaps += "scales,snr_db,pd_theory,pd_svm,pd_baseline,gap,stderr\n";
  for (const auto& row : gap_table(report)) {
    gaps += row.scales + "," + io::format_double(row.snr_db) + "," +
            io::format_double(row.pd_theory) + "," + io::format_double(row.pd_svm) + "," +
            io::format_double(row.pd_baseline) + "," + io::format_double(row.gap) + "," +
            io::format_double(row.combined_stderr) + "\n";
  }
  io::write_atomic(dir / "gap_table.csv", gaps);

  std::string checks;
  for (const auto& c : report.checks) {
    checks += std::string(c.passed ? "PASS" : "FAIL") + " | " + c.name + " | " + c.detail + "\n";
  }
  io::write_atomic(dir / "self_check.txt", checks);
}

CheckOutcome check_output_dir(const std::filesystem::path& dir) {
  CheckOutcome outcome;
  auto fail = [&](std::string name, std::string detail) {
    outcome.checks.push_back({std::move(name), false, std::move(detail)});
  };

  ExperimentConfig cfg;
  try {
    cfg = read_config(dir / "config.txt");
  } catch (const std::exception& e) {
    fail("config.txt readable", e.what());
    return outcome;
  }
  const std::string hash_line = "# config_hash=" + std::to_string(cfg.hash());

  std::vector<std::string> labels;
  std::vector<DetectionCurve> theory;
  std::vector<DetectionCurve> svm;
  std::vector<DetectionCurve> baseline;
  std::vector<DetectionCurve> optimum_mc;
  std::vector<std::size_t> cal_trials;
  for (const auto& scales : cfg.scale_sets) {
    const auto label = scale_set_label(scales);
    try {
      std::vector<DetectionCurve> curves;
      for (const char* kind : {"theory", "svm", "baseline", "optimum_mc"}) {
        const auto text = io::read_text(dir / curve_file(label, kind));
        if (text.find(hash_line) == std::string::npos) {
          fail(label + "_" + kind + ".csv provenance", "config hash missing or different");
        }
        curves.push_back(io::parse_curve_csv(text));
      }
      const auto svm_det = io::read_detector(dir / (label + "_svm.det"));
      labels.push_back(label);
      theory.push_back(curves[0]);
      svm.push_back(curves[1]);
      baseline.push_back(curves[2]);
      optimum_mc.push_back(curves[3]);
      cal_trials.push_back(svm_det.detector.calibration().trials);
      outcome.checks.push_back({label + ": files readable", true, ""});
    } catch (const std::exception& e) {
      fail(label + ": files readable", e.what());
      return outcome;
    }
  }

  const auto grid = make_snr_grid(cfg.snr_min, cfg.snr_max, cfg.snr_step);
  for (std::size_t s = 0; s < labels.size(); ++s) {
    for (const DetectionCurve* c : {&theory[s], &svm[s], &baseline[s], &optimum_mc[s]}) {
      bool ok = c->points.size() == grid.size();
      for (std::size_t p = 0; ok && p < grid.size(); ++p) {
        ok = std::abs(c->points[p].snr_db - grid[p]) < 1e-9 && c->points[p].pd >= 0.0 &&
             c->points[p].pd <= 1.0;
      }
      if (!ok) {
        fail(labels[s] + ": " + c->detector_id + " curve matches the SNR grid", "");
        return outcome;
      }
    }
  }
  for (auto& c : curve_checks(cfg, labels, theory, svm, baseline, optimum_mc, cal_trials)) {
    outcome.checks.push_back(std::move(c));
  }

  try {
    const auto text = io::read_text(dir / "self_check.txt");
    std::istringstream lines(text);
    std::string line;
    std::size_t count = 0;
    bool all = true;
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      ++count;
      all = all && line.rfind("PASS", 0) == 0;
    }
    outcome.checks.push_back({"stored self-checks all pass", all && count > 0,
                              std::to_string(count) + " entries"});
  } catch (const std::exception& e) {
    fail("stored self-checks all pass", e.what());
  }
  return outcome;
}

}  // namespace wavedet
