#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wavedet/detector.hpp"
#include "wavedet/signal.hpp"
#include "wavedet/svm.hpp"
#include "wavedet/wavelet.hpp"

namespace wavedet::io {

/// Shortest decimal that round-trips a double ("%.17g"); "none" for nullopt.
std::string format_double(double v);
std::string format_optional(std::optional<double> v);
std::string format_optional(std::optional<std::uint64_t> v);

std::string join_ints(const std::vector<int>& values, char sep = ',');
std::vector<int> parse_int_list(std::string_view text);
std::vector<double> parse_double_list(std::string_view text);

/// Writes via a temporary file and rename, so readers never see partial output.
void write_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);

// Signal file:
//   wavedet-signal v1; length=<n>; kind=<k>; snr_db=<x>; seed=<s>\n
// followed by n little-endian IEEE-754 doubles.
void write_signal(const std::filesystem::path& path, const SampledSignal& signal);
SampledSignal read_signal(const std::filesystem::path& path);

struct CoefficientFile {
  DetailCoefficients coefficients;
  SignalKind kind = SignalKind::noise;
  std::optional<double> snr_db;
  std::optional<std::uint64_t> seed;
};

// Coefficient file: the signal-file header with tag wavedet-coeffs plus
//   family=..; source_length=..; scales=i,j,..; segment_bounds=off:len,..; steady_start=..
// then the coefficient values as little-endian doubles.
void write_coefficients(const std::filesystem::path& path, const CoefficientFile& file);
CoefficientFile read_coefficients(const std::filesystem::path& path);

struct DetectorFile {
  LinearDetector detector;
  std::map<std::string, std::string> metadata;  // keys not part of the detector itself
};

/// Text detector file: key=value header, then `coefficients=<n>` and n values.
std::string format_detector(const LinearDetector& det,
                            const std::map<std::string, std::string>& metadata = {});
void write_detector(const std::filesystem::path& path, const LinearDetector& det,
                    const std::map<std::string, std::string>& metadata = {});
DetectorFile parse_detector(std::string_view text);
DetectorFile read_detector(const std::filesystem::path& path);

/// Detector-file metadata describing a trained SVM (C values, KKT tolerance,
/// convergence flag, alpha summary, trained bias).
std::map<std::string, std::string> model_metadata(const SvmModel& model);

// Curve CSV: optional '#' comment lines, then
//   snr_db,pd,stderr,pfa,trials,seed
std::string format_curve_csv(const DetectionCurve& curve,
                             const std::vector<std::string>& comments = {});
DetectionCurve parse_curve_csv(std::string_view text);

}  // namespace wavedet::io
