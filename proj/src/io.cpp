#include "wavedet/io.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "wavedet/rng.hpp"

namespace wavedet::io {
namespace {

constexpr std::string_view kSignalTag = "wavedet-signal v1";
constexpr std::string_view kCoeffTag = "wavedet-coeffs v1";
constexpr std::string_view kDetectorTag = "wavedet-detector v1";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double to_double(std::string_view text) {
  const std::string s(trim(text));
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw std::runtime_error("not a number: '" + s + "'");
  }
  return v;
}

std::uint64_t to_u64(std::string_view text) {
  const std::string s(trim(text));
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || s.front() == '-' || end != s.c_str() + s.size() || errno == ERANGE) {
    throw std::runtime_error("not an unsigned integer: '" + s + "'");
  }
  return v;
}

std::optional<double> to_optional_double(std::string_view text) {
  if (trim(text) == "none") return std::nullopt;
  return to_double(text);
}

std::optional<std::uint64_t> to_optional_u64(std::string_view text) {
  if (trim(text) == "none") return std::nullopt;
  return to_u64(text);
}

// Parses "tag; k=v; k=v" into a map, checking the tag.
std::map<std::string, std::string> parse_header(std::string_view line, std::string_view tag) {
  const auto parts = split(line, ';');
  if (parts.empty() || trim(parts.front()) != tag) {
    throw std::runtime_error("bad file header, expected '" + std::string(tag) + "'");
  }
  std::map<std::string, std::string> fields;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto field = trim(parts[i]);
    const auto eq = field.find('=');
    if (eq == std::string_view::npos) throw std::runtime_error("malformed header field");
    fields.emplace(std::string(field.substr(0, eq)), std::string(field.substr(eq + 1)));
  }
  return fields;
}

const std::string& require(const std::map<std::string, std::string>& fields,
                           const std::string& key) {
  const auto it = fields.find(key);
  if (it == fields.end()) throw std::runtime_error("missing field '" + key + "'");
  return it->second;
}

void append_le(std::string& out, std::span<const double> values) {
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      out.push_back(static_cast<char>(bits & 0xFF));
      bits >>= 8;
    }
  }
}

std::vector<double> decode_le(std::string_view bytes, std::size_t count) {
  if (bytes.size() != count * 8) {
    throw std::runtime_error("payload holds " + std::to_string(bytes.size()) + " bytes, expected " +
                             std::to_string(count * 8));
  }
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) {
      bits = (bits << 8) | static_cast<unsigned char>(bytes[i * 8 + static_cast<std::size_t>(b)]);
    }
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

std::pair<std::string_view, std::string_view> split_first_line(std::string_view content) {
  const auto nl = content.find('\n');
  if (nl == std::string_view::npos) throw std::runtime_error("file has no header line");
  return {content.substr(0, nl), content.substr(nl + 1)};
}

std::string format_layout_fields(const CoefficientLayout& layout, std::string_view sep,
                                 std::string_view kv) {
  std::string bounds;
  std::string steady;
  for (std::size_t i = 0; i < layout.segments.size(); ++i) {
    const auto& s = layout.segments[i];
    if (i) {
      bounds += ',';
      steady += ',';
    }
    bounds += std::to_string(s.offset) + ":" + std::to_string(s.length);
    steady += std::to_string(s.steady_start);
  }
  std::string out;
  auto put = [&](std::string_view key, const std::string& value) {
    out += key;
    out += kv;
    out += value;
    out += sep;
  };
  put("family", layout.family);
  put("source_length", std::to_string(layout.source_length));
  put("scales", join_ints(layout.scales()));
  put("segment_bounds", bounds);
  put("steady_start", steady);
  return out;
}

CoefficientLayout parse_layout_fields(const std::map<std::string, std::string>& fields) {
  CoefficientLayout layout;
  layout.family = require(fields, "family");
  layout.source_length = to_u64(require(fields, "source_length"));
  const auto scales = parse_int_list(require(fields, "scales"));
  const auto bounds = split(require(fields, "segment_bounds"), ',');
  const auto steady = split(require(fields, "steady_start"), ',');
  if (bounds.size() != scales.size() || steady.size() != scales.size()) {
    throw std::runtime_error("layout fields disagree in length");
  }
  std::size_t expected_offset = 0;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const auto pair = split(bounds[i], ':');
    if (pair.size() != 2) throw std::runtime_error("malformed segment bound");
    ScaleSegment s{scales[i], to_u64(pair[0]), to_u64(pair[1]), to_u64(steady[i])};
    if (s.offset != expected_offset || s.steady_start > s.length ||
        s.length != (layout.source_length >> s.scale)) {
      throw std::runtime_error("inconsistent segment layout");
    }
    expected_offset += s.length;
    layout.segments.push_back(s);
  }
  // Cross-check against the filter family so detectors cannot carry a stale layout.
  const auto filters = filters_by_name(layout.family);
  const auto rebuilt = make_layout(filters, layout.source_length, scales);
  if (!(rebuilt == layout)) throw std::runtime_error("layout does not match its filter family");
  return layout;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_optional(std::optional<double> v) {
  return v ? format_double(*v) : std::string("none");
}

std::string format_optional(std::optional<std::uint64_t> v) {
  return v ? std::to_string(*v) : std::string("none");
}

std::string join_ints(const std::vector<int>& values, char sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  for (auto part : split(text, ',')) {
    const auto v = to_u64(part);
    if (v > 64) throw std::runtime_error("scale index out of range");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  for (auto part : split(text, ',')) out.push_back(to_double(part));
  return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_signal(const std::filesystem::path& path, const SampledSignal& signal) {
  std::string out(kSignalTag);
  out += "; length=" + std::to_string(signal.size());
  out += "; kind=" + std::string(kind_name(signal.kind()));
  out += "; snr_db=" + format_optional(signal.snr_db());
  out += "; seed=" + format_optional(signal.seed());
  out += '\n';
  append_le(out, signal.samples());
  write_atomic(path, out);
}

SampledSignal read_signal(const std::filesystem::path& path) {
  const auto content = read_text(path);
  const auto [header, payload] = split_first_line(content);
  const auto fields = parse_header(header, kSignalTag);
  const auto length = to_u64(require(fields, "length"));
  return SampledSignal(decode_le(payload, length), kind_from_name(require(fields, "kind")),
                       to_optional_double(require(fields, "snr_db")),
                       to_optional_u64(require(fields, "seed")));
}

void write_coefficients(const std::filesystem::path& path, const CoefficientFile& file) {
  const auto& c = file.coefficients;
  if (c.values.size() != c.layout.size()) throw std::invalid_argument("values do not match layout");
  std::string out(kCoeffTag);
  out += "; length=" + std::to_string(c.values.size());
  out += "; kind=" + std::string(kind_name(file.kind));
  out += "; snr_db=" + format_optional(file.snr_db);
  out += "; seed=" + format_optional(file.seed);
  out += "; ";
  auto layout = format_layout_fields(c.layout, "; ", "=");
  layout.resize(layout.size() - 2);  // trailing separator
  out += layout;
  out += '\n';
  append_le(out, c.values);
  write_atomic(path, out);
}

CoefficientFile read_coefficients(const std::filesystem::path& path) {
  const auto content = read_text(path);
  const auto [header, payload] = split_first_line(content);
  const auto fields = parse_header(header, kCoeffTag);
  CoefficientFile file;
  file.coefficients.layout = parse_layout_fields(fields);
  const auto length = to_u64(require(fields, "length"));
  if (length != file.coefficients.layout.size()) throw std::runtime_error("length disagrees with layout");
  file.coefficients.values = decode_le(payload, length);
  file.kind = kind_from_name(require(fields, "kind"));
  file.snr_db = to_optional_double(require(fields, "snr_db"));
  file.seed = to_optional_u64(require(fields, "seed"));
  return file;
}

std::string format_detector(const LinearDetector& det,
                            const std::map<std::string, std::string>& metadata) {
  std::string out(kDetectorTag);
  out += '\n';
  out += format_layout_fields(det.layout(), "\n", "=");
  out += "sum_range=" + std::string(range_name(det.range())) + "\n";
  out += "pfa=" + format_double(det.target_pfa()) + "\n";
  const auto& cal = det.calibration();
  const bool mc = cal.method == CalibrationMethod::monte_carlo;
  out += std::string("calibration=") + (mc ? "monte_carlo" : "analytic") + "\n";
  out += "calibration_trials=" + std::to_string(mc ? cal.trials : 0) + "\n";
  out += "calibration_seed=" + std::to_string(mc ? cal.seed : 0) + "\n";
  out += "threshold=" + format_double(det.threshold()) + "\n";
  out += "rng=" + std::string(kRngAlgorithm) + "\n";
  for (const auto& [key, value] : metadata) out += key + "=" + value + "\n";
  out += "coefficients=" + std::to_string(det.coefficients().size()) + "\n";
  for (double v : det.coefficients()) out += format_double(v) + "\n";
  return out;
}

void write_detector(const std::filesystem::path& path, const LinearDetector& det,
                    const std::map<std::string, std::string>& metadata) {
  write_atomic(path, format_detector(det, metadata));
}

DetectorFile parse_detector(std::string_view text) {
  const auto lines = split(text, '\n');
  if (lines.empty() || trim(lines.front()) != kDetectorTag) {
    throw std::runtime_error("not a wavedet detector file");
  }
  std::map<std::string, std::string> fields;
  std::vector<double> coefficients;
  bool have_coefficients = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw std::runtime_error("malformed detector line");
    const std::string key(line.substr(0, eq));
    const auto value = line.substr(eq + 1);
    if (key == "coefficients") {
      const auto count = to_u64(value);
      if (i + count >= lines.size()) throw std::runtime_error("truncated coefficient list");
      for (std::size_t k = 0; k < count; ++k) coefficients.push_back(to_double(lines[i + 1 + k]));
      have_coefficients = true;
      break;
    }
    fields.emplace(key, std::string(value));
  }
  if (!have_coefficients) throw std::runtime_error("detector file has no coefficients");

  auto layout = parse_layout_fields(fields);
  Calibration cal;
  const auto& method = require(fields, "calibration");
  if (method == "monte_carlo") {
    cal = {CalibrationMethod::monte_carlo, to_u64(require(fields, "calibration_trials")),
           to_u64(require(fields, "calibration_seed"))};
  } else if (method != "analytic") {
    throw std::runtime_error("unknown calibration method " + method);
  }
  LinearDetector det(std::move(layout), std::move(coefficients),
                     to_double(require(fields, "threshold")), to_double(require(fields, "pfa")),
                     cal, range_from_name(require(fields, "sum_range")));

  DetectorFile file{std::move(det), {}};
  static const char* kCore[] = {"family",    "source_length", "scales",
                                "segment_bounds", "steady_start", "sum_range",
                                "pfa",       "calibration",   "calibration_trials",
                                "calibration_seed", "threshold", "rng"};
  for (const auto& [key, value] : fields) {
    bool core = false;
    for (const char* k : kCore) core = core || key == k;
    if (!core) file.metadata.emplace(key, value);
  }
  return file;
}

DetectorFile read_detector(const std::filesystem::path& path) {
  return parse_detector(read_text(path));
}

std::map<std::string, std::string> model_metadata(const SvmModel& model) {
  double alpha_sum = 0.0;
  double alpha_max = 0.0;
  std::size_t at_bound = 0;
  for (std::size_t i = 0; i < model.alphas.size(); ++i) alpha_sum += model.alphas[i];
  for (double a : model.alphas) alpha_max = std::max(alpha_max, a);
  for (double a : model.alphas) {
    if (a >= std::min(model.c_plus, model.c_minus)) ++at_bound;
  }
  return {
      {"detector", "svm"},
      {"svm_c_plus", format_double(model.c_plus)},
      {"svm_c_minus", format_double(model.c_minus)},
      {"svm_kkt_tolerance", format_double(model.kkt_tolerance)},
      {"svm_converged", model.converged ? "true" : "false"},
      {"svm_iterations", std::to_string(model.iterations)},
      {"svm_support_count", std::to_string(model.support_count)},
      {"svm_patterns", std::to_string(model.alphas.size())},
      {"svm_alpha_sum", format_double(alpha_sum)},
      {"svm_alpha_max", format_double(alpha_max)},
      {"svm_dual_objective", format_double(model.dual_objective)},
      {"svm_trained_bias", format_double(model.b)},
  };
}

std::string format_curve_csv(const DetectionCurve& curve, const std::vector<std::string>& comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "# detector=" + curve.detector_id + "\n";
  out += "snr_db,pd,stderr,pfa,trials,seed\n";
  for (const auto& p : curve.points) {
    out += format_double(p.snr_db) + "," + format_double(p.pd) + "," + format_double(p.pd_stderr) +
           "," + format_double(curve.pfa) + "," + std::to_string(curve.trials_per_point) + "," +
           std::to_string(curve.seed) + "\n";
  }
  return out;
}

DetectionCurve parse_curve_csv(std::string_view text) {
  DetectionCurve curve;
  bool header_seen = false;
  for (auto raw : split(text, '\n')) {
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = trim(line.substr(1));
      if (body.substr(0, 9) == "detector=") curve.detector_id = std::string(body.substr(9));
      continue;
    }
    if (!header_seen) {
      if (line != "snr_db,pd,stderr,pfa,trials,seed") throw std::runtime_error("bad curve CSV header");
      header_seen = true;
      continue;
    }
    const auto cols = split(line, ',');
    if (cols.size() != 6) throw std::runtime_error("curve CSV row needs 6 columns");
    curve.points.push_back({to_double(cols[0]), to_double(cols[1]), to_double(cols[2])});
    curve.pfa = to_double(cols[3]);
    curve.trials_per_point = to_u64(cols[4]);
    curve.seed = to_u64(cols[5]);
  }
  if (!header_seen) throw std::runtime_error("curve CSV has no header");
  return curve;
}

}  // namespace wavedet::io
