#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "wavedet/io.hpp"
#include "wavedet/optimum.hpp"

using namespace wavedet;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "wavedet_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

LinearDetector sample_detector() {
  const auto pulse = make_chirp(ChirpSpec{});
  const auto d = concat_scales(dwt_details(pulse, db_filters(5), 6), std::vector<int>{4, 6});
  return optimum_a(d, 1e-3, NoiseModel(1.0), 0.0);
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("double formatting round-trips") {
    for (double v : {0.1, -1.0 / 3.0, 1e-300, 3.0902323061678412, 12345678.9}) {
      CHECK(io::parse_double_list(io::format_double(v)).at(0) == v);
    }
    CHECK(io::format_optional(std::optional<double>{}) == "none");
    CHECK(io::join_ints({3, 4, 5}) == "3,4,5");
    CHECK(io::parse_int_list("3, 4,5") == std::vector<int>{3, 4, 5});
    CHECK_THROWS(io::parse_int_list("3,x"));
  }

  TEST_CASE("signal file layout") {
    const auto sig = make_observation(make_chirp(16, 0.05, 0.2), -4.5, NoiseModel(1.0), 77);
    const auto path = scratch("obs.sig");
    io::write_signal(path, sig);
    const auto raw = io::read_text(path);
    const std::string header = "wavedet-signal v1; length=16; kind=observation; snr_db=-4.5; seed=77\n";
    REQUIRE(raw.size() == header.size() + 16 * 8);
    CHECK(raw.substr(0, header.size()) == header);
    // First sample, little-endian.
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(raw[header.size() + b]);
    double first = 0.0;
    std::memcpy(&first, &bits, 8);
    CHECK(first == sig.samples()[0]);

    const auto back = io::read_signal(path);
    CHECK(back.kind() == SignalKind::observation);
    CHECK(back.snr_db() == -4.5);
    CHECK(back.seed() == 77u);
    CHECK(std::equal(back.samples().begin(), back.samples().end(), sig.samples().begin()));
  }

  TEST_CASE("chirp file records no snr or seed") {
    const auto path = scratch("chirp.sig");
    io::write_signal(path, make_chirp(64, 0.01, 0.2));
    const auto raw = io::read_text(path);
    CHECK(raw.rfind("wavedet-signal v1; length=64; kind=chirp; snr_db=none; seed=none\n", 0) == 0);
    const auto back = io::read_signal(path);
    CHECK(back.kind() == SignalKind::pulse_template);
    CHECK_FALSE(back.snr_db().has_value());
  }

  TEST_CASE("malformed signal files are rejected") {
    const auto path = scratch("bad.sig");
    {
      std::ofstream out(path, std::ios::binary);
      out << "wavedet-signal v1; length=8; kind=noise; snr_db=none; seed=1\n" << "short";
    }
    CHECK_THROWS(io::read_signal(path));
    {
      std::ofstream out(path, std::ios::binary);
      out << "something else\n";
    }
    CHECK_THROWS(io::read_signal(path));
    CHECK_THROWS(io::read_signal(scratch("missing.sig")));
  }

  TEST_CASE("coefficient file round trip") {
    const auto x = make_noise(256, NoiseModel(1.0), 5);
    const auto d = concat_scales(dwt_details(x, db_filters(3), 4), std::vector<int>{2, 4});
    const auto path = scratch("x.coef");
    io::write_coefficients(path, {d, x.kind(), x.snr_db(), x.seed()});
    const auto raw = io::read_text(path);
    CHECK(raw.find("scales=2,4") != std::string::npos);
    CHECK(raw.find("segment_bounds=0:64,64:16") != std::string::npos);
    const auto back = io::read_coefficients(path);
    CHECK(back.coefficients.layout == d.layout);
    CHECK(back.coefficients.values == d.values);
    CHECK(back.kind == SignalKind::noise);
    CHECK(back.seed == 5u);
  }

  TEST_CASE("detector file round trip") {
    const auto det = sample_detector();
    const auto text = io::format_detector(det, {{"detector", "optimum"}, {"note", "x"}});
    CHECK(text.rfind("wavedet-detector v1\n", 0) == 0);
    CHECK(text.find("pfa=0.001") != std::string::npos);
    CHECK(text.find("rng=") != std::string::npos);
    const auto back = io::parse_detector(text);
    CHECK(back.detector.layout() == det.layout());
    CHECK(back.detector.threshold() == det.threshold());
    CHECK(back.detector.target_pfa() == det.target_pfa());
    CHECK(std::equal(det.coefficients().begin(), det.coefficients().end(),
                     back.detector.coefficients().begin()));
    CHECK(back.metadata.at("detector") == "optimum");
    CHECK(back.metadata.at("note") == "x");
    CHECK(back.metadata.count("threshold") == 0);

    const auto mc = det.with_threshold(3.1, {CalibrationMethod::monte_carlo, 200000, 42});
    const auto back_mc = io::parse_detector(io::format_detector(mc));
    CHECK(back_mc.detector.calibration().method == CalibrationMethod::monte_carlo);
    CHECK(back_mc.detector.calibration().trials == 200000);
    CHECK(back_mc.detector.calibration().seed == 42u);
  }

  TEST_CASE("broken detector files") {
    const auto text = io::format_detector(sample_detector());
    CHECK_THROWS(io::parse_detector("wavedet-detector v2\n"));
    CHECK_THROWS(io::parse_detector(text.substr(0, text.size() - 30)));
    auto no_coeffs = text.substr(0, text.find("coefficients="));
    CHECK_THROWS(io::parse_detector(no_coeffs));
    auto bad_pfa = text;
    bad_pfa.replace(bad_pfa.find("pfa=0.001"), 9, "pfa=2");
    CHECK_THROWS(io::parse_detector(bad_pfa));
  }

  TEST_CASE("curve CSV round trip") {
    DetectionCurve c{1e-3, {{-2.0, 0.25, 0.01}, {-1.0, 0.5, 0.02}}, "svm", 10000, 17};
    const auto text = io::format_curve_csv(c, {"config_hash=123"});
    CHECK(text.rfind("# config_hash=123\n# detector=svm\nsnr_db,pd,stderr,pfa,trials,seed\n", 0) == 0);
    const auto back = io::parse_curve_csv(text);
    CHECK(back.detector_id == "svm");
    CHECK(back.pfa == 1e-3);
    CHECK(back.trials_per_point == 10000);
    CHECK(back.seed == 17u);
    REQUIRE(back.points.size() == 2);
    CHECK(back.points[1].pd == 0.5);
    CHECK_THROWS(io::parse_curve_csv("snr,pd\n1,2\n"));
    CHECK_THROWS(io::parse_curve_csv("snr_db,pd,stderr,pfa,trials,seed\n1,2\n"));
  }

  TEST_CASE("atomic writes leave no temporary files") {
    const auto dir = scratch("atomic");
    fs::create_directories(dir);
    for (const auto& e : fs::directory_iterator(dir)) fs::remove(e.path());
    io::write_atomic(dir / "a.txt", "one");
    io::write_atomic(dir / "a.txt", "two");
    CHECK(io::read_text(dir / "a.txt") == "two");
    CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 1);
  }
}
