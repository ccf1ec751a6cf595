#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "portwatch/csv.hpp"
#include "portwatch/ingest.hpp"
#include "portwatch/manifest.hpp"

namespace pw = portwatch;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = (std::filesystem::temp_directory_path() / name).string();
  }
  ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("decimal serialization round-trips doubles bit-exactly") {
  const std::vector<double> values = {0.0,     -0.0,        0.1,       1.0 / 3.0, 1e300,
                                      -1e-300, 1e308,       5e-324,    -2.5,      3.141592653589793,
                                      1e-8,    123456789.0, 0.30000000000000004};
  for (const double v : values) {
    const std::string text = pw::format_double(v);
    const double back = std::strtod(text.c_str(), nullptr);
    CHECK(std::memcmp(&back, &v, sizeof(double)) == 0);
  }
}

TEST_CASE("series file round trip preserves values and names") {
  TempFile file("portwatch_test_series.csv");
  pw::SeriesMatrix data(2, 3);
  data << 0.1, 1.0 / 3.0, -5.5, 2.0, 1e-17, 4e8;
  pw::write_series_csv(file.path, data, {"alpha", "beta"});

  const auto loaded = pw::load_timeseries_csv(file.path, {});
  REQUIRE(loaded.data.rows() == 2);
  REQUIRE(loaded.data.cols() == 3);
  CHECK((loaded.data - data).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(loaded.names.size() == 2);
  CHECK(loaded.names[0] == "alpha");
  CHECK(loaded.names[1] == "beta");

  // Default names and a tick offset.
  pw::write_series_csv(file.path, data, {}, 100);
  const std::string text = slurp(file.path);
  CHECK(text.find("t,port_0,port_1") == 0);
  CHECK(text.find("\n100,") != std::string::npos);
  CHECK(text.find("\r") == std::string::npos);  // LF endings only
}

TEST_CASE("mask file round trip") {
  TempFile file("portwatch_test_mask.csv");
  pw::BoolMatrix mask = pw::BoolMatrix::Constant(3, 4, false);
  mask(1, 2) = true;
  mask(2, 0) = true;
  pw::write_mask_csv(file.path, mask);
  const auto back = pw::read_mask_csv(file.path);
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 4);
  for (pw::Index j = 0; j < 3; ++j)
    for (pw::Index t = 0; t < 4; ++t) CHECK(back(j, t) == mask(j, t));
}

TEST_CASE("alerts file round trip and bounds checking") {
  TempFile file("portwatch_test_alerts.csv");
  pw::AlertMatrix alerts;
  alerts.p = 5;
  alerts.T = 100;
  alerts.records.push_back(pw::AlertRecord{42, 3, 1.5, 1.25, 0.75});
  alerts.records.push_back(pw::AlertRecord{43, 0, -2.5, 2.0, 0.7});
  pw::write_alerts_csv(file.path, alerts);

  const auto back = pw::read_alerts_csv(file.path, 5, 100);
  REQUIRE(back.records.size() == 2);
  CHECK(back.p == 5);
  CHECK(back.T == 100);
  CHECK(back.records[0].tick == 42);
  CHECK(back.records[0].stream == 3);
  CHECK(back.records[0].residual == 1.5);
  CHECK(back.records[1].residual == -2.5);

  // The same file read against tighter bounds must fail.
  CHECK_THROWS_AS(pw::read_alerts_csv(file.path, 3, 100), std::runtime_error);
  CHECK_THROWS_AS(pw::read_alerts_csv(file.path, 5, 40), std::runtime_error);
}

TEST_CASE("ingestion shapes, gaps, and the log transform") {
  TempFile file("portwatch_test_ingest.csv");
  {
    std::ofstream out(file.path, std::ios::binary);
    out << "t,a,b\n0,1.5,0\n1,2.5,1.718281828459045\n";
  }
  const auto plain = pw::load_timeseries_csv(file.path, {});
  REQUIRE(plain.data.rows() == 2);
  REQUIRE(plain.data.cols() == 2);
  CHECK(plain.data(0, 0) == 1.5);
  CHECK(plain.data(1, 0) == 0.0);

  pw::IngestOptions log_options;
  log_options.log_transform = true;
  const auto logged = pw::load_timeseries_csv(file.path, log_options);
  CHECK(logged.data(1, 0) == doctest::Approx(0.0));          // ln(1 + 0)
  CHECK(logged.data(1, 1) == doctest::Approx(1.0).epsilon(1e-14));  // ln(1 + (e-1))

  {
    std::ofstream out(file.path, std::ios::binary);
    out << "t,a,b\n0,1.5,\n1,2.5,3.5\n";
  }
  const auto gappy = pw::load_timeseries_csv(file.path, {});
  CHECK(std::isnan(gappy.data(1, 0)));
  CHECK(gappy.data(1, 1) == 3.5);
}

TEST_CASE("ingestion errors carry locations") {
  TempFile file("portwatch_test_bad.csv");
  {
    std::ofstream out(file.path, std::ios::binary);
    out << "t,a\n0,what\n";
  }
  try {
    pw::load_timeseries_csv(file.path, {});
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    const std::string message = e.what();
    CHECK(message.find(":2") != std::string::npos);  // line number
  }

  {
    std::ofstream out(file.path, std::ios::binary);
    out << "time,a\n0,1\n";
  }
  CHECK_THROWS_AS(pw::load_timeseries_csv(file.path, {}), std::runtime_error);

  {
    std::ofstream out(file.path, std::ios::binary);
    out << "t,a,b\n0,1\n";  // short row
  }
  CHECK_THROWS_AS(pw::load_timeseries_csv(file.path, {}), std::runtime_error);
}

TEST_CASE("stream selection by header name") {
  TempFile file("portwatch_test_select.csv");
  {
    std::ofstream out(file.path, std::ios::binary);
    out << "t,a,b,c\n0,1,2,3\n1,4,5,6\n";
  }
  pw::IngestOptions options;
  options.stream_selection = std::vector<std::string>{"c", "a"};
  const auto selected = pw::load_timeseries_csv(file.path, options);
  REQUIRE(selected.data.rows() == 2);
  CHECK(selected.names[0] == "c");
  CHECK(selected.names[1] == "a");
  CHECK(selected.data(0, 0) == 3.0);
  CHECK(selected.data(1, 1) == 4.0);

  options.stream_selection = std::vector<std::string>{"zz"};
  CHECK_THROWS_AS(pw::load_timeseries_csv(file.path, options), std::runtime_error);
}

TEST_CASE("busiest-stream selection order and ties") {
  pw::SeriesMatrix data(3, 2);
  data << 2.0, 3.0,   // sum 5
          4.0, 5.0,   // sum 9
          1.0, 1.0;   // sum 2
  const auto top1 = pw::top_k_stream_indices(data, 1);
  REQUIRE(top1.size() == 1);
  CHECK(top1[0] == 1);

  const auto all = pw::top_k_stream_indices(data, 3);
  REQUIRE(all.size() == 3);
  CHECK(all[0] == 1);
  CHECK(all[1] == 0);
  CHECK(all[2] == 2);

  pw::SeriesMatrix tied = pw::SeriesMatrix::Constant(4, 2, 1.0);
  const auto first_two = pw::top_k_stream_indices(tied, 2);
  REQUIRE(first_two.size() == 2);
  CHECK(first_two[0] == 0);  // ties keep the original order
  CHECK(first_two[1] == 1);

  const auto kept = pw::top_k_streams(data, 2);
  REQUIRE(kept.rows() == 2);
  CHECK(kept(0, 0) == 4.0);
  CHECK(kept(1, 0) == 2.0);

  CHECK_THROWS_AS(pw::top_k_stream_indices(data, 4), std::invalid_argument);
}

TEST_CASE("manifest lands next to the primary output") {
  const auto dir = std::filesystem::temp_directory_path() / "portwatch_test_manifest";
  std::filesystem::create_directories(dir);
  const std::string primary = (dir / "out.csv").string();

  pw::RunManifest manifest;
  manifest.subcommand = "generate";
  manifest.seed = 99;
  manifest.config["p"] = "100";
  manifest.inputs = {};
  manifest.outputs = {primary};
  pw::write_manifest(manifest, primary);

  const std::string text = slurp((dir / "manifest.json").string());
  CHECK(text.find("\"subcommand\"") != std::string::npos);
  CHECK(text.find("generate") != std::string::npos);
  CHECK(text.find("\"seed\"") != std::string::npos);
  CHECK(text.find("99") != std::string::npos);
  CHECK(text.find(pw::kArtifactVersion) != std::string::npos);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
