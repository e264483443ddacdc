#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <unistd.h>

#include "commands.hpp"

namespace fs = std::filesystem;
using namespace srt::cli;

namespace {

struct Workspace {
  fs::path dir;
  Workspace() {
    static int counter = 0;
    dir = fs::temp_directory_path() / ("srt_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string operator/(const std::string &name) const { return (dir / name).string(); }
};

CommonOptions defaults() {
  CommonOptions o;
  o.config_path = SRT_DEFAULT_CONFIG;
  return o;
}

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::string &path, const std::string &text) { std::ofstream(path) << text; }

// Default config with a 16-voxel grid side.
std::string small_grid_config() {
  return R"({"grid": {"m_s": 16, "m_z": 16, "spacing": 0.001},
             "aperture": {"cylinder_radius": 0.020, "n_columns": 8, "n_heights": 8, "height_pitch": 0.002,
                          "height_origin": -0.007, "n_radii": 24, "radius_spacing": 0.00125}})";
}

} // namespace

TEST_CASE("verify passes on the default config") {
  Workspace ws;
  auto opts = defaults();
  opts.metrics_out = ws / "metrics.txt";
  std::ostringstream out;
  const auto r = cmd_verify(opts, out);
  CHECK(r.exit_code == kOk);
  CHECK(out.str().find("PASS  adjoint dot test") != std::string::npos);
  CHECK(out.str().find("FAIL") == std::string::npos);
  CHECK(out.str().find("seed=1") != std::string::npos);
  CHECK(std::stod(r.metrics.at("check0.measured")) <= 1e-12);
  const auto metrics = slurp(ws / "metrics.txt");
  CHECK(metrics.find("seed = 1\n") != std::string::npos);
  CHECK(metrics.find("exit_code = 0\n") != std::string::npos);
}

TEST_CASE("forward with a mismatched grid exits 1 naming the dimension") {
  Workspace ws;
  std::ostringstream out;
  REQUIRE(cmd_phantom(defaults(), "ball", 0.0, 1.0, ws / "f.srtarr", out).exit_code == kOk);
  write_text(ws / "small.json", small_grid_config());
  auto opts = defaults();
  opts.config_path = ws / "small.json";
  const auto r = cmd_forward(opts, "", ws / "f.srtarr", ws / "y.srtarr", out);
  CHECK(r.exit_code == kValidation);
  CHECK(r.error.find("m_s") != std::string::npos);
  CHECK(r.error.find('\n') == std::string::npos);
  CHECK_FALSE(fs::exists(ws / "y.srtarr"));
}

TEST_CASE("forward and adjoint reuse cached matrices") {
  Workspace ws;
  std::ostringstream out;
  const auto opts = defaults();
  REQUIRE(cmd_build(opts, ws / "mats", out).exit_code == kOk);
  CHECK(out.str().find("nnz a12") != std::string::npos);
  CHECK(fs::exists(ws / "mats/manifest.json"));
  std::vector<std::pair<fs::path, fs::file_time_type>> stamps;
  for (const auto &e : fs::directory_iterator(ws / "mats")) stamps.emplace_back(e.path(), e.last_write_time());
  CHECK(stamps.size() == 10);

  REQUIRE(cmd_phantom(opts, "gaussian", 0.0, 1.0, ws / "f.srtarr", out).exit_code == kOk);
  std::ostringstream fwd;
  const auto r = cmd_forward(opts, ws / "mats", ws / "f.srtarr", ws / "y.srtarr", fwd);
  CHECK(r.exit_code == kOk);
  CHECK(fwd.str().find("loaded 9 matrices from cache") != std::string::npos);
  CHECK(fwd.str().find("built") == std::string::npos);
  CHECK(r.metrics.at("matrices_source") == "cache");

  std::ostringstream adj;
  CHECK(cmd_adjoint(opts, ws / "mats", ws / "y.srtarr", ws / "g.srtarr", adj).exit_code == kOk);
  CHECK(adj.str().find("loaded 9 matrices from cache") != std::string::npos);
  for (const auto &[path, time] : stamps) CHECK(fs::last_write_time(path) == time);

  // Cached and freshly built operators give the same bytes.
  CHECK(cmd_forward(opts, "", ws / "f.srtarr", ws / "y_fresh.srtarr", out).exit_code == kOk);
  CHECK(slurp(ws / "y.srtarr") == slurp(ws / "y_fresh.srtarr"));
}

TEST_CASE("a cache built for another config is refused") {
  Workspace ws;
  std::ostringstream out;
  REQUIRE(cmd_build(defaults(), ws / "mats", out).exit_code == kOk);
  REQUIRE(cmd_phantom(defaults(), "ball", 0.0, 1.0, ws / "f.srtarr", out).exit_code == kOk);
  auto text = slurp(SRT_DEFAULT_CONFIG);
  text.replace(text.find("\"n_columns\": 8"), 14, "\"n_columns\": 7");
  write_text(ws / "other.json", text);
  auto opts = defaults();
  opts.config_path = ws / "other.json";
  const auto r = cmd_forward(opts, ws / "mats", ws / "f.srtarr", ws / "y.srtarr", out);
  CHECK(r.exit_code == kValidation);
  CHECK(r.error.find("fingerprint") != std::string::npos);
  CHECK(config_fingerprint(SRT_DEFAULT_CONFIG) != config_fingerprint(ws / "other.json"));
}

TEST_CASE("commands are idempotent") {
  Workspace ws;
  std::ostringstream out;
  const auto opts = defaults();
  REQUIRE(cmd_build(opts, ws / "a", out).exit_code == kOk);
  REQUIRE(cmd_build(opts, ws / "b", out).exit_code == kOk);
  for (const char *name : {"a12_col0.srtcrt", "a12_col7.srtcrt", "a34.srtcrt", "manifest.json"}) {
    CHECK(slurp(ws / (std::string("a/") + name)) == slurp(ws / (std::string("b/") + name)));
  }
  REQUIRE(cmd_phantom(opts, "ball", 0.0, 1.0, ws / "f.srtarr", out).exit_code == kOk);
  REQUIRE(cmd_forward(opts, ws / "a", ws / "f.srtarr", ws / "y1.srtarr", out).exit_code == kOk);
  REQUIRE(cmd_forward(opts, ws / "a", ws / "f.srtarr", ws / "y2.srtarr", out).exit_code == kOk);
  CHECK(slurp(ws / "y1.srtarr") == slurp(ws / "y2.srtarr"));

  REQUIRE(cmd_reconstruct(opts, ws / "y1.srtarr", ws / "r1.srtarr", 10, 1e-9, ws / "a", out).exit_code == kOk);
  REQUIRE(cmd_reconstruct(opts, ws / "y1.srtarr", ws / "r2.srtarr", 10, 1e-9, "", out).exit_code == kOk);
  CHECK(slurp(ws / "r1.srtarr") == slurp(ws / "r2.srtarr"));
  CHECK(slurp(ws / "r1.srtarr.report.txt") == slurp(ws / "r2.srtarr.report.txt"));

  std::ostringstream v1, v2;
  const auto c1 = cmd_verify(opts, v1);
  const auto c2 = cmd_verify(opts, v2);
  CHECK(c1.metrics == c2.metrics);
}

TEST_CASE("reconstruct writes the image and a residual report") {
  Workspace ws;
  std::ostringstream out;
  const auto opts = defaults();
  REQUIRE(cmd_phantom(opts, "ball", 0.005, 1.0, ws / "f.srtarr", out).exit_code == kOk);
  REQUIRE(cmd_forward(opts, "", ws / "f.srtarr", ws / "y.srtarr", out).exit_code == kOk);
  const auto r = cmd_reconstruct(opts, ws / "y.srtarr", ws / "x.srtarr", 50, 1e-9, "", out);
  CHECK(r.exit_code == kOk);
  CHECK(std::stod(r.metrics.at("final_residual")) <= 0.1);
  std::istringstream report(slurp(ws / "x.srtarr.report.txt"));
  std::string header;
  std::getline(report, header);
  CHECK(header.front() == '#');
  int k = 0, rows = 0;
  double res = 0.0, last = 2.0;
  while (report >> k >> res) {
    CHECK(k == rows++);
    CHECK(res <= last + 1e-10);
    last = res;
  }
  CHECK(rows == std::stoi(r.metrics.at("iterations")) + 1);

  CHECK(cmd_reconstruct(opts, ws / "y.srtarr", ws / "x0.srtarr", 0, 1e-9, "", out).exit_code == kValidation);
}

TEST_CASE("io and format failures exit 3") {
  Workspace ws;
  std::ostringstream out;
  const auto opts = defaults();
  auto r = cmd_forward(opts, "", ws / "missing.srtarr", ws / "y.srtarr", out);
  CHECK(r.exit_code == kIo);
  CHECK_FALSE(r.error.empty());

  REQUIRE(cmd_build(opts, ws / "mats", out).exit_code == kOk);
  REQUIRE(cmd_phantom(opts, "ball", 0.0, 1.0, ws / "f.srtarr", out).exit_code == kOk);
  std::string bytes = slurp(ws / "mats/a34.srtcrt");
  bytes[40] ^= 0x5a;
  {
    std::ofstream o(ws / "mats/a34.srtcrt", std::ios::binary);
    o << bytes;
  }
  r = cmd_forward(opts, ws / "mats", ws / "f.srtarr", ws / "y.srtarr", out);
  CHECK(r.exit_code == kIo);
  CHECK(r.error.find("checksum") != std::string::npos);

  auto bad = defaults();
  bad.config_path = ws / "nope.json";
  CHECK(cmd_verify(bad, out).exit_code == kIo);
}

TEST_CASE("invalid arguments exit 1") {
  Workspace ws;
  std::ostringstream out;
  auto opts = defaults();
  CHECK(cmd_bench(opts, {32}, 0.01, out).exit_code == kValidation);
  CHECK(cmd_phantom(opts, "cube", 0.0, 1.0, ws / "f.srtarr", out).exit_code == kValidation);
  opts.threads = 0;
  CHECK(cmd_verify(opts, out).exit_code == kValidation);
  write_text(ws / "broken.json", R"({"grid": {"m_s": 4}})");
  opts = defaults();
  opts.config_path = ws / "broken.json";
  const auto r = cmd_verify(opts, out);
  CHECK(r.exit_code == kValidation);
  CHECK(r.error.find("grid.m_z") != std::string::npos);
}

TEST_CASE("bench reports exponents") {
  std::ostringstream out;
  const auto r = cmd_bench(defaults(), {16, 32}, 0.01, out);
  CHECK(r.exit_code == kOk);
  CHECK(r.metrics.count("exponent.aperture_time") == 1);
  CHECK(std::stod(r.metrics.at("exponent.nnz")) > 0.5);
  CHECK(out.str().find("seed=1") != std::string::npos);
}
