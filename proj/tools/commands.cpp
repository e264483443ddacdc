#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "srt/array_io.hpp"
#include "srt/bench.hpp"
#include "srt/codec.hpp"
#include "srt/errors.hpp"
#include "srt/oracle.hpp"
#include "srt/solver.hpp"
#include "srt/sparse.hpp"
#include "srt/srt_operator.hpp"
#include "srt/verify.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;

namespace srt::cli {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char *format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string g17(double v) { return fmt("%.17g", v); }

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void apply_threads(const CommonOptions &opts) {
  if (!opts.threads) return;
  if (*opts.threads < 1) throw ValidationError("--threads must be >= 1");
#ifdef _OPENMP
  omp_set_num_threads(*opts.threads);
#endif
}

std::string one_line(std::string s) {
  for (char &c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

// Runs a command body, turns exceptions into exit codes and writes the
// metrics file. The body fills `outcome.metrics` and may set a nonzero code.
CommandOutcome guarded(const CommonOptions &opts, const char *name, std::ostream &out,
                       const std::function<void(CommandOutcome &)> &body) {
  CommandOutcome outcome;
  try {
    apply_threads(opts);
    body(outcome);
  } catch (const ValidationError &e) {
    outcome.exit_code = kValidation;
    outcome.error = e.what();
  } catch (const IndexError &e) {
    outcome.exit_code = kValidation;
    outcome.error = e.what();
  } catch (const NumericalError &e) {
    outcome.exit_code = kNumerical;
    outcome.error = std::string(e.what()) + " (iteration " + std::to_string(e.iteration()) + ")";
  } catch (const FormatError &e) {
    outcome.exit_code = kIo;
    outcome.error = e.what();
  } catch (const IoError &e) {
    outcome.exit_code = kIo;
    outcome.error = e.what();
  } catch (const fs::filesystem_error &e) {
    outcome.exit_code = kIo;
    outcome.error = e.what();
  } catch (const nlohmann::json::exception &e) {
    outcome.exit_code = kIo;
    outcome.error = std::string("malformed manifest: ") + e.what();
  }
  outcome.error = one_line(outcome.error);
  if (outcome.exit_code != kOk && outcome.error.empty()) outcome.error = std::string(name) + " failed";

  outcome.metrics["command"] = name;
  outcome.metrics["seed"] = std::to_string(opts.seed);
  outcome.metrics["threads"] = std::to_string(max_threads());
  outcome.metrics["exit_code"] = std::to_string(outcome.exit_code);
  if (!outcome.error.empty()) outcome.metrics["error"] = outcome.error;

  out << name << ": seed=" << opts.seed << " exit=" << outcome.exit_code << "\n";
  if (outcome.exit_code != kOk) out << "error: " << outcome.error << "\n";

  if (!opts.metrics_out.empty()) {
    try {
      write_metrics(outcome.metrics, opts.metrics_out);
    } catch (const IoError &e) {
      if (outcome.exit_code == kOk) {
        outcome.exit_code = kIo;
        outcome.error = e.what();
        out << "error: " << outcome.error << "\n";
      }
    }
  }
  out.flush();
  return outcome;
}

std::string canonical_description(const ScanConfig &cfg) {
  std::ostringstream s;
  const auto &g = cfg.grid;
  s << "grid " << g.m_s() << " " << g.m_z() << " " << g17(g.spacing()) << " " << g17(g.origin().x) << " "
    << g17(g.origin().y) << " " << g17(g.origin().z) << "\n";
  for (const auto &c : cfg.aperture.columns()) s << "column " << g17(c.center_xy.x) << " " << g17(c.center_xy.y) << "\n";
  s << "heights";
  for (double h : cfg.aperture.heights()) s << " " << g17(h);
  s << "\nradii";
  for (double r : cfg.aperture.radii()) s << " " << g17(r);
  s << "\nsampling " << g17(cfg.sampling.points_per_voxel_arc) << " " << cfg.sampling.min_points_per_arc << "\n";
  return s.str();
}

std::string fingerprint_of(const ScanConfig &cfg) {
  const std::string text = canonical_description(cfg);
  const auto *p = reinterpret_cast<const std::uint8_t *>(text.data());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(codec::checksum(std::span(p, text.size()))));
  return buf;
}

std::string a12_name(std::size_t c) { return "a12_col" + std::to_string(c) + ".srtcrt"; }
constexpr const char *kA34Name = "a34.srtcrt";
constexpr const char *kManifestName = "manifest.json";

// Loads cached matrices when a directory is given, otherwise builds them.
ApertureOperator obtain_operator(const ScanConfig &cfg, const std::string &matrices_dir, std::ostream &out,
                                 CommandOutcome &outcome) {
  if (matrices_dir.empty()) {
    const auto t0 = Clock::now();
    auto op = ApertureOperator::build(cfg.grid, cfg.aperture, cfg.sampling);
    out << "built " << op.n_columns() + 1 << " matrices in " << fmt("%.3f", seconds_since(t0)) << " s\n";
    outcome.metrics["matrices_source"] = "built";
    return op;
  }
  const fs::path dir(matrices_dir);
  const fs::path manifest_path = dir / kManifestName;
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open " + manifest_path.string());
  const auto manifest = nlohmann::json::parse(in);
  const std::string want = fingerprint_of(cfg);
  const std::string have = manifest.at("fingerprint").get<std::string>();
  if (have != want) {
    throw ValidationError("matrix cache in " + matrices_dir + " was built for a different config (fingerprint " +
                          have + ", expected " + want + ")");
  }
  const auto n_columns = manifest.at("n_columns").get<std::size_t>();
  if (n_columns != cfg.aperture.n_columns()) {
    throw DimensionError("matrix cache has " + std::to_string(n_columns) + " columns, config has " +
                         std::to_string(cfg.aperture.n_columns()));
  }
  const auto t0 = Clock::now();
  std::vector<std::shared_ptr<const SparseOperator>> a12;
  for (std::size_t c = 0; c < n_columns; ++c) {
    a12.push_back(std::make_shared<const SparseOperator>(read_operator((dir / a12_name(c)).string())));
  }
  auto a34 = std::make_shared<const SparseOperator>(read_operator((dir / kA34Name).string()));
  ApertureOperator op(std::move(a12), std::move(a34), cfg.grid, cfg.aperture);
  out << "loaded " << n_columns + 1 << " matrices from cache " << matrices_dir << " in "
      << fmt("%.3f", seconds_since(t0)) << " s\n";
  outcome.metrics["matrices_source"] = "cache";
  return op;
}

} // namespace

std::string config_fingerprint(const std::string &config_path) { return fingerprint_of(load_config(config_path)); }

void write_metrics(const std::map<std::string, std::string> &metrics, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const auto &[k, v] : metrics) out << k << " = " << v << "\n";
  if (!out) throw IoError("write failed: " + path);
}

CommandOutcome cmd_build(const CommonOptions &opts, const std::string &out_dir, std::ostream &out) {
  return guarded(opts, "build", out, [&](CommandOutcome &outcome) {
    const auto cfg = load_config(opts.config_path);
    const auto t0 = Clock::now();
    const auto op = ApertureOperator::build(cfg.grid, cfg.aperture, cfg.sampling);
    const double build_s = seconds_since(t0);

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    std::size_t nnz_a12 = 0, bytes = 0;
    nlohmann::json files = nlohmann::json::array();
    for (std::size_t c = 0; c < op.n_columns(); ++c) {
      const auto &a = op.column(c).a12();
      write_operator(a, (dir / a12_name(c)).string());
      files.push_back(a12_name(c));
      nnz_a12 += a.nnz();
      bytes += a.storage_bytes();
    }
    write_operator(op.shared_a34(), (dir / kA34Name).string());
    bytes += op.shared_a34().storage_bytes();

    nlohmann::json manifest;
    manifest["fingerprint"] = fingerprint_of(cfg);
    manifest["n_columns"] = op.n_columns();
    manifest["a12"] = files;
    manifest["a34"] = kA34Name;
    {
      std::ofstream m(dir / kManifestName);
      if (!m) throw IoError("cannot open " + (dir / kManifestName).string() + " for writing");
      m << manifest.dump(2) << "\n";
      if (!m) throw IoError("write failed: " + (dir / kManifestName).string());
    }

    out << "columns " << op.n_columns() << ", heights " << cfg.aperture.n_heights() << ", radii "
        << cfg.aperture.n_radii() << "\n";
    out << "nnz a12 (all columns) " << nnz_a12 << ", nnz a34 " << op.shared_a34().nnz() << "\n";
    out << "storage " << bytes << " bytes, build " << fmt("%.3f", build_s) << " s\n";
    out << "wrote " << op.n_columns() + 1 << " matrices to " << out_dir << "\n";
    outcome.metrics["nnz_a12"] = std::to_string(nnz_a12);
    outcome.metrics["nnz_a34"] = std::to_string(op.shared_a34().nnz());
    outcome.metrics["bytes"] = std::to_string(bytes);
    outcome.metrics["build_seconds"] = g17(build_s);
    outcome.metrics["fingerprint"] = fingerprint_of(cfg);
  });
}

CommandOutcome cmd_forward(const CommonOptions &opts, const std::string &matrices_dir, const std::string &image_path,
                           const std::string &out_path, std::ostream &out) {
  return guarded(opts, "forward", out, [&](CommandOutcome &outcome) {
    const auto cfg = load_config(opts.config_path);
    const Image3D f = read_image(image_path, cfg.grid);
    const auto op = obtain_operator(cfg, matrices_dir, out, outcome);
    const auto t0 = Clock::now();
    const Sinogram y = forward_aperture(op, f);
    const double s = seconds_since(t0);
    write_sinogram(y, out_path);
    out << "forward " << fmt("%.4f", s) << " s, sinogram (" << y.shape().n_radii << "," << y.shape().n_heights << ","
        << y.shape().n_columns << ") written to " << out_path << "\n";
    outcome.metrics["forward_seconds"] = g17(s);
    outcome.metrics["measurements"] = std::to_string(y.values().size());
  });
}

CommandOutcome cmd_adjoint(const CommonOptions &opts, const std::string &matrices_dir,
                           const std::string &sinogram_path, const std::string &out_path, std::ostream &out) {
  return guarded(opts, "adjoint", out, [&](CommandOutcome &outcome) {
    const auto cfg = load_config(opts.config_path);
    const Sinogram y = read_sinogram(sinogram_path, SinogramShape::of(cfg.aperture));
    const auto op = obtain_operator(cfg, matrices_dir, out, outcome);
    const auto t0 = Clock::now();
    const Image3D g = adjoint_aperture(op, y);
    const double s = seconds_since(t0);
    write_image(g, out_path);
    out << "adjoint " << fmt("%.4f", s) << " s, image (" << cfg.grid.m_s() << "," << cfg.grid.m_s() << ","
        << cfg.grid.m_z() << ") written to " << out_path << "\n";
    outcome.metrics["adjoint_seconds"] = g17(s);
    outcome.metrics["voxels"] = std::to_string(g.values().size());
  });
}

CommandOutcome cmd_verify(const CommonOptions &opts, std::ostream &out) {
  return guarded(opts, "verify", out, [&](CommandOutcome &outcome) {
    const auto cfg = load_config(opts.config_path);
    const auto checks = verify::run_all(cfg, opts.seed);
    std::size_t failed = 0;
    for (std::size_t n = 0; n < checks.size(); ++n) {
      const auto &c = checks[n];
      out << (c.passed ? "PASS  " : "FAIL  ") << c.name << ": " << fmt("%.3e", c.measured) << (c.below ? " <= " : " >= ")
          << fmt("%.1e", c.threshold) << "\n";
      const std::string key = "check" + std::to_string(n);
      outcome.metrics[key + ".name"] = c.name;
      outcome.metrics[key + ".measured"] = g17(c.measured);
      outcome.metrics[key + ".threshold"] = g17(c.threshold);
      outcome.metrics[key + ".passed"] = c.passed ? "true" : "false";
      if (!c.passed) ++failed;
    }
    out << checks.size() - failed << "/" << checks.size() << " checks passed\n";
    outcome.metrics["checks_failed"] = std::to_string(failed);
    if (failed > 0) {
      outcome.exit_code = kNumerical;
      outcome.error = std::to_string(failed) + " verification check(s) failed";
    }
  });
}

CommandOutcome cmd_bench(const CommonOptions &opts, const std::vector<std::size_t> &sizes, double min_seconds,
                         std::ostream &out) {
  return guarded(opts, "bench", out, [&](CommandOutcome &outcome) {
    if (sizes.size() < 2) throw ValidationError("bench needs at least two sizes");
    const auto cfg = load_config(opts.config_path);
    const auto summary = bench::run(cfg, sizes, min_seconds);
    out << "   m_s    voxels  N_c  N_h  N_l      nnz_a12   nnz_a34  build_s  aperture_s  column_s\n";
    for (const auto &p : summary.points) {
      char line[160];
      std::snprintf(line, sizeof line, "%6zu %9zu %4zu %4zu %4zu %12zu %9zu %8.3f %11.5f %9.5f\n", p.m_s, p.voxels,
                    p.n_columns, p.n_heights, p.n_radii, p.nnz_a12, p.nnz_a34, p.build_seconds, p.aperture_seconds,
                    p.column_seconds);
      out << line;
      const std::string key = "m_s" + std::to_string(p.m_s);
      outcome.metrics[key + ".aperture_seconds"] = g17(p.aperture_seconds);
      outcome.metrics[key + ".column_seconds"] = g17(p.column_seconds);
      outcome.metrics[key + ".nnz"] = std::to_string(p.nnz_a12 + p.nnz_a34);
    }
    out << "aperture forward time ~ M^" << fmt("%.3f", summary.aperture_time.exponent) << " (r^2 "
        << fmt("%.4f", summary.aperture_time.r_squared) << ")\n";
    out << "single column time    ~ M^" << fmt("%.3f", summary.column_time.exponent) << "\n";
    out << "total nnz             ~ M^" << fmt("%.3f", summary.nnz.exponent) << "\n";
    outcome.metrics["exponent.aperture_time"] = g17(summary.aperture_time.exponent);
    outcome.metrics["exponent.column_time"] = g17(summary.column_time.exponent);
    outcome.metrics["exponent.nnz"] = g17(summary.nnz.exponent);
  });
}

CommandOutcome cmd_reconstruct(const CommonOptions &opts, const std::string &sinogram_path,
                               const std::string &out_path, int max_iter, double tol,
                               const std::string &matrices_dir, std::ostream &out) {
  return guarded(opts, "reconstruct", out, [&](CommandOutcome &outcome) {
    const auto cfg = load_config(opts.config_path);
    const Sinogram y = read_sinogram(sinogram_path, SinogramShape::of(cfg.aperture));
    auto op = obtain_operator(cfg, matrices_dir, out, outcome);
    op.materialize_transposes();
    const auto t0 = Clock::now();
    const auto report = cgls(op, y, max_iter, tol);
    const double s = seconds_since(t0);
    write_image(report.final_image, out_path);

    const std::string report_path = out_path + ".report.txt";
    std::ofstream r(report_path);
    if (!r) throw IoError("cannot open " + report_path + " for writing");
    r << "# iteration relative_residual\n";
    for (std::size_t k = 0; k < report.residual_history.size(); ++k) {
      r << k << " " << g17(report.residual_history[k]) << "\n";
    }
    if (!r) throw IoError("write failed: " + report_path);

    const double final_residual = report.residual_history.back();
    out << "cgls " << report.iterations << " iterations, relative residual " << fmt("%.4e", final_residual) << ", "
        << fmt("%.3f", s) << " s\n";
    out << "image written to " << out_path << ", residual history to " << report_path << "\n";
    outcome.metrics["iterations"] = std::to_string(report.iterations);
    outcome.metrics["final_residual"] = g17(final_residual);
    outcome.metrics["solve_seconds"] = g17(s);
  });
}

CommandOutcome cmd_phantom(const CommonOptions &opts, const std::string &kind, double width, double amplitude,
                           const std::string &out_path, std::ostream &out) {
  return guarded(opts, "phantom", out, [&](CommandOutcome &outcome) {
    const auto cfg = load_config(opts.config_path);
    const auto &g = cfg.grid;
    const Vec3 lo = g.center(0, 0, 0);
    const Vec3 hi = g.center(g.m_s() - 1, g.m_s() - 1, g.m_z() - 1);
    const Vec3 mid{0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y), 0.5 * (lo.z + hi.z)};
    const double fov = g.spacing() * static_cast<double>(g.m_s());
    const double w = width > 0.0 ? width : 0.15 * fov;
    const auto f = oracle::make_phantom({oracle::phantom_kind_from_string(kind), mid, w, amplitude}, g);
    write_image(f, out_path);
    out << kind << " phantom, width " << g17(w) << " m, written to " << out_path << "\n";
    outcome.metrics["kind"] = kind;
    outcome.metrics["width"] = g17(w);
  });
}

} // namespace srt::cli
