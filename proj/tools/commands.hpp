#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace srt::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2, kIo = 3 };

struct CommandOutcome {
  int exit_code = kOk;
  std::string error; // one-line cause when exit_code != 0
  std::map<std::string, std::string> metrics;
};

struct CommonOptions {
  std::string config_path;
  std::uint64_t seed = 1;
  std::optional<int> threads;
  std::string metrics_out; // empty: no metrics file
};

// Each command prints a human-readable summary to `out` and never throws;
// failures are reported through the exit code and `error`.
CommandOutcome cmd_build(const CommonOptions &opts, const std::string &out_dir, std::ostream &out);
CommandOutcome cmd_forward(const CommonOptions &opts, const std::string &matrices_dir, const std::string &image_path,
                           const std::string &out_path, std::ostream &out);
CommandOutcome cmd_adjoint(const CommonOptions &opts, const std::string &matrices_dir,
                           const std::string &sinogram_path, const std::string &out_path, std::ostream &out);
CommandOutcome cmd_verify(const CommonOptions &opts, std::ostream &out);
CommandOutcome cmd_bench(const CommonOptions &opts, const std::vector<std::size_t> &sizes, double min_seconds,
                         std::ostream &out);
CommandOutcome cmd_reconstruct(const CommonOptions &opts, const std::string &sinogram_path,
                               const std::string &out_path, int max_iter, double tol,
                               const std::string &matrices_dir, std::ostream &out);
CommandOutcome cmd_phantom(const CommonOptions &opts, const std::string &kind, double width, double amplitude,
                           const std::string &out_path, std::ostream &out);

// Flat "key = value" text, one entry per line, keys sorted.
void write_metrics(const std::map<std::string, std::string> &metrics, const std::string &path);

// Stable hash of everything in a config that affects the matrices.
std::string config_fingerprint(const std::string &config_path);

} // namespace srt::cli
