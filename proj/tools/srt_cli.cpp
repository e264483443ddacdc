#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "commands.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

int main(int argc, char **argv) {
  using namespace srt::cli;

  CLI::App app{"Spherical Radon transform for cylindrical apertures"};
  app.require_subcommand(1);

  CommonOptions opts;
  int threads = 0;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::string config_default = SRT_DEFAULT_CONFIG;
  opts.config_path = config_default;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", opts.config_path, "Scan configuration (JSON)")->capture_default_str();
    sub->add_option("--seed", opts.seed, "Seed for all random test vectors")->capture_default_str();
    sub->add_option("--threads", threads, "Worker threads (default: available parallelism)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--metrics-out", opts.metrics_out, "Write key = value metrics to this file");
  };

  std::string out_dir = "matrices";
  auto *build = app.add_subcommand("build", "Build and cache the CRT matrices");
  add_common(build);
  build->add_option("--out-dir", out_dir, "Cache directory")->capture_default_str();

  std::string matrices_dir, image_path, sinogram_path, out_path;
  auto *forward = app.add_subcommand("forward", "Apply the forward operator to an image");
  add_common(forward);
  forward->add_option("--matrices", matrices_dir, "Cache directory from build (default: build in memory)");
  forward->add_option("--image", image_path, "Input image")->required();
  forward->add_option("--out", out_path, "Output sinogram")->required();

  auto *adjoint = app.add_subcommand("adjoint", "Apply the adjoint operator to a sinogram");
  add_common(adjoint);
  adjoint->add_option("--matrices", matrices_dir, "Cache directory from build (default: build in memory)");
  adjoint->add_option("--sinogram", sinogram_path, "Input sinogram")->required();
  adjoint->add_option("--out", out_path, "Output image")->required();

  auto *verify = app.add_subcommand("verify", "Run the adjoint, oracle, sphere-area and gradient checks");
  add_common(verify);

  std::vector<std::size_t> sizes{32, 64, 128};
  double min_seconds = 0.2;
  auto *bench = app.add_subcommand("bench", "Time the forward operator across grid sizes");
  add_common(bench);
  bench->add_option("--sizes", sizes, "Voxels per side")->capture_default_str()->delimiter(',');
  bench->add_option("--min-seconds", min_seconds, "Minimum time per timing batch")->capture_default_str();

  int max_iter = 50;
  double tol = 1e-6;
  auto *reconstruct = app.add_subcommand("reconstruct", "Least-squares reconstruction with CGLS");
  add_common(reconstruct);
  reconstruct->add_option("--matrices", matrices_dir, "Cache directory from build (default: build in memory)");
  reconstruct->add_option("--sinogram", sinogram_path, "Input sinogram")->required();
  reconstruct->add_option("--out", out_path, "Output image; the report goes to <out>.report.txt")->required();
  reconstruct->add_option("--max-iter", max_iter, "Iteration limit")->capture_default_str();
  reconstruct->add_option("--tol", tol, "Relative residual target")->capture_default_str();

  std::string kind = "gaussian";
  double width = 0.0, amplitude = 1.0;
  auto *phantom = app.add_subcommand("phantom", "Write an analytic phantom centered in the grid");
  add_common(phantom);
  phantom->add_option("--kind", kind, "uniform, gaussian, ball or single_voxel")->capture_default_str();
  phantom->add_option("--width", width, "Gaussian sigma or ball radius in meters (default: 0.15 * field of view)");
  phantom->add_option("--amplitude", amplitude, "Peak value")->capture_default_str();
  phantom->add_option("--out", out_path, "Output image")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : kValidation;
  }
  if (threads > 0) opts.threads = threads;

  CommandOutcome outcome;
  if (*build) {
    outcome = cmd_build(opts, out_dir, std::cout);
  } else if (*forward) {
    outcome = cmd_forward(opts, matrices_dir, image_path, out_path, std::cout);
  } else if (*adjoint) {
    outcome = cmd_adjoint(opts, matrices_dir, sinogram_path, out_path, std::cout);
  } else if (*verify) {
    outcome = cmd_verify(opts, std::cout);
  } else if (*bench) {
    outcome = cmd_bench(opts, sizes, min_seconds, std::cout);
  } else if (*reconstruct) {
    outcome = cmd_reconstruct(opts, sinogram_path, out_path, max_iter, tol, matrices_dir, std::cout);
  } else if (*phantom) {
    outcome = cmd_phantom(opts, kind, width, amplitude, out_path, std::cout);
  }
  if (outcome.exit_code != kOk) std::cerr << "error: " << outcome.error << "\n";
  return outcome.exit_code;
}
