// Command-line harness for the desk-scale experiment suite.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>

#include "skinpar/config.hpp"
#include "skinpar/errors.hpp"
#include "skinpar/experiments.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parareal for brick-and-mortar diffusion: desk-scale experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, backend;
  int cores = 0;
  bool quiet = false;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"convergence", "defect at T per iteration for each n_sub"},
      {"coefficients", "jumping vs constant coefficients"},
      {"error-over-time", "coarse/fine error and d^1, d^2 per boundary"},
      {"speedup", "measured and modeled speedup, imbalance model curves"},
      {"weak-scaling", "desk-scaled weak-scaling ladder"},
      {"export", "serial fine snapshots as .field files"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (default: the config's output_dir)");
    sub->add_option("--backend", backend, "seq or par")->check(CLI::IsMember({"seq", "par"}));
    sub->add_option("--cores", cores, "cores available to the concurrent backend")->check(CLI::NonNegativeNumber);
    sub->add_flag("-q,--quiet", quiet, "no progress output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  skinpar::ExperimentConfig cfg;
  skinpar::RunOptions opt;
  try {
    cfg = skinpar::load_config(config_path);
    if (!backend.empty()) opt.backend = skinpar::parse_backend(backend);
  } catch (const skinpar::ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  }
  opt.cores = cores;
  if (!quiet) opt.log = &std::cerr;
  const std::filesystem::path dir = out_dir.empty() ? cfg.experiment.output_dir : out_dir;

  try {
    const auto start = std::chrono::steady_clock::now();
    const skinpar::ExperimentOutput out = skinpar::run_experiment(command, cfg, opt);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& line : out.summary) std::cout << line << '\n';
    for (const auto& f : skinpar::write_outputs(out, dir, command, cfg)) std::cout << "wrote " << f.string() << '\n';
    std::cout << command << " finished in " << elapsed << " s (config " << skinpar::config_hash(cfg) << ")\n";
  } catch (const skinpar::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const skinpar::GeometryError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const skinpar::ResolutionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const skinpar::StepCountError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const skinpar::StepFailure& e) {
    std::cerr << "solver failure";
    if (e.iteration() >= 0) std::cerr << " (iteration " << e.iteration() << ", subinterval " << e.subinterval() << ")";
    std::cerr << ": " << e.what() << '\n';
    return kSolverError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverError;
  }
  return 0;
}
