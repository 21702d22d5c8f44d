#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "skinpar/discretization.hpp"
#include "skinpar/grid_geometry.hpp"
#include "skinpar/multigrid.hpp"
#include "skinpar/parareal.hpp"
#include "skinpar/propagators.hpp"

namespace skinpar {

enum class CoefficientKind { brick_mortar, uniform };

struct ProblemConfig {
  std::array<int, 3> cells{16, 16, 16};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  BrickMortarSpec geometry;
  CoefficientKind coefficients = CoefficientKind::brick_mortar;
  /// Coefficient of the uniform variant.
  double uniform_d = 1e-3;
  BoundarySpec bc;
  /// End time; unset means the lag time of the domain.
  std::optional<double> t_end;
};

struct SolverConfig {
  MGConfig mg;
};

struct TimeConfig {
  /// Coarse and fine steps over [0, T] (the inverse step sizes in units of T).
  int coarse_steps = 64;
  int fine_steps = 1024;
  std::vector<int> n_sub{4, 8, 16};
  int max_iter = 4;
  std::optional<double> defect_tol;
  bool retirement = true;
  Backend backend = Backend::sequential;
};

struct ExperimentSection {
  /// Optional selector; when set it must match the CLI subcommand.
  std::string name;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  /// Snapshot times as fractions of T.
  std::vector<double> snapshot_fractions{0.0625, 0.5, 1.0};
  int refinement = 4;
  std::vector<double> imbalance_b{0.0, 0.5, 0.75};
  int imbalance_n_iter = 1;
  /// Model validation flags measured speedups below this fraction.
  double flag_below = 0.5;
  /// Worker cores assumed available; 0 asks the hardware.
  int cores = 0;
};

struct WeakScalingConfig {
  int rungs = 3;
};

struct ExperimentConfig {
  ProblemConfig problem;
  SolverConfig solver;
  TimeConfig time;
  ExperimentSection experiment;
  WeakScalingConfig weak_scaling;

  /// Consistency checks not tied to a single line.
  void validate() const;
};

/// Flat "key = value" text with [section] headers; '#' starts a comment.
/// Lists are whitespace separated. Unknown sections or keys, duplicates and
/// malformed values raise ConfigError with the offending line.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_string(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text holding every key; parse(emit(c)) reproduces c.
std::string emit_config(const ExperimentConfig& cfg);

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

Grid3D problem_grid(const ProblemConfig& p);
CoefficientField problem_field(const ProblemConfig& p);
/// Configured end time, or the lag time (domain height)^2 / (6 d_eff).
double resolve_t_end(const ProblemConfig& p, const CoefficientField& field);

PropagatorSpec coarse_spec(const ExperimentConfig& cfg, double t_end);
PropagatorSpec fine_spec(const ExperimentConfig& cfg, double t_end);
PararealConfig parareal_config(const ExperimentConfig& cfg, int n_sub, double t_end);

}  // namespace skinpar
