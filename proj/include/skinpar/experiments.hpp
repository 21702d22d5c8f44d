#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "skinpar/config.hpp"

namespace skinpar {

/// Numeric result table; flags are stored as 0/1.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  /// Extra comment lines written between the provenance line and the header.
  std::vector<std::string> notes;

  std::size_t column(const std::string& c) const;
  double at(std::size_t row, const std::string& c) const { return rows.at(row).at(column(c)); }
};

struct RunOptions {
  std::optional<Backend> backend;  // overrides the config
  int cores = 0;                   // 0: config value, then the hardware
  std::ostream* log = nullptr;     // progress lines
};

/// Everything a command produced. Files are written by `write_outputs`, after
/// all timed work has finished.
struct ExperimentOutput {
  std::vector<Table> tables;
  struct Snapshot {
    std::string file;
    StateVector state;
  };
  std::vector<Snapshot> snapshots;
  std::vector<std::string> summary;
};

ExperimentOutput cmd_convergence(const ExperimentConfig& cfg, const RunOptions& opt = {});
ExperimentOutput cmd_coefficients(const ExperimentConfig& cfg, const RunOptions& opt = {});
ExperimentOutput cmd_error_over_time(const ExperimentConfig& cfg, const RunOptions& opt = {});
ExperimentOutput cmd_speedup(const ExperimentConfig& cfg, const RunOptions& opt = {});
ExperimentOutput cmd_weak_scaling(const ExperimentConfig& cfg, const RunOptions& opt = {});
ExperimentOutput cmd_export_solution(const ExperimentConfig& cfg, const RunOptions& opt = {});

/// Dispatches on "convergence", "coefficients", "error-over-time", "speedup",
/// "weak-scaling" or "export". Throws ConfigError for unknown names or when
/// the config's own selector names a different experiment.
ExperimentOutput run_experiment(const std::string& command, const ExperimentConfig& cfg,
                                const RunOptions& opt = {});

/// CSV with a "# ..." provenance line carrying the config hash, optional
/// note lines, then the header row.
void write_csv(std::ostream& out, const Table& table, const std::string& command,
               const ExperimentConfig& cfg);
/// Writes every table as <name>.csv and every snapshot into `dir`.
std::vector<std::filesystem::path> write_outputs(const ExperimentOutput& out,
                                                 const std::filesystem::path& dir,
                                                 const std::string& command,
                                                 const ExperimentConfig& cfg);

/// First k with d^k at T below `threshold`, or -1.
int iterations_to_accuracy(const std::vector<double>& defect_at_end, double threshold);

}  // namespace skinpar
