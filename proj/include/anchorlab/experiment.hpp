#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "anchorlab/checkpoint.hpp"
#include "anchorlab/config.hpp"
#include "anchorlab/evaluation.hpp"
#include "anchorlab/trainer.hpp"
#include "json.hpp"

namespace anchorlab {

/// "# schema_version=1 config_hash=<hash>" line that opens every CSV we write.
std::string csv_preamble(const std::string& hash);

/// Create parent directories and overwrite `path`.
void write_text(const std::filesystem::path& path, const std::string& body);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Per-step scheduled weights and raw loss terms.
std::string loss_csv(const RunRecord& run, const TrainConfig& config, const std::string& hash);

/// Realized label counts next to the count expected from the grid.
nlohmann::json label_summary(const RunRecord& run, const TrainConfig& config,
                             const std::string& hash);

/// Writes checkpoint.json, losses.csv and labels.json into `dir`.
void write_run(const RunRecord& run, const ExperimentConfig& config, const std::filesystem::path& dir);

struct Distribution {
  double mean = 0.0;
  double std = 0.0;  // population
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Summary statistics with linearly interpolated quartiles. Throws on empty input.
Distribution describe(std::vector<double> values);
nlohmann::json to_json(const Distribution& d);

struct SeedResult {
  std::uint64_t seed = 0;
  std::optional<RunRecord> run;
  std::string failure;
  std::int64_t failed_step = -1;
  SelectionMetrics metrics;
  EvalReport report;
};

struct SweepResult {
  std::vector<SeedResult> seeds;
  /// Indices into `seeds` of the successful runs, in seed order.
  std::vector<std::size_t> succeeded;
  /// Present when at least one run succeeded; indices refer to `seeds`.
  std::optional<std::size_t> chosen;
  std::vector<std::size_t> frontier;
  std::optional<Distribution> selectivity;
  std::optional<Distribution> reconstruction;
  std::optional<Distribution> organization;
};

/// Trains and evaluates `n_seeds` seeds starting at config.training.seed and
/// runs pareto selection on the configured selection intervention.
SweepResult run_sweep(const ExperimentConfig& config, std::size_t n_seeds, std::size_t jobs = 1);

nlohmann::json to_json(const SweepResult& sweep, const ExperimentConfig& config);

/// One acceptance check inside a reproduction report.
struct Check {
  std::string name;
  double achieved = 0.0;
  std::string published;
  std::string threshold;
  bool pass = false;
};

struct Reproduction {
  std::string experiment_id;
  ExperimentConfig config;
  SweepResult sweep;
  std::optional<Checkpoint> chosen;
  EvalReport report;
  std::vector<Check> checks;

  bool all_passed() const;
};

/// sweep -> select -> intervene -> evaluate -> compare with published values.
/// `n_seeds` of 0 means config.evaluation.seeds.
Reproduction reproduce(const std::string& experiment_id, std::size_t n_seeds = 0,
                       std::size_t jobs = 1);

/// Same pipeline for an arbitrary config (no published values to compare).
Reproduction run_pipeline(const ExperimentConfig& config, std::size_t n_seeds, std::size_t jobs,
                          const std::string& experiment_id = "");

nlohmann::json to_json(const Reproduction& r);

/// Writes sweep_summary.json, reproduction.json, report.json, the chosen
/// run's artifacts under chosen/, and plot data under plots/.
void write_reproduction(const Reproduction& r, const std::filesystem::path& dir);

/// Plot data for the baseline model and every configured intervention.
PlotData experiment_plot_data(const SphericalAutoencoder& model, const ExperimentConfig& config);

/// Output directory: --out if given, else the config's output_dir under
/// ANCHORLAB_OUT_DIR (default ./runs).
std::filesystem::path output_root(const ExperimentConfig& config,
                                  const std::optional<std::filesystem::path>& out);

}  // namespace anchorlab
