#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "anchorlab/evaluation.hpp"
#include "anchorlab/interventions.hpp"
#include "anchorlab/trainer.hpp"
#include "json.hpp"

namespace anchorlab {

struct SimilaritySetting {
  int power = 2;
  SimilarityBasis basis = SimilarityBasis::kTarget;
  bool operator==(const SimilaritySetting&) const = default;
};

struct EvaluationOptions {
  std::string target = "red";
  /// Intervention whose selectivity drives model selection.
  std::string selection;
  /// Per intervention name; missing entries use the defaults above.
  std::map<std::string, SimilaritySetting> similarity;
  std::size_t seeds = 60;
  PlotOptions plot;
  bool operator==(const EvaluationOptions&) const = default;
};

/// Everything one experiment needs: training setup, interventions to study,
/// how to score them, and where to write results.
struct ExperimentConfig {
  std::string name;
  TrainConfig training;
  std::vector<InterventionSpec> interventions;
  EvaluationOptions evaluation;
  /// Relative paths resolve against ANCHORLAB_OUT_DIR (or ./runs).
  std::string output_dir;

  /// Throws std::invalid_argument on any inconsistency.
  void validate() const;
  std::vector<EvalCondition> conditions() const;
  bool operator==(const ExperimentConfig&) const = default;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Rejects unknown keys and schema versions other than kSchemaVersion.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// 16 hex digits of FNV-1a over the canonical JSON dump.
std::string config_hash(const ExperimentConfig& config);

/// Named experiments shipped with the library.
const std::vector<std::string>& preset_names();
ExperimentConfig preset_config(const std::string& name);

/// Maps experiment ids (2.4.1, 2.9.1, 2.5.1, 2.7.1) to preset names.
/// Throws std::invalid_argument for unknown ids.
std::string preset_for_experiment(const std::string& id);
const std::vector<std::string>& experiment_ids();

}  // namespace anchorlab
