#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "anchorlab/autoencoder.hpp"
#include "anchorlab/color.hpp"
#include "anchorlab/losses.hpp"
#include "anchorlab/timeline.hpp"

namespace anchorlab {

struct TrainConfig {
  SphericalAutoencoder::Architecture architecture;
  std::vector<ConceptSpec> concepts;
  Timeline timeline;
  std::int64_t steps = 1500;
  std::size_t batch_size = 64;
  std::size_t grid_subdivisions = 8;
  std::uint64_t seed = 0;
  int separation_power = 100;

  /// Throws std::invalid_argument on inconsistent settings (concept dims
  /// beyond the latent size, missing timeline channels, batch < 2, ...).
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// A run aborted because the latent collapsed to the origin.
class RunFailure : public std::runtime_error {
 public:
  RunFailure(std::int64_t step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

/// Scheduled weights and resulting losses for one optimization step.
struct StepRecord {
  std::int64_t step = 0;
  double eta = 0.0;
  LossWeights weights;
  LossBreakdown loss;
};

struct RunRecord {
  std::uint64_t seed = 0;
  SphericalAutoencoder model;
  std::vector<StepRecord> history;
  /// Per concept: how many samples the term was applied to.
  std::vector<std::uint64_t> label_counts;
  std::int64_t steps_completed = 0;
};

/// Uniform draws with replacement from `grid`.
std::vector<Color> sample_batch(std::span<const Color> grid, std::size_t batch_size,
                                std::mt19937_64& rng);

/// Runs the full scheduled optimization. Throws RunFailure on a latent
/// collapse, reporting the step index.
RunRecord train(const TrainConfig& config);

/// Outcome of one seed in a sweep: either a record or a failure message.
struct SweepEntry {
  std::uint64_t seed = 0;
  std::optional<RunRecord> record;
  std::string failure;
  std::int64_t failed_step = -1;
};

/// Trains seeds config.seed .. config.seed + n_seeds - 1 using up to `jobs`
/// worker threads. Results are ordered by seed regardless of scheduling.
std::vector<SweepEntry> sweep(const TrainConfig& config, std::size_t n_seeds,
                              std::size_t jobs = 1);

}  // namespace anchorlab
