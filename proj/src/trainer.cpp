#include "anchorlab/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "anchorlab/adam.hpp"
#include "anchorlab/rng.hpp"

namespace anchorlab {

void TrainConfig::validate() const {
  if (architecture.latent_dim == 0) throw std::invalid_argument("latent dim must be positive");
  if (architecture.input_dim != 3) throw std::invalid_argument("input dim must be 3 (RGB)");
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  if (batch_size < 2) throw std::invalid_argument("batch size must be >= 2");
  if (grid_subdivisions < 2) throw std::invalid_argument("grid subdivisions must be >= 2");
  if (separation_power <= 0 || separation_power % 2 != 0) {
    throw std::invalid_argument("separation power must be a positive even integer");
  }
  if (!timeline.has_channel(channels::kEta)) {
    throw std::invalid_argument("timeline lacks the '" + std::string(channels::kEta) + "' channel");
  }
  for (const auto& c : concepts) {
    anchorlab::validate(c, architecture.latent_dim);
    if (c.application == Application::kLabeledOnly) label_probability(c.label);
    if (!timeline.has_channel(c.weight_channel)) {
      throw std::invalid_argument("concept '" + c.name + "' uses missing channel '" +
                                  c.weight_channel + "'");
    }
  }
}

std::vector<Color> sample_batch(std::span<const Color> grid, std::size_t batch_size,
                                std::mt19937_64& rng) {
  if (grid.empty()) throw std::invalid_argument("sample_batch: empty grid");
  std::vector<Color> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(grid[uniform_index(rng, grid.size())]);
  return batch;
}

namespace {

LossWeights weights_at(const TrainConfig& config, std::int64_t step) {
  LossWeights w;
  w.separation = config.timeline.has_channel(channels::kSeparation)
                     ? config.timeline.value_at(channels::kSeparation, step)
                     : 0.0;
  for (const auto& c : config.concepts) w.concepts.push_back(config.timeline.value_at(c.weight_channel, step));
  return w;
}

}  // namespace

RunRecord train(const TrainConfig& config) {
  config.validate();
  auto init_rng = make_stream(config.seed, RngStream::kInit);
  auto batch_rng = make_stream(config.seed, RngStream::kBatches);
  auto label_rng = make_stream(config.seed, RngStream::kLabels);

  RunRecord run;
  run.seed = config.seed;
  run.model = SphericalAutoencoder(config.architecture, init_rng);
  run.label_counts.assign(config.concepts.size(), 0);
  run.history.reserve(static_cast<std::size_t>(config.steps));

  const std::vector<Color> grid = rgb_grid(config.grid_subdivisions);

  // Only labeled-only concepts consume label draws.
  std::vector<std::size_t> labeled;
  std::vector<LabelProbability> probabilities;
  for (std::size_t k = 0; k < config.concepts.size(); ++k) {
    if (config.concepts[k].application == Application::kLabeledOnly) {
      labeled.push_back(k);
      probabilities.push_back(label_probability(config.concepts[k].label));
    }
  }

  auto params = run.model.parameters();
  Adam optimizer(params);

  for (std::int64_t step = 0; step < config.steps; ++step) {
    const double eta = config.timeline.value_at(channels::kEta, step);
    const LossWeights weights = weights_at(config, step);
    const std::vector<Color> batch = sample_batch(grid, config.batch_size, batch_rng);

    LabelMatrix labels(batch.size(), std::vector<bool>(config.concepts.size(), false));
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto drawn = draw_labels(batch[i], probabilities, label_rng);
      for (std::size_t j = 0; j < labeled.size(); ++j) labels[i][labeled[j]] = drawn[j];
      for (std::size_t k = 0; k < config.concepts.size(); ++k) {
        if (applies(config.concepts[k], labels[i][k])) ++run.label_counts[k];
      }
    }

    Tape tape;
    std::vector<Var> inputs, outputs, latents;
    inputs.reserve(batch.size());
    outputs.reserve(batch.size());
    latents.reserve(batch.size());
    try {
      for (const Color& c : batch) {
        const auto pass = run.model.forward(tape, c.rgb());
        inputs.push_back(tape.constant(std::vector<double>(c.rgb().begin(), c.rgb().end())));
        outputs.push_back(pass.output);
        latents.push_back(pass.unit_latent);
      }
    } catch (const NearZeroNorm& e) {
      throw RunFailure(step, e.what());
    }
    const TapedLoss loss = taped_total_loss(tape, inputs, outputs, latents, labels,
                                            config.concepts, weights, config.separation_power);
    if (!std::isfinite(loss.breakdown.total)) {
      throw RunFailure(step, "non-finite loss");
    }
    run.model.zero_grad();
    tape.backward(loss.total);
    optimizer.step(eta);

    run.history.push_back(StepRecord{step, eta, weights, loss.breakdown});
    run.steps_completed = step + 1;
  }
  return run;
}

std::vector<SweepEntry> sweep(const TrainConfig& config, std::size_t n_seeds,
                              std::size_t jobs) {
  if (n_seeds == 0) throw std::invalid_argument("sweep: need at least one seed");
  config.validate();
  std::vector<SweepEntry> entries(n_seeds);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_seeds; i = next++) {
      TrainConfig c = config;
      c.seed = config.seed + i;
      SweepEntry& e = entries[i];
      e.seed = c.seed;
      try {
        e.record = train(c);
      } catch (const RunFailure& f) {
        e.failure = f.what();
        e.failed_step = f.step();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(jobs, 1, n_seeds);
  if (n_threads == 1) {
    worker();
    return entries;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return entries;
}

}  // namespace anchorlab
