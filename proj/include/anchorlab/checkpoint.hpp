#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "anchorlab/autoencoder.hpp"
#include "anchorlab/interventions.hpp"
#include "anchorlab/losses.hpp"
#include "json.hpp"

namespace anchorlab {

inline constexpr int kSchemaVersion = 1;

/// Trained (and possibly intervened) weights plus provenance.
struct Checkpoint {
  SphericalAutoencoder model;
  std::uint64_t seed = 0;
  std::int64_t step = 0;
  /// Original index of each remaining latent dimension; pruning removes ids.
  std::vector<std::size_t> latent_ids;
  std::vector<ConceptSpec> concepts;
  std::vector<InterventionSpec> interventions_applied;
  std::string config_hash;
};

/// Fresh checkpoint with identity latent ids.
Checkpoint make_checkpoint(SphericalAutoencoder model, std::uint64_t seed, std::int64_t step,
                           std::vector<ConceptSpec> concepts, std::string config_hash);

nlohmann::json to_json(const Checkpoint& c);
/// Throws std::invalid_argument on schema mismatch or inconsistent shapes.
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Rewrites an intervention's dimension ids (which refer to the original
/// latent layout) into current positions. Throws std::invalid_argument if a
/// dimension has been pruned away.
InterventionSpec resolve_dims(const Checkpoint& c, const InterventionSpec& spec);

/// The checkpoint's model with every recorded inference-time intervention
/// (suppress, repel, suppress_subspace) composed in order.
IntervenedModel runtime_model(const Checkpoint& c);

/// Bakes a weight intervention into the checkpoint and records it. Inference
/// interventions are only recorded. Returns the model to evaluate with.
IntervenedModel intervene(Checkpoint& c, const InterventionSpec& spec);

}  // namespace anchorlab
