#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "anchorlab/tape.hpp"
#include "json.hpp"

namespace anchorlab {

enum class ConceptKind { kAnchor, kSubspace, kAntiAnchor, kAntiSubspace };

enum class Application {
  kLabeledOnly,  // term applied only where the drawn label is 1
  kAllSamples,   // term applied to every sample
};

std::string to_string(ConceptKind kind);
ConceptKind parse_concept_kind(const std::string& s);
std::string to_string(Application a);
Application parse_application(const std::string& s);

inline bool is_attractive(ConceptKind k) {
  return k == ConceptKind::kAnchor || k == ConceptKind::kSubspace;
}
inline bool uses_direction(ConceptKind k) {
  return k == ConceptKind::kAnchor || k == ConceptKind::kAntiAnchor;
}

/// One regularized concept. Dimension indices are 0-based.
struct ConceptSpec {
  std::string name;
  ConceptKind kind = ConceptKind::kAnchor;
  std::vector<double> direction;
  std::vector<std::size_t> dims;
  /// Label-probability function name; only used by labeled-only terms.
  std::string label;
  Application application = Application::kLabeledOnly;
  /// Timeline channel that supplies this concept's weight.
  std::string weight_channel;

  bool operator==(const ConceptSpec&) const = default;
};

/// Spec with the conventional application for its kind: attractive terms on
/// labeled samples, repulsive terms on all samples.
ConceptSpec make_concept(std::string name, ConceptKind kind, std::vector<double> direction,
                         std::vector<std::size_t> dims, std::string label,
                         std::string weight_channel);

/// {"name", "kind", "direction" | "dims", "label", "application", "weight_channel"};
/// "application" defaults to the conventional one for the kind.
nlohmann::json to_json(const ConceptSpec& spec);
ConceptSpec concept_from_json(const nlohmann::json& j);

/// Throws std::invalid_argument when the spec is inconsistent with `latent_dim`
/// (non-unit direction, empty or out-of-range dims, missing label, ...).
void validate(const ConceptSpec& spec, std::size_t latent_dim);

// Per-sample terms. Latents are expected to be unit length.
double task_loss(std::span<const double> x, std::span<const double> y);
double anchor_term(std::span<const double> z, std::span<const double> v);
double subspace_term(std::span<const double> z, std::span<const std::size_t> dims);
double anti_anchor_term(std::span<const double> z, std::span<const double> v);
double anti_subspace_term(std::span<const double> z, std::span<const std::size_t> dims);

double concept_term(const ConceptSpec& spec, std::span<const double> z);
std::vector<double> concept_term_gradient(const ConceptSpec& spec,
                                          std::span<const double> z);

/// Mean over ordered pairs i != j of (z_i . z_j)^p. Requires B >= 2 and even p.
double separation(std::span<const std::vector<double>> batch, int power);

struct LossWeights {
  double separation = 0.0;
  std::vector<double> concepts;
};

/// Raw (unweighted) batch means of every term plus their weighted sum.
struct LossBreakdown {
  double task = 0.0;
  double separation = 0.0;
  std::vector<double> concepts;
  double weighted_separation = 0.0;
  std::vector<double> weighted_concepts;
  double total = 0.0;
};

/// Per-sample, per-concept gates: 1 where the term applies.
using LabelMatrix = std::vector<std::vector<bool>>;

/// Gate for one sample: labels for labeled-only terms, always 1 otherwise.
bool applies(const ConceptSpec& spec, bool label);

/// Task mean + weight * separation + sum of weight * concept means. Concept
/// terms are averaged over the full batch, not over the gated count.
LossBreakdown total_loss(std::span<const std::vector<double>> inputs,
                         std::span<const std::vector<double>> reconstructions,
                         std::span<const std::vector<double>> latents,
                         const LabelMatrix& labels, std::span<const ConceptSpec> concepts,
                         const LossWeights& weights, int separation_power);

// Taped variants for training.
Var taped_separation(Tape& tape, std::span<const Var> latents, int power);
Var taped_concept_mean(Tape& tape, const ConceptSpec& spec, std::span<const Var> latents,
                       const std::vector<bool>& gates);

struct TapedLoss {
  Var total;
  LossBreakdown breakdown;
};

TapedLoss taped_total_loss(Tape& tape, std::span<const Var> inputs,
                           std::span<const Var> reconstructions,
                           std::span<const Var> latents, const LabelMatrix& labels,
                           std::span<const ConceptSpec> concepts,
                           const LossWeights& weights, int separation_power);

}  // namespace anchorlab
