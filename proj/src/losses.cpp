#include "anchorlab/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "anchorlab/json_util.hpp"

namespace anchorlab {

std::string to_string(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::kAnchor: return "anchor";
    case ConceptKind::kSubspace: return "subspace";
    case ConceptKind::kAntiAnchor: return "anti_anchor";
    case ConceptKind::kAntiSubspace: return "anti_subspace";
  }
  return "?";
}

ConceptKind parse_concept_kind(const std::string& s) {
  if (s == "anchor") return ConceptKind::kAnchor;
  if (s == "subspace") return ConceptKind::kSubspace;
  if (s == "anti_anchor") return ConceptKind::kAntiAnchor;
  if (s == "anti_subspace") return ConceptKind::kAntiSubspace;
  throw std::invalid_argument("unknown concept kind '" + s + "'");
}

std::string to_string(Application a) {
  return a == Application::kLabeledOnly ? "labeled" : "all";
}

Application parse_application(const std::string& s) {
  if (s == "labeled") return Application::kLabeledOnly;
  if (s == "all") return Application::kAllSamples;
  throw std::invalid_argument("unknown application rule '" + s + "'");
}

ConceptSpec make_concept(std::string name, ConceptKind kind, std::vector<double> direction,
                         std::vector<std::size_t> dims, std::string label,
                         std::string weight_channel) {
  ConceptSpec s;
  s.name = std::move(name);
  s.kind = kind;
  s.direction = std::move(direction);
  s.dims = std::move(dims);
  s.label = std::move(label);
  s.application = is_attractive(kind) ? Application::kLabeledOnly : Application::kAllSamples;
  s.weight_channel = std::move(weight_channel);
  return s;
}

nlohmann::json to_json(const ConceptSpec& spec) {
  nlohmann::json j{{"name", spec.name}, {"kind", to_string(spec.kind)}};
  if (uses_direction(spec.kind)) {
    j["direction"] = spec.direction;
  } else {
    j["dims"] = spec.dims;
  }
  if (!spec.label.empty()) j["label"] = spec.label;
  j["application"] = to_string(spec.application);
  j["weight_channel"] = spec.weight_channel;
  return j;
}

ConceptSpec concept_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"name", "kind", "direction", "dims", "label", "application", "weight_channel"},
                 "concept");
  const ConceptKind kind = parse_concept_kind(j.at("kind").get<std::string>());
  ConceptSpec s = make_concept(j.at("name").get<std::string>(), kind,
                               j.value("direction", std::vector<double>{}),
                               j.value("dims", std::vector<std::size_t>{}),
                               j.value("label", std::string{}),
                               j.at("weight_channel").get<std::string>());
  if (j.contains("application")) s.application = parse_application(j["application"].get<std::string>());
  if (uses_direction(kind) && j.contains("dims")) {
    throw std::invalid_argument("concept '" + s.name + "': direction terms take no dims");
  }
  if (!uses_direction(kind) && j.contains("direction")) {
    throw std::invalid_argument("concept '" + s.name + "': subspace terms take no direction");
  }
  return s;
}

void validate(const ConceptSpec& spec, std::size_t latent_dim) {
  const std::string who = "concept '" + spec.name + "': ";
  if (uses_direction(spec.kind)) {
    if (spec.direction.size() != latent_dim) {
      throw std::invalid_argument(who + "direction has " +
                                  std::to_string(spec.direction.size()) +
                                  " entries, latent dim is " + std::to_string(latent_dim));
    }
    if (std::abs(norm(spec.direction) - 1.0) > 1e-12) {
      throw std::invalid_argument(who + "direction is not unit length");
    }
  } else {
    if (spec.dims.empty()) throw std::invalid_argument(who + "dimension set is empty");
    for (std::size_t d : spec.dims) {
      if (d >= latent_dim) {
        throw std::invalid_argument(who + "dimension " + std::to_string(d) +
                                    " out of range for latent dim " +
                                    std::to_string(latent_dim));
      }
    }
  }
  if (spec.application == Application::kLabeledOnly && spec.label.empty()) {
    throw std::invalid_argument(who + "labeled-only term needs a label function");
  }
  if (spec.weight_channel.empty()) {
    throw std::invalid_argument(who + "missing weight channel");
  }
}

double task_loss(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("task_loss: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - y[i]) * (x[i] - y[i]);
  return acc;
}

double anchor_term(std::span<const double> z, std::span<const double> v) {
  return 1.0 - dot(z, v);
}

namespace {

bool contains(std::span<const std::size_t> dims, std::size_t i) {
  for (std::size_t d : dims) {
    if (d == i) return true;
  }
  return false;
}

}  // namespace

double subspace_term(std::span<const double> z, std::span<const std::size_t> dims) {
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!contains(dims, i)) acc += z[i] * z[i];
  }
  return acc;
}

double anti_anchor_term(std::span<const double> z, std::span<const double> v) {
  return std::max(0.0, dot(z, v));
}

double anti_subspace_term(std::span<const double> z, std::span<const std::size_t> dims) {
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (contains(dims, i)) acc += z[i] * z[i];
  }
  return acc;
}

double concept_term(const ConceptSpec& spec, std::span<const double> z) {
  switch (spec.kind) {
    case ConceptKind::kAnchor: return anchor_term(z, spec.direction);
    case ConceptKind::kSubspace: return subspace_term(z, spec.dims);
    case ConceptKind::kAntiAnchor: return anti_anchor_term(z, spec.direction);
    case ConceptKind::kAntiSubspace: return anti_subspace_term(z, spec.dims);
  }
  return 0.0;
}

std::vector<double> concept_term_gradient(const ConceptSpec& spec,
                                          std::span<const double> z) {
  std::vector<double> g(z.size(), 0.0);
  switch (spec.kind) {
    case ConceptKind::kAnchor:
      for (std::size_t i = 0; i < z.size(); ++i) g[i] = -spec.direction[i];
      break;
    case ConceptKind::kAntiAnchor:
      if (dot(z, spec.direction) > 0.0) {
        for (std::size_t i = 0; i < z.size(); ++i) g[i] = spec.direction[i];
      }
      break;
    case ConceptKind::kSubspace:
      for (std::size_t i = 0; i < z.size(); ++i) {
        if (!contains(spec.dims, i)) g[i] = 2.0 * z[i];
      }
      break;
    case ConceptKind::kAntiSubspace:
      for (std::size_t d : spec.dims) g[d] = 2.0 * z[d];
      break;
  }
  return g;
}

namespace {

void check_power(int power) {
  if (power <= 0 || power % 2 != 0) {
    throw std::invalid_argument("separation power must be a positive even integer, got " +
                                std::to_string(power));
  }
}

}  // namespace

double separation(std::span<const std::vector<double>> batch, int power) {
  check_power(power);
  const std::size_t n = batch.size();
  if (n < 2) throw std::invalid_argument("separation needs a batch of at least 2");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      acc += 2.0 * std::pow(dot(batch[i], batch[j]), power);
    }
  }
  return acc / static_cast<double>(n * (n - 1));
}

bool applies(const ConceptSpec& spec, bool label) {
  return spec.application == Application::kAllSamples || label;
}

namespace {

void check_alignment(std::size_t inputs, std::size_t recons, std::size_t latents,
                     const LabelMatrix& labels, std::size_t concepts,
                     const LossWeights& weights) {
  if (inputs != recons || inputs != latents || inputs != labels.size()) {
    throw ShapeError("total_loss: batch arrays are misaligned");
  }
  if (weights.concepts.size() != concepts) {
    throw ShapeError("total_loss: one weight per concept required");
  }
  for (const auto& row : labels) {
    if (row.size() != concepts) throw ShapeError("total_loss: label row size mismatch");
  }
}

void finish(LossBreakdown& b, const LossWeights& w) {
  b.weighted_separation = w.separation * b.separation;
  b.weighted_concepts.resize(b.concepts.size());
  b.total = b.task + b.weighted_separation;
  for (std::size_t k = 0; k < b.concepts.size(); ++k) {
    b.weighted_concepts[k] = w.concepts[k] * b.concepts[k];
    b.total += b.weighted_concepts[k];
  }
}

}  // namespace

LossBreakdown total_loss(std::span<const std::vector<double>> inputs,
                         std::span<const std::vector<double>> reconstructions,
                         std::span<const std::vector<double>> latents,
                         const LabelMatrix& labels, std::span<const ConceptSpec> concepts,
                         const LossWeights& weights, int separation_power) {
  check_alignment(inputs.size(), reconstructions.size(), latents.size(), labels,
                  concepts.size(), weights);
  const double n = static_cast<double>(inputs.size());
  LossBreakdown b;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    b.task += task_loss(inputs[i], reconstructions[i]);
  }
  b.task /= n;
  b.separation = separation(latents, separation_power);
  b.concepts.assign(concepts.size(), 0.0);
  for (std::size_t k = 0; k < concepts.size(); ++k) {
    for (std::size_t i = 0; i < latents.size(); ++i) {
      if (applies(concepts[k], labels[i][k])) b.concepts[k] += concept_term(concepts[k], latents[i]);
    }
    b.concepts[k] /= n;
  }
  finish(b, weights);
  return b;
}

Var taped_separation(Tape& tape, std::span<const Var> latents, int power) {
  check_power(power);
  const std::size_t n = latents.size();
  if (n < 2) throw std::invalid_argument("separation needs a batch of at least 2");
  const double scale = 1.0 / static_cast<double>(n * (n - 1));
  std::vector<std::vector<double>> grads(n);
  for (std::size_t i = 0; i < n; ++i) grads[i].assign(tape.value(latents[i]).size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& zi = tape.value(latents[i]).values;
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& zj = tape.value(latents[j]).values;
      const double c = dot(zi, zj);
      const double cp1 = std::pow(c, power - 1);
      acc += 2.0 * cp1 * c;
      // Each unordered pair appears twice in the ordered sum.
      const double g = 2.0 * scale * static_cast<double>(power) * cp1;
      if (g == 0.0) continue;
      for (std::size_t k = 0; k < zi.size(); ++k) {
        grads[i][k] += g * zj[k];
        grads[j][k] += g * zi[k];
      }
    }
  }
  return tape.scalar_function(latents, acc * scale, std::move(grads));
}

Var taped_concept_mean(Tape& tape, const ConceptSpec& spec, std::span<const Var> latents,
                       const std::vector<bool>& gates) {
  if (gates.size() != latents.size()) throw ShapeError("concept gates misaligned");
  const double inv_n = 1.0 / static_cast<double>(latents.size());
  std::vector<Var> active;
  std::vector<std::vector<double>> grads;
  double acc = 0.0;
  for (std::size_t i = 0; i < latents.size(); ++i) {
    if (!gates[i]) continue;
    const auto& z = tape.value(latents[i]).values;
    acc += concept_term(spec, z);
    auto g = concept_term_gradient(spec, z);
    for (double& x : g) x *= inv_n;
    active.push_back(latents[i]);
    grads.push_back(std::move(g));
  }
  return tape.scalar_function(active, acc * inv_n, std::move(grads));
}

TapedLoss taped_total_loss(Tape& tape, std::span<const Var> inputs,
                           std::span<const Var> reconstructions,
                           std::span<const Var> latents, const LabelMatrix& labels,
                           std::span<const ConceptSpec> concepts,
                           const LossWeights& weights, int separation_power) {
  check_alignment(inputs.size(), reconstructions.size(), latents.size(), labels,
                  concepts.size(), weights);
  const double inv_n = 1.0 / static_cast<double>(inputs.size());
  std::vector<Var> terms;
  std::vector<double> coefficients;
  LossBreakdown b;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Var t = tape.squared_distance(reconstructions[i], inputs[i]);
    b.task += tape.scalar(t);
    terms.push_back(t);
    coefficients.push_back(inv_n);
  }
  b.task *= inv_n;

  Var sep = taped_separation(tape, latents, separation_power);
  b.separation = tape.scalar(sep);
  terms.push_back(sep);
  coefficients.push_back(weights.separation);

  b.concepts.assign(concepts.size(), 0.0);
  for (std::size_t k = 0; k < concepts.size(); ++k) {
    std::vector<bool> gates(latents.size());
    for (std::size_t i = 0; i < latents.size(); ++i) gates[i] = applies(concepts[k], labels[i][k]);
    Var c = taped_concept_mean(tape, concepts[k], latents, gates);
    b.concepts[k] = tape.scalar(c);
    terms.push_back(c);
    coefficients.push_back(weights.concepts[k]);
  }
  finish(b, weights);
  Var total = tape.weighted_sum(terms, coefficients);
  return {total, b};
}

}  // namespace anchorlab
