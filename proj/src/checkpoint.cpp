#include "anchorlab/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "anchorlab/json_util.hpp"

namespace anchorlab {

Checkpoint make_checkpoint(SphericalAutoencoder model, std::uint64_t seed, std::int64_t step,
                           std::vector<ConceptSpec> concepts, std::string config_hash) {
  Checkpoint c;
  c.latent_ids.resize(model.latent_dim());
  std::iota(c.latent_ids.begin(), c.latent_ids.end(), std::size_t{0});
  c.model = std::move(model);
  c.seed = seed;
  c.step = step;
  c.concepts = std::move(concepts);
  c.config_hash = std::move(config_hash);
  return c;
}

namespace {

nlohmann::json layers_json(const Mlp& mlp) {
  nlohmann::json out = nlohmann::json::array();
  for (const DenseLayer& l : mlp.layers()) {
    out.push_back({{"rows", l.weight.value.shape.rows},
                   {"cols", l.weight.value.shape.cols},
                   {"weight", l.weight.value.values},
                   {"bias", l.bias.value.values}});
  }
  return out;
}

Mlp mlp_from_json(const nlohmann::json& j, const std::string& prefix) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(prefix + ": expected a layer list");
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& l = j[i];
    reject_unknown(l, {"rows", "cols", "weight", "bias"}, prefix + " layer");
    const auto rows = l.at("rows").get<std::size_t>();
    const auto cols = l.at("cols").get<std::size_t>();
    Tensor w(rows, cols);
    w.values = l.at("weight").get<std::vector<double>>();
    Tensor b = Tensor::vector(rows);
    b.values = l.at("bias").get<std::vector<double>>();
    if (w.values.size() != rows * cols || b.values.size() != rows) {
      throw std::invalid_argument(prefix + " layer " + std::to_string(i) + ": size mismatch");
    }
    if (i > 0 && cols != layers.back().outputs()) {
      throw std::invalid_argument(prefix + " layer " + std::to_string(i) + ": width mismatch");
    }
    const std::string name = prefix + "." + std::to_string(i);
    layers.push_back({Parameter(name + ".weight", std::move(w)), Parameter(name + ".bias", std::move(b))});
  }
  return Mlp(std::move(layers));
}

}  // namespace

nlohmann::json to_json(const Checkpoint& c) {
  nlohmann::json concepts = nlohmann::json::array();
  for (const auto& s : c.concepts) concepts.push_back(to_json(s));
  nlohmann::json applied = nlohmann::json::array();
  for (const auto& s : c.interventions_applied) applied.push_back(to_json(s));
  const auto arch = c.model.architecture();
  return {{"schema_version", kSchemaVersion},
          {"config_hash", c.config_hash},
          {"seed", c.seed},
          {"step", c.step},
          {"architecture",
           {{"input_dim", arch.input_dim},
            {"latent_dim", arch.latent_dim},
            {"encoder_hidden", arch.encoder_hidden},
            {"decoder_hidden", arch.decoder_hidden}}},
          {"latent_ids", c.latent_ids},
          {"concepts", concepts},
          {"interventions_applied", applied},
          {"encoder", layers_json(c.model.encoder())},
          {"decoder", layers_json(c.model.decoder())}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  reject_unknown(j,
                 {"schema_version", "config_hash", "seed", "step", "architecture", "latent_ids",
                  "concepts", "interventions_applied", "encoder", "decoder"},
                 "checkpoint");
  const int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw std::invalid_argument("checkpoint schema_version " + std::to_string(version) +
                                " is not supported (expected " +
                                std::to_string(kSchemaVersion) + ")");
  }
  Checkpoint c;
  try {
    c.model = SphericalAutoencoder(mlp_from_json(j.at("encoder"), "encoder"),
                                   mlp_from_json(j.at("decoder"), "decoder"));
  } catch (const ShapeError& e) {
    throw std::invalid_argument(std::string("checkpoint: ") + e.what());
  }
  c.seed = j.at("seed").get<std::uint64_t>();
  c.step = j.at("step").get<std::int64_t>();
  c.config_hash = j.at("config_hash").get<std::string>();
  c.latent_ids = j.at("latent_ids").get<std::vector<std::size_t>>();
  for (const auto& s : j.at("concepts")) c.concepts.push_back(concept_from_json(s));
  for (const auto& s : j.at("interventions_applied")) {
    c.interventions_applied.push_back(intervention_from_json(s));
  }
  if (c.latent_ids.size() != c.model.latent_dim()) {
    throw std::invalid_argument("checkpoint: latent_ids do not match latent dim");
  }
  const auto& a = j.at("architecture");
  reject_unknown(a, {"input_dim", "latent_dim", "encoder_hidden", "decoder_hidden"}, "architecture");
  SphericalAutoencoder::Architecture declared;
  declared.input_dim = a.at("input_dim").get<std::size_t>();
  declared.latent_dim = a.at("latent_dim").get<std::size_t>();
  declared.encoder_hidden = a.at("encoder_hidden").get<std::vector<std::size_t>>();
  declared.decoder_hidden = a.at("decoder_hidden").get<std::vector<std::size_t>>();
  if (!(declared == c.model.architecture())) {
    throw std::invalid_argument("checkpoint: architecture does not match the stored weights");
  }
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(c).dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read checkpoint " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

InterventionSpec resolve_dims(const Checkpoint& c, const InterventionSpec& spec) {
  InterventionSpec out = spec;
  for (std::size_t& d : out.dims) {
    const auto it = std::find(c.latent_ids.begin(), c.latent_ids.end(), d);
    if (it == c.latent_ids.end()) {
      throw std::invalid_argument("intervention '" + spec.name + "': latent dimension " +
                                  std::to_string(d) + " is not present in this checkpoint");
    }
    d = static_cast<std::size_t>(it - c.latent_ids.begin());
  }
  return out;
}

IntervenedModel runtime_model(const Checkpoint& c) {
  std::vector<LatentTransform> steps;
  for (const auto& spec : c.interventions_applied) {
    if (spec.acts_on_weights()) continue;
    steps.push_back(apply(c.model, resolve_dims(c, spec)).transform);
  }
  if (steps.empty()) return {c.model, {}};
  LatentTransform chain = [steps](std::span<const double> z) {
    std::vector<double> out(z.begin(), z.end());
    for (const auto& t : steps) out = t(out);
    return out;
  };
  return {c.model, std::move(chain)};
}

IntervenedModel intervene(Checkpoint& c, const InterventionSpec& spec) {
  const InterventionSpec resolved = resolve_dims(c, spec);
  resolved.validate(c.model.latent_dim());
  if (resolved.acts_on_weights()) {
    const IntervenedModel m = apply(c.model, resolved);
    c.model = m.model;
    if (resolved.kind == InterventionKind::kPrune) {
      std::vector<std::size_t> kept;
      for (std::size_t i = 0; i < c.latent_ids.size(); ++i) {
        if (std::find(resolved.dims.begin(), resolved.dims.end(), i) == resolved.dims.end()) {
          kept.push_back(c.latent_ids[i]);
        }
      }
      c.latent_ids = std::move(kept);
    }
  }
  c.interventions_applied.push_back(spec);
  return runtime_model(c);
}

}  // namespace anchorlab
