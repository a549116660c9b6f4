#include "anchorlab/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>

#include "anchorlab/checkpoint.hpp"
#include "anchorlab/json_util.hpp"

namespace anchorlab {

void ExperimentConfig::validate() const {
  if (name.empty()) throw std::invalid_argument("config: name must not be empty");
  training.validate();
  std::set<std::string> names;
  for (const auto& spec : interventions) {
    if (spec.name.empty()) throw std::invalid_argument("config: intervention without a name");
    if (!names.insert(spec.name).second) {
      throw std::invalid_argument("config: duplicate intervention name '" + spec.name + "'");
    }
    spec.validate(training.architecture.latent_dim);
  }
  reference_color(evaluation.target);
  if (!evaluation.selection.empty() && !names.contains(evaluation.selection)) {
    throw std::invalid_argument("config: selection intervention '" + evaluation.selection +
                                "' is not defined");
  }
  for (const auto& [key, setting] : evaluation.similarity) {
    if (!names.contains(key)) {
      throw std::invalid_argument("config: similarity setting for unknown intervention '" + key + "'");
    }
    if (setting.power < 1) throw std::invalid_argument("config: similarity power must be >= 1");
  }
  if (evaluation.seeds == 0) throw std::invalid_argument("config: seeds must be >= 1");
}

std::vector<EvalCondition> ExperimentConfig::conditions() const {
  std::vector<EvalCondition> out;
  for (const auto& spec : interventions) {
    EvalCondition c{spec, 2, SimilarityBasis::kTarget};
    if (auto it = evaluation.similarity.find(spec.name); it != evaluation.similarity.end()) {
      c.similarity_power = it->second.power;
      c.basis = it->second.basis;
    }
    out.push_back(std::move(c));
  }
  return out;
}

nlohmann::json to_json(const ExperimentConfig& config) {
  const auto& t = config.training;
  nlohmann::json concepts = nlohmann::json::array();
  for (const auto& c : t.concepts) concepts.push_back(to_json(c));
  nlohmann::json interventions = nlohmann::json::array();
  for (const auto& i : config.interventions) interventions.push_back(to_json(i));
  nlohmann::json similarity = nlohmann::json::object();
  for (const auto& [key, s] : config.evaluation.similarity) {
    similarity[key] = {{"power", s.power}, {"basis", to_string(s.basis)}};
  }
  const auto& plot = config.evaluation.plot;
  return {{"schema_version", kSchemaVersion},
          {"name", config.name},
          {"model",
           {{"input_dim", t.architecture.input_dim},
            {"latent_dim", t.architecture.latent_dim},
            {"encoder_hidden", t.architecture.encoder_hidden},
            {"decoder_hidden", t.architecture.decoder_hidden}}},
          {"training",
           {{"steps", t.steps},
            {"batch_size", t.batch_size},
            {"grid_subdivisions", t.grid_subdivisions},
            {"seed", t.seed},
            {"separation_power", t.separation_power}}},
          {"concepts", concepts},
          {"timeline", to_json(t.timeline)},
          {"interventions", interventions},
          {"evaluation",
           {{"target", config.evaluation.target},
            {"selection", config.evaluation.selection},
            {"seeds", config.evaluation.seeds},
            {"similarity", similarity},
            {"plot",
             {{"sweep_hues", plot.sweep_hues},
              {"sweep_values", plot.sweep_values},
              {"curve_hues", plot.curve_hues}}}}},
          {"output_dir", config.output_dir}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  reject_unknown(j,
                 {"schema_version", "name", "model", "training", "concepts", "timeline",
                  "interventions", "evaluation", "output_dir"},
                 "config");
  const int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw std::invalid_argument("config: schema_version " + std::to_string(version) +
                                " is not supported (expected " +
                                std::to_string(kSchemaVersion) + ")");
  }
  ExperimentConfig c;
  c.name = j.at("name").get<std::string>();
  c.output_dir = j.value("output_dir", c.name);

  auto& t = c.training;
  if (j.contains("model")) {
    const auto& m = j["model"];
    reject_unknown(m, {"input_dim", "latent_dim", "encoder_hidden", "decoder_hidden"}, "model");
    auto& a = t.architecture;
    a.input_dim = m.value("input_dim", a.input_dim);
    a.latent_dim = m.value("latent_dim", a.latent_dim);
    a.encoder_hidden = m.value("encoder_hidden", a.encoder_hidden);
    a.decoder_hidden = m.value("decoder_hidden", a.decoder_hidden);
  }
  if (j.contains("training")) {
    const auto& tr = j["training"];
    reject_unknown(tr, {"steps", "batch_size", "grid_subdivisions", "seed", "separation_power"},
                   "training");
    t.steps = tr.value("steps", t.steps);
    t.batch_size = tr.value("batch_size", t.batch_size);
    t.grid_subdivisions = tr.value("grid_subdivisions", t.grid_subdivisions);
    t.seed = tr.value("seed", t.seed);
    t.separation_power = tr.value("separation_power", t.separation_power);
  }
  for (const auto& cj : j.value("concepts", nlohmann::json::array())) {
    t.concepts.push_back(concept_from_json(cj));
  }
  t.timeline = timeline_from_json(j.at("timeline"));
  for (const auto& ij : j.value("interventions", nlohmann::json::array())) {
    c.interventions.push_back(intervention_from_json(ij));
  }
  if (j.contains("evaluation")) {
    const auto& e = j["evaluation"];
    reject_unknown(e, {"target", "selection", "seeds", "similarity", "plot"}, "evaluation");
    auto& ev = c.evaluation;
    ev.target = e.value("target", ev.target);
    ev.selection = e.value("selection", ev.selection);
    ev.seeds = e.value("seeds", ev.seeds);
    if (e.contains("similarity")) {
      for (const auto& [key, s] : e["similarity"].items()) {
        reject_unknown(s, {"power", "basis"}, "similarity '" + key + "'");
        SimilaritySetting setting;
        setting.power = s.value("power", setting.power);
        setting.basis = parse_similarity_basis(s.value("basis", std::string("target")));
        ev.similarity[key] = setting;
      }
    }
    if (e.contains("plot")) {
      const auto& p = e["plot"];
      reject_unknown(p, {"sweep_hues", "sweep_values", "curve_hues"}, "plot");
      ev.plot.sweep_hues = p.value("sweep_hues", ev.plot.sweep_hues);
      ev.plot.sweep_values = p.value("sweep_values", ev.plot.sweep_values);
      ev.plot.curve_hues = p.value("curve_hues", ev.plot.curve_hues);
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::vector<double> axis(std::size_t dim, std::size_t index, double sign = 1.0) {
  std::vector<double> v(dim, 0.0);
  v[index] = sign;
  return v;
}

InterventionSpec dims_intervention(std::string name, InterventionKind kind,
                                   std::vector<std::size_t> dims) {
  InterventionSpec s;
  s.name = std::move(name);
  s.kind = kind;
  s.dims = std::move(dims);
  return s;
}

InterventionSpec suppress_red(std::size_t dim) {
  InterventionSpec s;
  s.name = "suppress_red";
  s.kind = InterventionKind::kSuppress;
  s.direction = axis(dim, 0);
  return s;
}

}  // namespace

const std::vector<std::string>& preset_names() { return timeline_preset_names(); }

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  c.output_dir = name;
  auto& t = c.training;
  t.timeline = preset_timeline(name);
  auto& ev = c.evaluation;
  using channels::kAnchor, channels::kSubspace, channels::kAntiAnchor, channels::kAntiSubspace;

  if (name == "suppression_4d" || name == "single_anchor_4d") {
    t.concepts.push_back(make_concept("red", ConceptKind::kAnchor, axis(4, 0), {}, "red", kAnchor));
    if (name == "suppression_4d") {
      t.concepts.push_back(
          make_concept("vibrant", ConceptKind::kSubspace, {}, {0, 1}, "vibrant", kSubspace));
    }
    c.interventions.push_back(suppress_red(4));
    c.interventions.push_back(dims_intervention("ablate_red", InterventionKind::kAblate, {0}));
    InterventionSpec repel;
    repel.name = "repel_red";
    repel.kind = InterventionKind::kRepel;
    repel.direction = axis(4, 0);
    repel.mapper = BezierMapper{};
    c.interventions.push_back(repel);
    ev.selection = "suppress_red";
    ev.similarity = {{"suppress_red", {2, SimilarityBasis::kTarget}},
                     {"ablate_red", {3, SimilarityBasis::kTarget}},
                     {"repel_red", {2, SimilarityBasis::kTarget}}};
  } else if (name == "ablation_5d") {
    t.architecture.latent_dim = 5;
    t.architecture.encoder_hidden = {10, 10};
    t.architecture.decoder_hidden = {10, 10};
    t.concepts.push_back(make_concept("red", ConceptKind::kAnchor, axis(5, 0), {}, "red", kAnchor));
    t.concepts.push_back(
        make_concept("red_dimension", ConceptKind::kAntiSubspace, {}, {0}, "", kAntiSubspace));
    t.concepts.push_back(
        make_concept("anti_red", ConceptKind::kAntiAnchor, axis(5, 0, -1.0), {}, "", kAntiAnchor));
    c.interventions.push_back(suppress_red(5));
    c.interventions.push_back(dims_intervention("ablate_red", InterventionKind::kAblate, {0}));
    c.interventions.push_back(dims_intervention("prune_red", InterventionKind::kPrune, {0}));
    ev.selection = "ablate_red";
    ev.similarity = {{"suppress_red", {2, SimilarityBasis::kTarget}},
                     {"ablate_red", {3, SimilarityBasis::kTarget}},
                     {"prune_red", {3, SimilarityBasis::kTarget}}};
  } else if (name == "hue_subspace_4d") {
    t.concepts.push_back(
        make_concept("vibrant", ConceptKind::kSubspace, {}, {0, 1}, "vibrant", kSubspace));
    c.interventions.push_back(
        dims_intervention("suppress_hue", InterventionKind::kSuppressSubspace, {0, 1}));
    c.interventions.push_back(dims_intervention("ablate_hue", InterventionKind::kAblate, {0, 1}));
    ev.selection = "ablate_hue";
    ev.similarity = {{"suppress_hue", {2, SimilarityBasis::kVibrancy}},
                     {"ablate_hue", {2, SimilarityBasis::kVibrancy}}};
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  c.validate();
  return c;
}

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"2.4.1", "2.9.1", "2.5.1", "2.7.1"};
  return ids;
}

std::string preset_for_experiment(const std::string& id) {
  if (id == "2.4.1") return "suppression_4d";
  if (id == "2.9.1") return "ablation_5d";
  if (id == "2.5.1") return "single_anchor_4d";
  if (id == "2.7.1") return "hue_subspace_4d";
  throw std::invalid_argument("unknown experiment id '" + id + "'");
}

}  // namespace anchorlab
