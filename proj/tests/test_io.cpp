#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "anchorlab/checkpoint.hpp"
#include "anchorlab/color.hpp"
#include "anchorlab/config.hpp"
#include "anchorlab/experiment.hpp"
#include "doctest.h"

using namespace anchorlab;
using doctest::Approx;

namespace {

Checkpoint small_checkpoint(std::size_t latent) {
  std::mt19937_64 rng(9);
  SphericalAutoencoder::Architecture arch;
  arch.latent_dim = latent;
  arch.encoder_hidden = {6};
  arch.decoder_hidden = {6};
  const auto concepts = preset_config("suppression_4d").training.concepts;
  return make_checkpoint(SphericalAutoencoder(arch, rng), 17, 1500, concepts, "0123456789abcdef");
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("anchorlab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("checkpoint round trip") {
  const Checkpoint c = small_checkpoint(4);
  const auto path = scratch_dir("ckpt") / "checkpoint.json";
  save_checkpoint(c, path);
  const Checkpoint back = load_checkpoint(path);
  CHECK(to_json(back) == to_json(c));
  CHECK(back.latent_ids == std::vector<std::size_t>{0, 1, 2, 3});
  for (const Color& x : rgb_grid(4)) CHECK(back.model.forward(x.rgb()).output == c.model.forward(x.rgb()).output);
}

TEST_CASE("checkpoints fail closed") {
  const nlohmann::json good = to_json(small_checkpoint(4));
  CHECK_NOTHROW(checkpoint_from_json(good));

  auto j = good;
  j["surprise"] = 1;
  CHECK_THROWS_AS(checkpoint_from_json(j), std::invalid_argument);
  j = good;
  j["schema_version"] = 2;
  CHECK_THROWS_AS(checkpoint_from_json(j), std::invalid_argument);
  j = good;
  j["architecture"]["latent_dim"] = 5;
  CHECK_THROWS_AS(checkpoint_from_json(j), std::invalid_argument);
  j = good;
  j["latent_ids"] = {0, 1, 2};
  CHECK_THROWS_AS(checkpoint_from_json(j), std::invalid_argument);
  j = good;
  j["decoder"][0]["weight"].erase(0);
  CHECK_THROWS_AS(checkpoint_from_json(j), std::invalid_argument);

  const auto dir = scratch_dir("bad_ckpt");
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK_THROWS_AS(load_checkpoint(dir / "broken.json"), std::invalid_argument);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.json"), std::invalid_argument);
}

TEST_CASE("pruning keeps original dimension ids") {
  Checkpoint c = small_checkpoint(5);
  InterventionSpec p;
  p.name = "prune1";
  p.kind = InterventionKind::kPrune;
  p.dims = {1};
  intervene(c, p);
  CHECK(c.model.latent_dim() == 4);
  CHECK(c.latent_ids == std::vector<std::size_t>{0, 2, 3, 4});
  REQUIRE(c.interventions_applied.size() == 1);
  CHECK(c.interventions_applied[0] == p);

  // Later specs refer to original ids.
  InterventionSpec a;
  a.name = "ablate3";
  a.kind = InterventionKind::kAblate;
  a.dims = {3};
  CHECK(resolve_dims(c, a).dims == std::vector<std::size_t>{2});
  intervene(c, a);
  CHECK(c.interventions_applied.size() == 2);
  CHECK(c.interventions_applied[1].kind == InterventionKind::kAblate);
  for (const Color& x : rgb_grid(3)) CHECK(c.model.encode(x.rgb())[2] == 0.0);

  CHECK_THROWS_AS(intervene(c, p), std::invalid_argument);
  CHECK(c.interventions_applied.size() == 2);

  const Checkpoint back = checkpoint_from_json(to_json(c));
  CHECK(back.latent_ids == c.latent_ids);
  CHECK(back.interventions_applied == c.interventions_applied);
}

TEST_CASE("inference interventions are recorded and replayed") {
  Checkpoint c = small_checkpoint(4);
  const auto before = to_json(c).at("encoder");
  InterventionSpec s;
  s.name = "sup";
  s.kind = InterventionKind::kSuppress;
  s.direction = {1, 0, 0, 0};
  const IntervenedModel live = intervene(c, s);
  CHECK(to_json(c).at("encoder") == before);
  const IntervenedModel replayed = runtime_model(checkpoint_from_json(to_json(c)));
  for (const Color& x : rgb_grid(4)) CHECK(replayed.forward(x.rgb()).output == live.forward(x.rgb()).output);
}

TEST_CASE("config files") {
  for (const auto& name : preset_names()) {
    const ExperimentConfig preset = preset_config(name);
    CHECK_NOTHROW(preset.validate());
    CHECK(config_from_json(to_json(preset)) == preset);
    const auto shipped = std::filesystem::path(ANCHORLAB_SOURCE_DIR) / "configs" / (name + ".json");
    INFO(shipped.string());
    REQUIRE(std::filesystem::exists(shipped));
    CHECK(load_config(shipped) == preset);
  }
  for (const auto& id : experiment_ids()) CHECK_NOTHROW(preset_config(preset_for_experiment(id)));
  CHECK_THROWS_AS(preset_for_experiment("9.9.9"), std::invalid_argument);

  const nlohmann::json good = to_json(preset_config("ablation_5d"));
  auto j = good;
  j["learning_rate"] = 0.1;
  CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
  j = good;
  j["training"]["momentum"] = 0.9;
  CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
  j = good;
  j["schema_version"] = 0;
  CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
  j = good;
  j.erase("schema_version");
  CHECK_THROWS(config_from_json(j));

  const auto dir = scratch_dir("config");
  CHECK_THROWS_AS(load_config(dir / "absent.json"), std::invalid_argument);
}

TEST_CASE("config hash") {
  const ExperimentConfig a = preset_config("suppression_4d");
  const std::string h = config_hash(a);
  CHECK(h.size() == 16);
  CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(config_hash(config_from_json(to_json(a))) == h);
  CHECK(config_hash(preset_config("suppression_4d")) == h);
  ExperimentConfig b = a;
  b.training.seed += 1;
  CHECK(config_hash(b) != h);
  CHECK(config_hash(preset_config("ablation_5d")) != h);
}

TEST_CASE("distribution summary") {
  const Distribution d = describe({0.3, 0.1, 0.9, 0.5, 0.7, 0.2, 0.8});
  CHECK(d.mean == Approx(0.5));
  CHECK(d.median == Approx(0.5));
  CHECK(d.q1 == Approx(0.25));
  CHECK(d.q3 == Approx(0.75));
  CHECK(d.min == 0.1);
  CHECK(d.max == 0.9);
  CHECK(d.std == Approx(0.2878491668515698).epsilon(1e-12));

  const Distribution one = describe({0.42});
  CHECK(one.std == 0.0);
  CHECK(one.mean == 0.42);
  CHECK(one.q1 == 0.42);
  CHECK(one.q3 == 0.42);
  CHECK_THROWS_AS(describe({}), std::invalid_argument);
}

TEST_CASE("run artifacts") {
  ExperimentConfig config = preset_config("suppression_4d");
  config.training.steps = 12;
  const RunRecord run = train(config.training);
  const std::string hash = config_hash(config);

  const std::string csv = loss_csv(run, config.training, hash);
  std::istringstream lines(csv);
  std::string first, header;
  std::getline(lines, first);
  std::getline(lines, header);
  CHECK(first == "# schema_version=1 config_hash=" + hash);
  std::string expected = "step,eta,lambda_sep";
  for (const auto& c : config.training.concepts) expected += ",w_" + c.name;
  expected += ",task,separation";
  for (const auto& c : config.training.concepts) expected += "," + c.name;
  CHECK(header == expected + ",total");
  std::size_t rows = 0;
  for (std::string row; std::getline(lines, row);) ++rows;
  CHECK(rows == 12);

  const auto labels = label_summary(run, config.training, hash);
  CHECK(labels.at("samples") == 12 * config.training.batch_size);
  CHECK(labels.at("config_hash") == hash);
  CHECK(labels.at("concepts").size() == config.training.concepts.size());

  const auto dir = scratch_dir("run");
  write_run(run, config, dir);
  for (const char* f : {"checkpoint.json", "losses.csv", "labels.json"}) CHECK(std::filesystem::exists(dir / f));
  CHECK(slurp(dir / "losses.csv") == csv);
  const Checkpoint back = load_checkpoint(dir / "checkpoint.json");
  CHECK(back.config_hash == hash);
  CHECK(back.step == 12);
  CHECK(back.seed == config.training.seed);
}
