// Command-line front end: train, sweep, intervene, evaluate, select,
// reproduce, preset.
//
// Exit codes: 0 ok, 2 usage or input error, 3 run failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "anchorlab/checkpoint.hpp"
#include "anchorlab/config.hpp"
#include "anchorlab/evaluation.hpp"
#include "anchorlab/experiment.hpp"
#include "anchorlab/trainer.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace anchorlab;

namespace {

constexpr int kUsage = 2;
constexpr int kRunFailure = 3;

struct Source {
  std::string config;
  std::string preset;
};

void add_source(CLI::App* cmd, Source& src) {
  auto* c = cmd->add_option("--config", src.config, "experiment config JSON");
  auto* p = cmd->add_option("--preset", src.preset, "built-in preset name");
  c->excludes(p);
  p->excludes(c);
}

std::optional<ExperimentConfig> load_source(const Source& src) {
  if (!src.config.empty()) {
    if (!fs::exists(src.config)) throw std::invalid_argument("config file not found: " + src.config);
    return load_config(src.config);
  }
  if (!src.preset.empty()) return preset_config(src.preset);
  return std::nullopt;
}

ExperimentConfig require_source(const Source& src) {
  auto c = load_source(src);
  if (!c) throw std::invalid_argument("one of --config or --preset is required");
  return *c;
}

nlohmann::json read_json(const fs::path& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + what + " " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

// Inline JSON when the argument looks like an object, else a file path.
InterventionSpec read_spec(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') {
    try {
      return intervention_from_json(nlohmann::json::parse(arg));
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument(std::string("--spec: ") + e.what());
    }
  }
  return intervention_from_json(read_json(arg, "intervention spec"));
}

bool pruned(const Checkpoint& c) {
  for (const auto& s : c.interventions_applied) {
    if (s.kind == InterventionKind::kPrune) return true;
  }
  return false;
}

// Concept directions live in the original latent coordinates, so the
// organization term is skipped once a dimension has been removed.
std::vector<ConceptSpec> scoring_concepts(const Checkpoint& c) {
  return pruned(c) ? std::vector<ConceptSpec>{} : c.concepts;
}

nlohmann::json provenance(const Checkpoint& c, const fs::path& source) {
  nlohmann::json applied = nlohmann::json::array();
  for (const auto& s : c.interventions_applied) applied.push_back(to_json(s));
  return {{"path", source.string()},
          {"seed", c.seed},
          {"step", c.step},
          {"latent_ids", c.latent_ids},
          {"interventions_applied", applied}};
}

void print_report(const EvalReport& r) {
  std::printf("%-8s %10s", "color", "baseline");
  std::vector<std::string> names;
  if (!r.rows.empty()) {
    for (const auto& [name, v] : r.rows.front().intervened) names.push_back(name);
  }
  for (const auto& n : names) std::printf(" %14s", n.c_str());
  std::printf("\n");
  for (const auto& row : r.rows) {
    std::printf("%-8s %10.4f", row.color.c_str(), row.baseline);
    for (const auto& n : names) std::printf(" %14.4f", row.intervened.at(n));
    std::printf("\n");
  }
  for (const auto& [name, r2] : r.selectivity) {
    std::printf("selectivity %s: R2=%.4f (k=%d, %s)\n", name.c_str(), r2,
                r.similarity_power.at(name), to_string(r.basis.at(name)).c_str());
  }
  std::printf("reconstruction %.6g  organization %.6g\n", r.reconstruction_loss,
              r.organization_loss);
}

int cmd_train(const Source& src, std::optional<std::uint64_t> seed,
              const std::optional<fs::path>& out) {
  ExperimentConfig cfg = require_source(src);
  if (seed) cfg.training.seed = *seed;
  const fs::path dir =
      out ? *out : output_root(cfg, std::nullopt) / ("seed_" + std::to_string(cfg.training.seed));
  std::fprintf(stderr, "training %s seed %llu\n", cfg.name.c_str(),
               static_cast<unsigned long long>(cfg.training.seed));
  RunRecord run;
  try {
    run = train(cfg.training);
  } catch (const RunFailure& e) {
    std::fprintf(stderr, "anchorlab: run failed at %s\n", e.what());
    return kRunFailure;
  }
  write_run(run, cfg, dir);
  std::printf("%s\n", dir.string().c_str());
  return 0;
}

int cmd_sweep(const Source& src, std::optional<std::uint64_t> seed, std::size_t n,
              std::size_t jobs, const std::optional<fs::path>& out) {
  ExperimentConfig cfg = require_source(src);
  if (seed) cfg.training.seed = *seed;
  if (n == 0) n = cfg.evaluation.seeds;
  const fs::path dir = output_root(cfg, out);
  std::fprintf(stderr, "sweeping %s: %zu seeds, %zu jobs\n", cfg.name.c_str(), n, jobs);
  const SweepResult sweep = run_sweep(cfg, n, jobs);
  for (const auto& s : sweep.seeds) {
    if (s.run) {
      write_run(*s.run, cfg, dir / ("seed_" + std::to_string(s.seed)));
    } else {
      std::fprintf(stderr, "seed %llu failed at step %lld: %s\n",
                   static_cast<unsigned long long>(s.seed), static_cast<long long>(s.failed_step),
                   s.failure.c_str());
    }
  }
  write_json(dir / "config.json", to_json(cfg));
  write_json(dir / "sweep_summary.json", to_json(sweep, cfg));
  if (!sweep.chosen) {
    std::fprintf(stderr, "anchorlab: every seed failed\n");
    return kRunFailure;
  }
  const auto& sel = *sweep.selectivity;
  std::printf("%zu/%zu seeds ok; selectivity mean %.4f std %.4f; chosen seed %llu\n",
              sweep.succeeded.size(), sweep.seeds.size(), sel.mean, sel.std,
              static_cast<unsigned long long>(sweep.seeds[*sweep.chosen].seed));
  std::printf("%s\n", (dir / "sweep_summary.json").string().c_str());
  return 0;
}

struct ScoreOptions {
  int power = 2;
  std::string basis = "target";
  std::string target = "red";
};

int cmd_intervene(const fs::path& ckpt_path, const std::string& spec_arg, const ScoreOptions& opt,
                  const std::optional<fs::path>& out) {
  const Checkpoint before = load_checkpoint(ckpt_path);
  const InterventionSpec spec = read_spec(spec_arg);
  const SimilarityBasis basis = parse_similarity_basis(opt.basis);
  Checkpoint after = before;
  const IntervenedModel variant = intervene(after, spec);
  const IntervenedModel baseline = runtime_model(before);

  const auto grid = rgb_grid(8);
  const std::vector<ScoredVariant> variants{{spec.name, variant, opt.power, basis}};
  const EvalReport report = evaluate(baseline, scoring_concepts(before), variants, grid, opt.target);

  const fs::path dir = out ? *out : ckpt_path.parent_path() / ("intervened_" + spec.name);
  save_checkpoint(after, dir / "checkpoint.json");
  nlohmann::json j = to_json(report);
  j["schema_version"] = kSchemaVersion;
  j["config_hash"] = before.config_hash;
  j["source_checkpoint"] = provenance(before, ckpt_path);
  j["checkpoint"] = provenance(after, dir / "checkpoint.json");
  write_json(dir / "report.json", j);
  const std::vector<PlotCondition> plots{{"baseline", baseline}, {spec.name, variant}};
  export_plot_data(plot_data(plots, grid), dir / "plots", csv_preamble(before.config_hash));
  print_report(report);
  std::printf("%s\n", dir.string().c_str());
  return 0;
}

int cmd_evaluate(const fs::path& ckpt_path, const Source& src, const std::optional<fs::path>& out) {
  const Checkpoint c = load_checkpoint(ckpt_path);
  const auto cfg = load_source(src);
  std::vector<ScoredVariant> variants;
  std::vector<PlotCondition> plots{{"baseline", runtime_model(c)}};
  std::string target = "red";
  PlotOptions plot_options;
  if (cfg) {
    target = cfg->evaluation.target;
    plot_options = cfg->evaluation.plot;
    for (const EvalCondition& cond : cfg->conditions()) {
      Checkpoint copy = c;
      IntervenedModel m = intervene(copy, cond.intervention);
      plots.push_back({cond.intervention.name, m});
      variants.push_back({cond.intervention.name, std::move(m), cond.similarity_power, cond.basis});
    }
  }
  const auto grid = rgb_grid(cfg ? cfg->training.grid_subdivisions : 8);
  const EvalReport report = evaluate(runtime_model(c), scoring_concepts(c), variants, grid, target);

  const fs::path dir = out ? *out : ckpt_path.parent_path() / "evaluation";
  nlohmann::json j = to_json(report);
  j["schema_version"] = kSchemaVersion;
  j["config_hash"] = c.config_hash;
  j["checkpoint"] = provenance(c, ckpt_path);
  write_json(dir / "report.json", j);
  export_plot_data(plot_data(plots, grid, plot_options), dir / "plots", csv_preamble(c.config_hash));
  print_report(report);
  std::printf("%s\n", dir.string().c_str());
  return 0;
}

int cmd_select(const fs::path& summary_path, const std::optional<fs::path>& out) {
  const nlohmann::json s = read_json(summary_path, "sweep summary");
  const int version = s.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw std::invalid_argument(summary_path.string() + ": unsupported schema_version " +
                                std::to_string(version));
  }
  std::vector<std::uint64_t> seeds;
  std::vector<SelectionMetrics> metrics;
  for (const auto& e : s.at("seeds")) {
    if (e.at("status") != "ok") continue;
    seeds.push_back(e.at("seed").get<std::uint64_t>());
    metrics.push_back({e.at("selectivity").get<double>(), e.at("reconstruction").get<double>(),
                       e.at("organization").get<double>()});
  }
  if (metrics.empty()) throw std::invalid_argument(summary_path.string() + ": no successful seeds");
  const ParetoResult p = pareto_select(metrics);
  nlohmann::json frontier = nlohmann::json::array();
  for (std::size_t i : p.frontier) frontier.push_back(seeds[i]);
  const auto& m = metrics[p.chosen];
  const nlohmann::json result{{"schema_version", kSchemaVersion},
                              {"config_hash", s.at("config_hash")},
                              {"chosen_seed", seeds[p.chosen]},
                              {"selectivity", m.selectivity},
                              {"reconstruction", m.reconstruction},
                              {"organization", m.organization},
                              {"frontier_seeds", frontier}};
  if (out) write_json(*out, result);
  std::printf("%s\n", result.dump(2).c_str());
  return 0;
}

int cmd_reproduce(const std::string& id, std::size_t n, std::size_t jobs,
                  const std::optional<fs::path>& out) {
  const ExperimentConfig cfg = preset_config(preset_for_experiment(id));
  const fs::path dir = out ? *out : output_root(cfg, std::nullopt);
  std::fprintf(stderr, "reproducing %s (%s)\n", id.c_str(), cfg.name.c_str());
  const Reproduction r = reproduce(id, n, jobs);
  write_reproduction(r, dir);
  if (!r.chosen) {
    std::fprintf(stderr, "anchorlab: every seed failed\n");
    return kRunFailure;
  }
  std::printf("experiment %s, chosen seed %llu of %zu\n", id.c_str(),
              static_cast<unsigned long long>(r.chosen->seed), r.sweep.seeds.size());
  print_report(r.report);
  for (const auto& c : r.checks) {
    std::printf("%s  %-36s achieved %.4f  published %s  threshold %s\n", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.achieved, c.published.c_str(), c.threshold.c_str());
  }
  std::printf("%s\n", (dir / "reproduction.json").string().c_str());
  return 0;
}

int cmd_preset(const std::string& name, bool list, const std::optional<fs::path>& out) {
  if (list || name.empty()) {
    for (const auto& n : preset_names()) std::printf("%s\n", n.c_str());
    return 0;
  }
  const nlohmann::json j = to_json(preset_config(name));
  if (out) {
    write_json(*out, j);
  } else {
    std::printf("%s\n", j.dump(2).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept-anchored spherical autoencoders on RGB color"};
  app.require_subcommand(1);

  Source src;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;
  std::size_t seeds = 0;
  std::size_t jobs = 1;
  std::string checkpoint, spec, id, name;
  bool list = false;
  ScoreOptions score;

  auto* train = app.add_subcommand("train", "train one seed and write its artifacts");
  add_source(train, src);
  train->add_option("--seed", seed, "override training.seed");
  train->add_option("--out", out, "artifact directory");

  auto* sweep = app.add_subcommand("sweep", "train a range of seeds and pick one");
  add_source(sweep, src);
  sweep->add_option("--seed", seed, "first seed");
  sweep->add_option("--seeds", seeds, "number of seeds (default: config)")->check(CLI::PositiveNumber);
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out, "output directory");

  auto* intervene = app.add_subcommand("intervene", "apply one intervention to a checkpoint");
  intervene->add_option("--checkpoint", checkpoint, "checkpoint JSON")->required();
  intervene->add_option("--spec", spec, "intervention JSON (file or inline)")->required();
  intervene->add_option("--similarity-power", score.power, "selectivity exponent k")
      ->check(CLI::PositiveNumber);
  intervene->add_option("--basis", score.basis, "selectivity basis")
      ->check(CLI::IsMember({"target", "vibrancy"}));
  intervene->add_option("--target", score.target, "target reference color");
  intervene->add_option("--out", out, "output directory");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a checkpoint under configured interventions");
  evaluate_cmd->add_option("--checkpoint", checkpoint, "checkpoint JSON")->required();
  add_source(evaluate_cmd, src);
  evaluate_cmd->add_option("--out", out, "output directory");

  auto* select = app.add_subcommand("select", "pareto selection over a sweep summary");
  select->add_option("--sweep", checkpoint, "sweep_summary.json")->required();
  select->add_option("--out", out, "write the selection JSON here");

  auto* reproduce_cmd = app.add_subcommand("reproduce", "run a published experiment end to end");
  reproduce_cmd->add_option("id", id, "experiment id (2.4.1, 2.9.1, 2.5.1, 2.7.1)")->required();
  reproduce_cmd->add_option("--seeds", seeds, "number of seeds (default: config)")
      ->check(CLI::PositiveNumber);
  reproduce_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  reproduce_cmd->add_option("--out", out, "output directory");

  auto* preset = app.add_subcommand("preset", "print a built-in experiment config");
  preset->add_option("name", name, "preset name");
  preset->add_flag("--list", list, "list preset names");
  preset->add_option("--out", out, "write the config here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*train) return cmd_train(src, seed, out);
    if (*sweep) return cmd_sweep(src, seed, seeds, jobs, out);
    if (*intervene) return cmd_intervene(checkpoint, spec, score, out);
    if (*evaluate_cmd) return cmd_evaluate(checkpoint, src, out);
    if (*select) return cmd_select(checkpoint, out);
    if (*reproduce_cmd) return cmd_reproduce(id, seeds, jobs, out);
    if (*preset) return cmd_preset(name, list, out);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "anchorlab: %s\n", e.what());
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "anchorlab: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "anchorlab: %s\n", e.what());
    return kRunFailure;
  }
  return kUsage;
}
