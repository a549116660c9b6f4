#include "anchorlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include "anchorlab/csv.hpp"

namespace anchorlab {

std::string csv_preamble(const std::string& hash) {
  return "# schema_version=" + std::to_string(kSchemaVersion) + " config_hash=" + hash + "\n";
}

std::string loss_csv(const RunRecord& run, const TrainConfig& config, const std::string& hash) {
  std::string out = csv_preamble(hash);
  out += "step,eta,lambda_sep";
  for (const auto& c : config.concepts) out += ",w_" + c.name;
  out += ",task,separation";
  for (const auto& c : config.concepts) out += "," + c.name;
  out += ",total\n";
  for (const StepRecord& r : run.history) {
    out += std::to_string(r.step);
    for (double v : {r.eta, r.weights.separation}) {
      out += ',';
      append_number(out, v);
    }
    for (double w : r.weights.concepts) {
      out += ',';
      append_number(out, w);
    }
    for (double v : {r.loss.task, r.loss.separation}) {
      out += ',';
      append_number(out, v);
    }
    for (double v : r.loss.concepts) {
      out += ',';
      append_number(out, v);
    }
    out += ',';
    append_number(out, r.loss.total);
    out += '\n';
  }
  return out;
}

nlohmann::json label_summary(const RunRecord& run, const TrainConfig& config,
                             const std::string& hash) {
  const auto grid = rgb_grid(config.grid_subdivisions);
  const double samples = static_cast<double>(run.steps_completed) *
                         static_cast<double>(config.batch_size);
  nlohmann::json concepts = nlohmann::json::array();
  for (std::size_t k = 0; k < config.concepts.size(); ++k) {
    const auto& c = config.concepts[k];
    double expected = samples;
    if (c.application == Application::kLabeledOnly) {
      const auto p = label_probability(c.label);
      double mean = 0.0;
      for (const Color& x : grid) mean += p(x);
      expected = samples * mean / static_cast<double>(grid.size());
    }
    concepts.push_back({{"name", c.name},
                        {"label", c.label},
                        {"application", to_string(c.application)},
                        {"count", run.label_counts[k]},
                        {"expected", expected}});
  }
  return {{"schema_version", kSchemaVersion},
          {"config_hash", hash},
          {"seed", run.seed},
          {"steps", run.steps_completed},
          {"samples", static_cast<std::int64_t>(samples)},
          {"concepts", concepts}};
}

void write_text(const std::filesystem::path& path, const std::string& body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

void write_run(const RunRecord& run, const ExperimentConfig& config,
               const std::filesystem::path& dir) {
  const std::string hash = config_hash(config);
  save_checkpoint(make_checkpoint(run.model, run.seed, run.steps_completed,
                                  config.training.concepts, hash),
                  dir / "checkpoint.json");
  write_text(dir / "losses.csv", loss_csv(run, config.training, hash));
  write_json(dir / "labels.json", label_summary(run, config.training, hash));
}

Distribution describe(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("describe: no values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  Distribution d;
  d.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - d.mean) * (v - d.mean);
  d.std = std::sqrt(ss / n);
  d.min = values.front();
  d.q1 = quantile(0.25);
  d.median = quantile(0.5);
  d.q3 = quantile(0.75);
  d.max = values.back();
  return d;
}

nlohmann::json to_json(const Distribution& d) {
  return {{"mean", d.mean}, {"std", d.std},       {"min", d.min}, {"q1", d.q1},
          {"median", d.median}, {"q3", d.q3}, {"max", d.max}};
}

SweepResult run_sweep(const ExperimentConfig& config, std::size_t n_seeds, std::size_t jobs) {
  config.validate();
  const auto entries = sweep(config.training, n_seeds, jobs);
  const auto grid = rgb_grid(config.training.grid_subdivisions);
  const auto conditions = config.conditions();

  SweepResult result;
  std::vector<SelectionMetrics> metrics;
  for (const SweepEntry& e : entries) {
    SeedResult s;
    s.seed = e.seed;
    s.failure = e.failure;
    s.failed_step = e.failed_step;
    if (e.record) {
      s.report = evaluate(e.record->model, config.training.concepts, conditions, grid,
                          config.evaluation.target);
      s.metrics.selectivity = config.evaluation.selection.empty()
                                  ? 0.0
                                  : s.report.selectivity.at(config.evaluation.selection);
      s.metrics.reconstruction = s.report.reconstruction_loss;
      s.metrics.organization = s.report.organization_loss;
      s.run = e.record;
      result.succeeded.push_back(result.seeds.size());
      metrics.push_back(s.metrics);
    }
    result.seeds.push_back(std::move(s));
  }
  if (!metrics.empty()) {
    const ParetoResult p = pareto_select(metrics);
    result.chosen = result.succeeded[p.chosen];
    for (std::size_t i : p.frontier) result.frontier.push_back(result.succeeded[i]);
    std::vector<double> sel, rec, org;
    for (const auto& m : metrics) {
      sel.push_back(m.selectivity);
      rec.push_back(m.reconstruction);
      org.push_back(m.organization);
    }
    result.selectivity = describe(sel);
    result.reconstruction = describe(rec);
    result.organization = describe(org);
  }
  return result;
}

nlohmann::json to_json(const SweepResult& sweep, const ExperimentConfig& config) {
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : sweep.seeds) {
    nlohmann::json j{{"seed", s.seed}};
    if (s.run) {
      j["status"] = "ok";
      j["selectivity"] = s.metrics.selectivity;
      j["reconstruction"] = s.metrics.reconstruction;
      j["organization"] = s.metrics.organization;
      nlohmann::json all = nlohmann::json::object();
      for (const auto& [name, r2] : s.report.selectivity) all[name] = r2;
      j["selectivity_by_intervention"] = all;
      nlohmann::json labels = nlohmann::json::object();
      for (std::size_t k = 0; k < config.training.concepts.size(); ++k) {
        labels[config.training.concepts[k].name] = s.run->label_counts[k];
      }
      j["label_counts"] = labels;
    } else {
      j["status"] = "failed";
      j["failure"] = s.failure;
      j["failed_step"] = s.failed_step;
    }
    seeds.push_back(j);
  }
  nlohmann::json out{{"schema_version", kSchemaVersion},
                     {"config_hash", config_hash(config)},
                     {"name", config.name},
                     {"selection", config.evaluation.selection},
                     {"seeds_requested", sweep.seeds.size()},
                     {"seeds_succeeded", sweep.succeeded.size()},
                     {"seeds", seeds}};
  if (sweep.chosen) {
    nlohmann::json frontier = nlohmann::json::array();
    for (std::size_t i : sweep.frontier) frontier.push_back(sweep.seeds[i].seed);
    out["pareto"] = {{"chosen_seed", sweep.seeds[*sweep.chosen].seed}, {"frontier_seeds", frontier}};
    out["distributions"] = {{"selectivity", to_json(*sweep.selectivity)},
                            {"reconstruction", to_json(*sweep.reconstruction)},
                            {"organization", to_json(*sweep.organization)}};
  }
  return out;
}

bool Reproduction::all_passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

namespace {

double row_value(const EvalReport& report, const std::string& color, const std::string& condition) {
  for (const auto& r : report.rows) {
    if (r.color == color) return r.intervened.at(condition);
  }
  throw std::out_of_range("no reference color '" + color + "'");
}

Check in_range(std::string name, double v, double lo, double hi, std::string published) {
  return {std::move(name), v, std::move(published),
          "[" + format_number(lo) + ", " + format_number(hi) + "]", lo <= v && v <= hi};
}

Check below(std::string name, double v, double bound, std::string published) {
  return {std::move(name), v, std::move(published), "< " + format_number(bound), v < bound};
}

Check above(std::string name, double v, double bound, std::string published, bool inclusive = false) {
  return {std::move(name), v, std::move(published), (inclusive ? ">= " : "> ") + format_number(bound),
          inclusive ? v >= bound : v > bound};
}

/// Fraction of successful seeds whose count for `concept_name` lies in [lo, hi].
Check label_check(const SweepResult& sweep, const TrainConfig& training, const std::string& concept_name,
                  double lo, double hi, std::string published) {
  std::size_t k = 0;
  while (k < training.concepts.size() && training.concepts[k].name != concept_name) ++k;
  std::size_t inside = 0;
  for (std::size_t i : sweep.succeeded) {
    const double c = static_cast<double>(sweep.seeds[i].run->label_counts[k]);
    if (lo <= c && c <= hi) ++inside;
  }
  const double frac = sweep.succeeded.empty()
                          ? 0.0
                          : static_cast<double>(inside) / static_cast<double>(sweep.succeeded.size());
  return {concept_name + " label count in [" + format_number(lo) + ", " + format_number(hi) +
              "] (fraction of seeds)",
          frac, std::move(published), ">= 0.95", frac >= 0.95};
}

std::vector<Check> published_checks(const std::string& id, const Reproduction& r) {
  std::vector<Check> checks;
  const auto& rep = r.report;
  const auto& sweep = r.sweep;
  if (id == "2.4.1" || id == "2.5.1") {
    const bool main = id == "2.4.1";
    checks.push_back(in_range("suppress_red: MSE(red)", row_value(rep, "red", "suppress_red"), 0.20,
                              0.30, main ? "0.284" : "0.233"));
    checks.push_back(below("suppress_red: MSE(lime)", row_value(rep, "lime", "suppress_red"), 0.01,
                           "0.000"));
    checks.push_back(below("suppress_red: MSE(purple)", row_value(rep, "purple", "suppress_red"),
                           0.01, main ? "0.000" : "0.000167"));
    checks.push_back(above("suppress_red: selectivity R2 (k=2), selected model",
                           rep.selectivity.at("suppress_red"), 0.95, main ? "0.99" : "n/a", true));
    if (sweep.selectivity) {
      checks.push_back(in_range("suppress_red: sweep mean selectivity", sweep.selectivity->mean,
                                0.88, 1.0, main ? "0.95 +- 0.02" : "n/a"));
    }
    checks.push_back(label_check(sweep, r.config.training, "red", 60, 110, "83 +- 8"));
    if (main) checks.push_back(label_check(sweep, r.config.training, "vibrant", 80, 140, "108 +- 11"));
  } else if (id == "2.9.1") {
    const double red = row_value(rep, "red", "ablate_red");
    checks.push_back(in_range("ablate_red: MSE(red)", red, 0.28, 0.36, "0.343 (bound 1/3)"));
    checks.push_back(below("ablate_red: MSE(cyan)", row_value(rep, "cyan", "ablate_red"), 0.01,
                           "~0.000"));
    checks.push_back(above("ablate_red: selectivity R2 (k=3), selected model",
                           rep.selectivity.at("ablate_red"), 0.90, "0.98", true));
    checks.push_back(above("ablate_red: MSE(red) / MSE(lime)",
                           red / std::max(row_value(rep, "lime", "ablate_red"), 1e-300), 10.0,
                           "> 800"));
    checks.push_back(label_check(sweep, r.config.training, "red", 60, 110, "83 +- 8"));
  } else if (id == "2.7.1") {
    for (const char* cond : {"suppress_hue", "ablate_hue"}) {
      for (const char* color : {"red", "yellow", "green", "cyan", "blue", "magenta"}) {
        checks.push_back(above(std::string(cond) + ": MSE(" + color + ")",
                               row_value(rep, color, cond), 0.15, "0.17-0.33"));
      }
      for (const char* color : {"black", "gray", "white"}) {
        checks.push_back(below(std::string(cond) + ": MSE(" + color + ")",
                               row_value(rep, color, cond), 0.005, "< 0.0011"));
      }
    }
    checks.push_back(label_check(sweep, r.config.training, "vibrant", 80, 140, "108 +- 11"));
  }
  return checks;
}

}  // namespace

Reproduction run_pipeline(const ExperimentConfig& config, std::size_t n_seeds, std::size_t jobs,
                          const std::string& experiment_id) {
  Reproduction r;
  r.experiment_id = experiment_id;
  r.config = config;
  r.sweep = run_sweep(config, n_seeds == 0 ? config.evaluation.seeds : n_seeds, jobs);
  if (!r.sweep.chosen) return r;
  const SeedResult& chosen = r.sweep.seeds[*r.sweep.chosen];
  r.chosen = make_checkpoint(chosen.run->model, chosen.seed, chosen.run->steps_completed,
                             config.training.concepts, config_hash(config));
  r.report = chosen.report;
  if (!experiment_id.empty()) r.checks = published_checks(experiment_id, r);
  return r;
}

Reproduction reproduce(const std::string& experiment_id, std::size_t n_seeds, std::size_t jobs) {
  return run_pipeline(preset_config(preset_for_experiment(experiment_id)), n_seeds, jobs,
                      experiment_id);
}

nlohmann::json to_json(const Reproduction& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"achieved", c.achieved},
                      {"published", c.published},
                      {"threshold", c.threshold},
                      {"pass", c.pass}});
  }
  nlohmann::json j{{"schema_version", kSchemaVersion},
                   {"config_hash", config_hash(r.config)},
                   {"experiment", r.experiment_id},
                   {"preset", r.config.name},
                   {"seeds_requested", r.sweep.seeds.size()},
                   {"seeds_succeeded", r.sweep.succeeded.size()},
                   {"checks", checks},
                   {"all_passed", r.all_passed()}};
  if (r.chosen) {
    j["chosen_seed"] = r.chosen->seed;
    j["report"] = to_json(r.report);
  }
  return j;
}

PlotData experiment_plot_data(const SphericalAutoencoder& model, const ExperimentConfig& config) {
  std::vector<PlotCondition> conditions{{"baseline", IntervenedModel{model, {}}}};
  for (const auto& spec : config.interventions) conditions.push_back({spec.name, apply(model, spec)});
  return plot_data(conditions, rgb_grid(config.training.grid_subdivisions), config.evaluation.plot);
}

void write_reproduction(const Reproduction& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string hash = config_hash(r.config);
  write_json(dir / "config.json", to_json(r.config));
  write_json(dir / "sweep_summary.json", to_json(r.sweep, r.config));
  write_json(dir / "reproduction.json", to_json(r));
  if (!r.chosen) return;
  nlohmann::json report = to_json(r.report);
  report["schema_version"] = kSchemaVersion;
  report["config_hash"] = hash;
  report["checkpoint"] = {{"seed", r.chosen->seed}, {"step", r.chosen->step}, {"path", "chosen/checkpoint.json"}};
  write_json(dir / "report.json", report);
  write_run(*r.sweep.seeds[*r.sweep.chosen].run, r.config, dir / "chosen");
  export_plot_data(experiment_plot_data(r.chosen->model, r.config), dir / "plots",
                   csv_preamble(hash));
}

std::filesystem::path output_root(const ExperimentConfig& config,
                                  const std::optional<std::filesystem::path>& out) {
  if (out) return *out;
  const std::filesystem::path sub = config.output_dir.empty() ? config.name : config.output_dir;
  if (sub.is_absolute()) return sub;
  const char* env = std::getenv("ANCHORLAB_OUT_DIR");
  const std::filesystem::path root = (env && *env) ? std::filesystem::path(env) : "runs";
  return root / sub;
}

}  // namespace anchorlab
