#include "anchorlab/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "anchorlab/csv.hpp"

namespace anchorlab {

double per_color_mse(const Color& x, std::span<const double> y) {
  if (y.size() != 3) throw ShapeError("per_color_mse: reconstruction must have 3 channels");
  double sum = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    const double d = x.rgb()[c] - std::clamp(y[c], 0.0, 1.0);
    sum += d * d;
  }
  return sum / 3.0;
}

std::vector<double> color_errors(const IntervenedModel& model, std::span<const Color> colors) {
  std::vector<double> errors;
  errors.reserve(colors.size());
  for (const Color& c : colors) errors.push_back(per_color_mse(c, model.forward(c.rgb()).output));
  return errors;
}

double reconstruction_loss(const SphericalAutoencoder& model, std::span<const Color> colors) {
  if (colors.empty()) throw std::invalid_argument("reconstruction_loss: no colors");
  const auto errors = color_errors(IntervenedModel{model, {}}, colors);
  return std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
}

double squared_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("squared_correlation: length mismatch");
  if (a.size() < 3) throw std::invalid_argument("squared_correlation: need at least 3 points");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  // Relative threshold so that rounding noise around a constant counts as constant.
  const double scale_a = std::max(1.0, ma * ma) * n;
  const double scale_b = std::max(1.0, mb * mb) * n;
  if (saa <= 1e-24 * scale_a || sbb <= 1e-24 * scale_b) {
    throw DegenerateSelectivity("squared_correlation: zero variance");
  }
  return std::clamp(sab * sab / (saa * sbb), 0.0, 1.0);
}

std::string to_string(SimilarityBasis basis) {
  return basis == SimilarityBasis::kTarget ? "target" : "vibrancy";
}

SimilarityBasis parse_similarity_basis(const std::string& s) {
  if (s == "target") return SimilarityBasis::kTarget;
  if (s == "vibrancy") return SimilarityBasis::kVibrancy;
  throw std::invalid_argument("unknown similarity basis '" + s + "'");
}

std::vector<double> similarity_scores(std::span<const Color> colors, SimilarityBasis basis,
                                      const Color& target, int k) {
  if (k < 1) throw std::invalid_argument("similarity power must be >= 1");
  const HsvColor t = to_hsv(target);
  std::vector<double> scores;
  scores.reserve(colors.size());
  for (const Color& c : colors) {
    const HsvColor h = to_hsv(c);
    const double s = basis == SimilarityBasis::kTarget ? color_similarity(t, h) : h.s * h.v;
    scores.push_back(std::pow(s, k));
  }
  return scores;
}

double selectivity(const IntervenedModel& model, std::span<const Color> colors,
                   const Color& target, int k, SimilarityBasis basis) {
  const auto scores = similarity_scores(colors, basis, target, k);
  return squared_correlation(color_errors(model, colors), scores);
}

double organization_loss(const SphericalAutoencoder& model,
                         std::span<const ConceptSpec> concepts, std::span<const Color> colors) {
  if (concepts.empty()) return 0.0;
  if (colors.empty()) throw std::invalid_argument("organization_loss: no colors");
  std::vector<LabelProbability> probability(concepts.size());
  for (std::size_t k = 0; k < concepts.size(); ++k) {
    if (is_attractive(concepts[k].kind) && concepts[k].application == Application::kLabeledOnly) {
      probability[k] = label_probability(concepts[k].label);
    }
  }
  std::vector<double> sums(concepts.size(), 0.0);
  for (const Color& c : colors) {
    const auto z = model.forward(c.rgb()).unit_latent;
    for (std::size_t k = 0; k < concepts.size(); ++k) {
      const double w = probability[k] ? probability[k](c) : 1.0;
      sums[k] += w * concept_term(concepts[k], z);
    }
  }
  double total = 0.0;
  for (double s : sums) total += s / static_cast<double>(colors.size());
  return total;
}

bool dominates(const SelectionMetrics& a, const SelectionMetrics& b) {
  const bool no_worse = a.selectivity >= b.selectivity && a.reconstruction <= b.reconstruction &&
                        a.organization <= b.organization;
  const bool better = a.selectivity > b.selectivity || a.reconstruction < b.reconstruction ||
                      a.organization < b.organization;
  return no_worse && better;
}

ParetoResult pareto_select(std::span<const SelectionMetrics> records) {
  if (records.empty()) throw std::invalid_argument("pareto_select: no records");
  ParetoResult result;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const bool dominated = std::any_of(records.begin(), records.end(),
                                       [&](const SelectionMetrics& o) { return dominates(o, records[i]); });
    if (!dominated) result.frontier.push_back(i);
  }
  auto better = [&](std::size_t i, std::size_t j) {
    const auto& a = records[i];
    const auto& b = records[j];
    if (a.selectivity != b.selectivity) return a.selectivity > b.selectivity;
    if (a.reconstruction != b.reconstruction) return a.reconstruction < b.reconstruction;
    if (a.organization != b.organization) return a.organization < b.organization;
    return i < j;
  };
  result.chosen = *std::min_element(result.frontier.begin(), result.frontier.end(), better);
  return result;
}

EvalReport evaluate(const IntervenedModel& baseline, std::span<const ConceptSpec> concepts,
                    std::span<const ScoredVariant> variants, std::span<const Color> colors,
                    const std::string& target) {
  EvalReport report;
  report.target = target;
  const Color& target_color = reference_color(target);

  for (const auto& named : reference_colors()) {
    EvalRow row{named.name, named.color, 0.0, {}};
    row.baseline = per_color_mse(named.color, baseline.forward(named.color.rgb()).output);
    for (const auto& v : variants) {
      row.intervened[v.name] = per_color_mse(named.color, v.model.forward(named.color.rgb()).output);
    }
    report.rows.push_back(std::move(row));
  }
  for (const auto& v : variants) {
    double r2 = 0.0;
    try {
      r2 = selectivity(v.model, colors, target_color, v.similarity_power, v.basis);
    } catch (const DegenerateSelectivity&) {
    }
    report.selectivity[v.name] = r2;
    report.similarity_power[v.name] = v.similarity_power;
    report.basis[v.name] = v.basis;
  }
  report.reconstruction_loss = reconstruction_loss(baseline.model, colors);
  report.organization_loss = organization_loss(baseline.model, concepts, colors);
  return report;
}

EvalReport evaluate(const SphericalAutoencoder& model, std::span<const ConceptSpec> concepts,
                    std::span<const EvalCondition> conditions, std::span<const Color> colors,
                    const std::string& target) {
  std::vector<ScoredVariant> variants;
  for (const auto& c : conditions) {
    variants.push_back({c.intervention.name, apply(model, c.intervention), c.similarity_power, c.basis});
  }
  return evaluate(IntervenedModel{model, {}}, concepts, variants, colors, target);
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"color", r.color},
                    {"rgb", {r.rgb.r(), r.rgb.g(), r.rgb.b()}},
                    {"baseline", r.baseline},
                    {"intervened", r.intervened}});
  }
  nlohmann::json selectivity = nlohmann::json::object();
  for (const auto& [name, r2] : report.selectivity) {
    selectivity[name] = {{"r2", r2},
                         {"similarity_power", report.similarity_power.at(name)},
                         {"basis", to_string(report.basis.at(name))}};
  }
  return {{"target", report.target},
          {"rows", rows},
          {"summary",
           {{"selectivity", selectivity},
            {"reconstruction_loss", report.reconstruction_loss},
            {"organization_loss", report.organization_loss}}},
          {"bounds", {{"gray", kGrayBound}, {"random", kRandomBound}}}};
}

namespace {

std::vector<double> final_latent(const IntervenedModel& m, const Color& c) {
  const auto r = m.model.forward(c.rgb());
  return m.transform ? m.transform(r.unit_latent) : r.unit_latent;
}

void append_row(std::string& out, const std::string& condition, std::initializer_list<double> values) {
  out += condition;
  for (double v : values) {
    out += ',';
    append_number(out, v);
  }
  out += '\n';
}

}  // namespace

PlotData plot_data(std::span<const PlotCondition> conditions, std::span<const Color> grid,
                   const PlotOptions& options) {
  if (options.sweep_hues == 0 || options.sweep_values == 0 || options.curve_hues == 0) {
    throw std::invalid_argument("plot_data: sweep sizes must be positive");
  }
  PlotData data;
  data.projections = "condition,dim_i,dim_j,zi,zj,r,g,b\n";
  data.sweep = "condition,hue,value,true_r,true_g,true_b,recon_r,recon_g,recon_b,mse\n";
  data.error_by_hue = "condition,hue,mse\n";

  for (const auto& cond : conditions) {
    for (const Color& c : grid) {
      const auto z = final_latent(cond.model, c);
      for (std::size_t i = 0; i < z.size(); ++i) {
        for (std::size_t j = i + 1; j < z.size(); ++j) {
          append_row(data.projections, cond.name,
                     {double(i), double(j), z[i], z[j], c.r(), c.g(), c.b()});
        }
      }
    }
    for (std::size_t h = 0; h < options.sweep_hues; ++h) {
      const double hue = double(h) / double(options.sweep_hues);
      for (std::size_t v = 1; v <= options.sweep_values; ++v) {
        const double value = double(v) / double(options.sweep_values);
        const Color truth = to_rgb({hue, 1.0, value});
        const auto y = cond.model.forward(truth.rgb()).output;
        const double r = std::clamp(y[0], 0.0, 1.0);
        const double g = std::clamp(y[1], 0.0, 1.0);
        const double b = std::clamp(y[2], 0.0, 1.0);
        append_row(data.sweep, cond.name,
                   {hue, value, truth.r(), truth.g(), truth.b(), r, g, b, per_color_mse(truth, y)});
      }
    }
    for (std::size_t h = 0; h < options.curve_hues; ++h) {
      const double hue = double(h) / double(options.curve_hues);
      const Color truth = to_rgb({hue, 1.0, 1.0});
      append_row(data.error_by_hue, cond.name,
                 {hue, per_color_mse(truth, cond.model.forward(truth.rgb()).output)});
    }
  }
  return data;
}

void export_plot_data(const PlotData& data, const std::filesystem::path& dir,
                      const std::string& preamble) {
  std::filesystem::create_directories(dir);
  const std::pair<const char*, const std::string*> files[] = {
      {"projections.csv", &data.projections},
      {"hue_value_sweep.csv", &data.sweep},
      {"error_by_hue.csv", &data.error_by_hue}};
  for (const auto& [name, body] : files) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << preamble << *body;
  }
}

}  // namespace anchorlab
