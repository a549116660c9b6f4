#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "anchorlab/autoencoder.hpp"
#include "anchorlab/color.hpp"
#include "anchorlab/interventions.hpp"
#include "anchorlab/losses.hpp"
#include "json.hpp"

namespace anchorlab {

/// MSE against a mid-gray reconstruction of pure red.
inline constexpr double kGrayBound = 0.25;
/// Expected MSE of pure red against a uniformly random reconstruction.
inline constexpr double kRandomBound = 1.0 / 3.0;

/// Selectivity is undefined when either series has zero variance.
class DegenerateSelectivity : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mean of the three squared channel errors after clamping `y` to [0, 1].
double per_color_mse(const Color& x, std::span<const double> y);

/// Reconstruction MSE of every color under an (optionally intervened) model.
std::vector<double> color_errors(const IntervenedModel& model, std::span<const Color> colors);

/// Mean per-color MSE over `colors` for the plain model.
double reconstruction_loss(const SphericalAutoencoder& model, std::span<const Color> colors);

/// Squared Pearson correlation.
double squared_correlation(std::span<const double> a, std::span<const double> b);

/// What post-intervention error is correlated against: similarity to the
/// target color, or vibrancy (s * v) for interventions on a hue subspace.
enum class SimilarityBasis { kTarget, kVibrancy };

std::string to_string(SimilarityBasis basis);
SimilarityBasis parse_similarity_basis(const std::string& s);

/// score(x)^k per color, where score is color_similarity(target, x) or s * v.
std::vector<double> similarity_scores(std::span<const Color> colors, SimilarityBasis basis,
                                      const Color& target, int k);

/// Squared correlation between post-intervention error and the similarity
/// scores over `colors`.
double selectivity(const IntervenedModel& model, std::span<const Color> colors,
                   const Color& target, int k,
                   SimilarityBasis basis = SimilarityBasis::kTarget);

/// Expected concept loss: attractive terms weighted by the label probability
/// of each color (1 when the concept applies to every sample), repulsive
/// terms by 1. Terms are averaged over `colors` and summed with unit weight.
double organization_loss(const SphericalAutoencoder& model,
                         std::span<const ConceptSpec> concepts, std::span<const Color> colors);

struct SelectionMetrics {
  double selectivity = 0.0;
  double reconstruction = 0.0;
  double organization = 0.0;
  bool operator==(const SelectionMetrics&) const = default;
};

/// True when `a` is no worse than `b` everywhere and better somewhere
/// (higher selectivity, lower reconstruction and organization loss).
bool dominates(const SelectionMetrics& a, const SelectionMetrics& b);

struct ParetoResult {
  std::size_t chosen = 0;
  std::vector<std::size_t> frontier;  // ascending indices
};

/// Non-dominated frontier and the frontier member with the highest
/// selectivity (ties: lower reconstruction, lower organization, lower index).
ParetoResult pareto_select(std::span<const SelectionMetrics> records);

/// A named intervention to evaluate, with the similarity power used to score
/// its selectivity.
struct EvalCondition {
  InterventionSpec intervention;
  int similarity_power = 2;
  SimilarityBasis basis = SimilarityBasis::kTarget;
  bool operator==(const EvalCondition&) const = default;
};

struct EvalRow {
  std::string color;
  Color rgb;
  double baseline = 0.0;
  std::map<std::string, double> intervened;  // keyed by intervention name
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::map<std::string, double> selectivity;  // keyed by intervention name
  std::map<std::string, int> similarity_power;
  std::map<std::string, SimilarityBasis> basis;
  double reconstruction_loss = 0.0;
  double organization_loss = 0.0;
  std::string target = "red";
};

/// Scores the baseline and every condition on the reference colors and
/// computes summary metrics over `colors` (normally the full training grid).
/// Conditions whose error does not vary get a selectivity of 0.
EvalReport evaluate(const SphericalAutoencoder& model, std::span<const ConceptSpec> concepts,
                    std::span<const EvalCondition> conditions, std::span<const Color> colors,
                    const std::string& target = "red");

/// A prepared variant to score against `baseline`.
struct ScoredVariant {
  std::string name;
  IntervenedModel model;
  int similarity_power = 2;
  SimilarityBasis basis = SimilarityBasis::kTarget;
};

/// Same as above for variants that are already built, e.g. on top of a
/// checkpoint that carries earlier interventions. Reconstruction and
/// organization are measured on baseline.model without its transform.
EvalReport evaluate(const IntervenedModel& baseline, std::span<const ConceptSpec> concepts,
                    std::span<const ScoredVariant> variants, std::span<const Color> colors,
                    const std::string& target = "red");

nlohmann::json to_json(const EvalReport& report);

struct PlotOptions {
  std::size_t sweep_hues = 12;
  std::size_t sweep_values = 5;
  std::size_t curve_hues = 72;
  bool operator==(const PlotOptions&) const = default;
};

/// A labelled model variant to plot ("baseline", an intervention name, ...).
struct PlotCondition {
  std::string name;
  IntervenedModel model;
};

/// CSV bodies for the three plot files.
struct PlotData {
  std::string projections;  // condition,dim_i,dim_j,zi,zj,r,g,b
  std::string sweep;        // condition,hue,value,true_r,true_g,true_b,recon_r,recon_g,recon_b,mse
  std::string error_by_hue; // condition,hue,mse
};

PlotData plot_data(std::span<const PlotCondition> conditions, std::span<const Color> grid,
                   const PlotOptions& options = {});

/// Writes projections.csv, hue_value_sweep.csv and error_by_hue.csv into
/// `dir`, each starting with `preamble`.
void export_plot_data(const PlotData& data, const std::filesystem::path& dir,
                      const std::string& preamble = "");

}  // namespace anchorlab
