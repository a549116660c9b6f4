#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "anchorlab/autoencoder.hpp"
#include "json.hpp"

namespace anchorlab {

/// Raised when repulsion needs a rotation plane but z is (anti)parallel to v.
class DegenerateAlignment : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Suppression strength h(alpha), the fraction of the aligned component that
/// is removed: zero below `threshold`, then
/// strength * ((alpha - threshold) / (1 - threshold))^exponent.
/// The defaults (exponent 0) remove the whole positive component.
struct SuppressionFalloff {
  double threshold = 0.0;
  double strength = 1.0;
  double exponent = 0.0;

  double operator()(double alpha) const;
  void validate() const;
  bool operator==(const SuppressionFalloff&) const = default;
};

/// Alignment ceiling: alpha below `threshold` is kept, anything at or above
/// maps to `ceiling`.
struct LinearMapper {
  double threshold = 0.0;
  double ceiling = 0.0;

  double operator()(double alpha) const;
  bool operator==(const LinearMapper&) const = default;
};

/// Cubic Bezier from (threshold, threshold) to (1, ceiling). The interior
/// control points sit at one-third spans along x, with the given slopes at
/// each end.
struct BezierMapper {
  double threshold = 0.0;
  double ceiling = 0.5;
  double start_slope = 1.0;
  double end_slope = 0.0;

  struct Point {
    double x;
    double y;
  };
  std::array<Point, 4> control_points() const;
  Point at(double t) const;
  double operator()(double alpha) const;
  bool operator==(const BezierMapper&) const = default;
};

using AlignmentMapper = std::variant<LinearMapper, BezierMapper>;

double map_alignment(const AlignmentMapper& mapper, double alpha);
double mapper_threshold(const AlignmentMapper& mapper);

/// z - h(alpha) alpha v with alpha = max(0, z.v). Never lengthens z; leaves
/// anti-aligned activations alone.
std::vector<double> suppress(std::span<const double> z, std::span<const double> v,
                             const SuppressionFalloff& falloff = {});

/// Rotates z within the (z, v) plane so that its alignment with v becomes
/// m(alpha). Alignments at or below the mapper threshold pass through.
std::vector<double> repel(std::span<const double> z, std::span<const double> v,
                          const AlignmentMapper& mapper);

/// Zeroes the coordinates in `dims` without renormalizing.
std::vector<double> suppress_subspace(std::span<const double> z,
                                      std::span<const std::size_t> dims);

/// Zeroes encoder output rows and biases and decoder input columns for
/// `dims`. Throws std::out_of_range for dims >= latent dim.
SphericalAutoencoder ablate(const SphericalAutoencoder& model,
                            std::span<const std::size_t> dims);

/// Removes `dims` from the latent layer entirely. Throws std::out_of_range for
/// invalid dims and std::invalid_argument when every dimension would go.
SphericalAutoencoder prune(const SphericalAutoencoder& model,
                           std::span<const std::size_t> dims);

enum class InterventionKind { kSuppress, kRepel, kAblate, kPrune, kSuppressSubspace };

std::string to_string(InterventionKind kind);
InterventionKind parse_intervention_kind(const std::string& s);

/// Tagged description of one intervention.
struct InterventionSpec {
  std::string name;
  InterventionKind kind = InterventionKind::kSuppress;
  std::vector<double> direction;
  std::vector<std::size_t> dims;
  SuppressionFalloff falloff;
  AlignmentMapper mapper = LinearMapper{};

  bool acts_on_weights() const {
    return kind == InterventionKind::kAblate || kind == InterventionKind::kPrune;
  }
  /// Throws std::invalid_argument if inconsistent with `latent_dim`.
  void validate(std::size_t latent_dim) const;
  bool operator==(const InterventionSpec&) const = default;
};

nlohmann::json to_json(const InterventionSpec& spec);
InterventionSpec intervention_from_json(const nlohmann::json& j);

/// A model ready to evaluate under an intervention: weight edits are baked
/// into `model`, inference-time edits live in `transform`.
struct IntervenedModel {
  SphericalAutoencoder model;
  LatentTransform transform;

  ForwardResult forward(std::span<const double> input) const {
    return model.forward(input, transform);
  }
};

IntervenedModel apply(const SphericalAutoencoder& model, const InterventionSpec& spec);

}  // namespace anchorlab
