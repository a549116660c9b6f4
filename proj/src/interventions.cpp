#include "anchorlab/interventions.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "anchorlab/json_util.hpp"
#include "anchorlab/tensor.hpp"

namespace anchorlab {

double SuppressionFalloff::operator()(double alpha) const {
  if (alpha < threshold) return 0.0;
  return strength * std::pow((alpha - threshold) / (1.0 - threshold), exponent);
}

void SuppressionFalloff::validate() const {
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("suppression threshold must lie in [0, 1)");
  }
  if (!(strength >= 0.0 && strength <= 1.0)) {
    throw std::invalid_argument("suppression strength must lie in [0, 1]");
  }
  if (!(exponent >= 0.0) || !std::isfinite(exponent)) {
    throw std::invalid_argument("suppression exponent must be >= 0");
  }
}

double LinearMapper::operator()(double alpha) const {
  return alpha < threshold ? alpha : ceiling;
}

std::array<BezierMapper::Point, 4> BezierMapper::control_points() const {
  const double third = (1.0 - threshold) / 3.0;
  return {Point{threshold, threshold},
          Point{threshold + third, threshold + third * start_slope},
          Point{1.0 - third, ceiling - third * end_slope}, Point{1.0, ceiling}};
}

BezierMapper::Point BezierMapper::at(double t) const {
  const auto p = control_points();
  const double u = 1.0 - t;
  const double w0 = u * u * u;
  const double w1 = 3.0 * u * u * t;
  const double w2 = 3.0 * u * t * t;
  const double w3 = t * t * t;
  return {w0 * p[0].x + w1 * p[1].x + w2 * p[2].x + w3 * p[3].x,
          w0 * p[0].y + w1 * p[1].y + w2 * p[2].y + w3 * p[3].y};
}

double BezierMapper::operator()(double alpha) const {
  if (alpha <= threshold) return alpha;
  if (alpha >= 1.0) return ceiling;
  // B_x is monotone for these control points; bisect for B_x(t) = alpha.
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (at(mid).x < alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return at(0.5 * (lo + hi)).y;
}

double map_alignment(const AlignmentMapper& mapper, double alpha) {
  return std::visit([alpha](const auto& m) { return m(alpha); }, mapper);
}

double mapper_threshold(const AlignmentMapper& mapper) {
  return std::visit([](const auto& m) { return m.threshold; }, mapper);
}

std::vector<double> suppress(std::span<const double> z, std::span<const double> v,
                             const SuppressionFalloff& falloff) {
  const double alpha = std::max(0.0, dot(z, v));
  std::vector<double> out(z.begin(), z.end());
  const double h = alpha > 0.0 ? falloff(alpha) : 0.0;
  const double amount = h * alpha;
  if (amount == 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= amount * v[i];
  return out;
}

std::vector<double> repel(std::span<const double> z, std::span<const double> v,
                          const AlignmentMapper& mapper) {
  const double cosine = dot(z, v);
  const double alpha = std::max(0.0, cosine);
  std::vector<double> out(z.begin(), z.end());
  if (alpha <= mapper_threshold(mapper)) return out;

  std::vector<double> perp(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) perp[i] = z[i] - cosine * v[i];
  const double perp_norm = norm(perp);
  if (perp_norm < 1e-9) {
    throw DegenerateAlignment("repel: activation is parallel to the concept direction");
  }
  const double m = map_alignment(mapper, alpha);
  const double s = std::sqrt(std::max(0.0, 1.0 - m * m));
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = m * v[i] + s * perp[i] / perp_norm;
  return out;
}

std::vector<double> suppress_subspace(std::span<const double> z,
                                      std::span<const std::size_t> dims) {
  std::vector<double> out(z.begin(), z.end());
  for (std::size_t d : dims) {
    if (d >= out.size()) throw std::out_of_range("suppress_subspace: dimension out of range");
    out[d] = 0.0;
  }
  return out;
}

namespace {

void check_dims(std::span<const std::size_t> dims, std::size_t latent_dim) {
  for (std::size_t d : dims) {
    if (d >= latent_dim) {
      throw std::out_of_range("latent dimension " + std::to_string(d) +
                              " out of range for latent dim " + std::to_string(latent_dim));
    }
  }
}

}  // namespace

SphericalAutoencoder ablate(const SphericalAutoencoder& model,
                            std::span<const std::size_t> dims) {
  check_dims(dims, model.latent_dim());
  SphericalAutoencoder out = model;
  DenseLayer& enc = out.encoder().layers().back();
  DenseLayer& dec = out.decoder().layers().front();
  const std::size_t enc_cols = enc.weight.value.shape.cols;
  const std::size_t dec_rows = dec.weight.value.shape.rows;
  for (std::size_t d : dims) {
    for (std::size_t c = 0; c < enc_cols; ++c) enc.weight.value.at(d, c) = 0.0;
    enc.bias.value[d] = 0.0;
    for (std::size_t r = 0; r < dec_rows; ++r) dec.weight.value.at(r, d) = 0.0;
  }
  return out;
}

SphericalAutoencoder prune(const SphericalAutoencoder& model,
                           std::span<const std::size_t> dims) {
  const std::size_t e = model.latent_dim();
  check_dims(dims, e);
  const std::set<std::size_t> drop(dims.begin(), dims.end());
  if (drop.size() >= e) throw std::invalid_argument("prune: cannot remove every latent dimension");
  std::vector<std::size_t> keep;
  for (std::size_t d = 0; d < e; ++d) {
    if (!drop.contains(d)) keep.push_back(d);
  }

  SphericalAutoencoder out = model;
  DenseLayer& enc = out.encoder().layers().back();
  DenseLayer& dec = out.decoder().layers().front();

  const std::size_t hidden = enc.weight.value.shape.cols;
  Tensor w(keep.size(), hidden);
  Tensor b = Tensor::vector(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (std::size_t c = 0; c < hidden; ++c) w.at(i, c) = enc.weight.value.at(keep[i], c);
    b[i] = enc.bias.value[keep[i]];
  }
  enc.weight = Parameter(enc.weight.name, std::move(w));
  enc.bias = Parameter(enc.bias.name, std::move(b));

  const std::size_t rows = dec.weight.value.shape.rows;
  Tensor dw(rows, keep.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < keep.size(); ++i) dw.at(r, i) = dec.weight.value.at(r, keep[i]);
  }
  dec.weight = Parameter(dec.weight.name, std::move(dw));
  return out;
}

std::string to_string(InterventionKind kind) {
  switch (kind) {
    case InterventionKind::kSuppress: return "suppress";
    case InterventionKind::kRepel: return "repel";
    case InterventionKind::kAblate: return "ablate";
    case InterventionKind::kPrune: return "prune";
    case InterventionKind::kSuppressSubspace: return "suppress_subspace";
  }
  return "?";
}

InterventionKind parse_intervention_kind(const std::string& s) {
  if (s == "suppress") return InterventionKind::kSuppress;
  if (s == "repel") return InterventionKind::kRepel;
  if (s == "ablate") return InterventionKind::kAblate;
  if (s == "prune") return InterventionKind::kPrune;
  if (s == "suppress_subspace") return InterventionKind::kSuppressSubspace;
  throw std::invalid_argument("unknown intervention kind '" + s + "'");
}

void InterventionSpec::validate(std::size_t latent_dim) const {
  const std::string who = "intervention '" + name + "': ";
  if (kind == InterventionKind::kSuppress || kind == InterventionKind::kRepel) {
    if (direction.size() != latent_dim) {
      throw std::invalid_argument(who + "direction length " + std::to_string(direction.size()) +
                                  " does not match latent dim " + std::to_string(latent_dim));
    }
    if (std::abs(norm(direction) - 1.0) > 1e-12) {
      throw std::invalid_argument(who + "direction is not unit length");
    }
    if (kind == InterventionKind::kSuppress) falloff.validate();
    if (kind == InterventionKind::kRepel && mapper_threshold(mapper) < 0.0) {
      throw std::invalid_argument(who + "mapper threshold must be >= 0");
    }
    return;
  }
  for (std::size_t d : dims) {
    if (d >= latent_dim) {
      throw std::invalid_argument(who + "dimension " + std::to_string(d) +
                                  " exceeds latent dim " + std::to_string(latent_dim));
    }
  }
  if (kind == InterventionKind::kPrune &&
      std::set<std::size_t>(dims.begin(), dims.end()).size() >= latent_dim) {
    throw std::invalid_argument(who + "cannot prune every dimension");
  }
}

nlohmann::json to_json(const InterventionSpec& spec) {
  nlohmann::json j;
  j["name"] = spec.name;
  j["kind"] = to_string(spec.kind);
  switch (spec.kind) {
    case InterventionKind::kSuppress:
      j["direction"] = spec.direction;
      j["threshold"] = spec.falloff.threshold;
      j["strength"] = spec.falloff.strength;
      j["exponent"] = spec.falloff.exponent;
      break;
    case InterventionKind::kRepel:
      j["direction"] = spec.direction;
      if (const auto* lm = std::get_if<LinearMapper>(&spec.mapper)) {
        j["mapper"] = {{"type", "linear"}, {"threshold", lm->threshold}, {"ceiling", lm->ceiling}};
      } else {
        const auto& bm = std::get<BezierMapper>(spec.mapper);
        j["mapper"] = {{"type", "bezier"},
                       {"threshold", bm.threshold},
                       {"ceiling", bm.ceiling},
                       {"start_slope", bm.start_slope},
                       {"end_slope", bm.end_slope}};
      }
      break;
    default:
      j["dims"] = spec.dims;
      break;
  }
  return j;
}

InterventionSpec intervention_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("intervention must be an object");
  InterventionSpec s;
  s.kind = parse_intervention_kind(j.at("kind").get<std::string>());
  s.name = j.value("name", to_string(s.kind));
  switch (s.kind) {
    case InterventionKind::kSuppress:
      reject_unknown(j, {"name", "kind", "direction", "threshold", "strength", "exponent"},
                     "intervention");
      s.direction = j.at("direction").get<std::vector<double>>();
      s.falloff.threshold = j.value("threshold", s.falloff.threshold);
      s.falloff.strength = j.value("strength", s.falloff.strength);
      s.falloff.exponent = j.value("exponent", s.falloff.exponent);
      break;
    case InterventionKind::kRepel: {
      reject_unknown(j, {"name", "kind", "direction", "mapper"}, "intervention");
      s.direction = j.at("direction").get<std::vector<double>>();
      const auto& m = j.at("mapper");
      const std::string type = m.at("type").get<std::string>();
      if (type == "linear") {
        reject_unknown(m, {"type", "threshold", "ceiling"}, "linear mapper");
        s.mapper = LinearMapper{m.value("threshold", 0.0), m.value("ceiling", 0.0)};
      } else if (type == "bezier") {
        reject_unknown(m, {"type", "threshold", "ceiling", "start_slope", "end_slope"},
                       "bezier mapper");
        BezierMapper b;
        b.threshold = m.value("threshold", b.threshold);
        b.ceiling = m.value("ceiling", b.ceiling);
        b.start_slope = m.value("start_slope", b.start_slope);
        b.end_slope = m.value("end_slope", b.end_slope);
        s.mapper = b;
      } else {
        throw std::invalid_argument("unknown mapper type '" + type + "'");
      }
      break;
    }
    default:
      reject_unknown(j, {"name", "kind", "dims"}, "intervention");
      s.dims = j.at("dims").get<std::vector<std::size_t>>();
      break;
  }
  return s;
}

IntervenedModel apply(const SphericalAutoencoder& model, const InterventionSpec& spec) {
  spec.validate(model.latent_dim());
  switch (spec.kind) {
    case InterventionKind::kSuppress:
      return {model, [v = spec.direction, f = spec.falloff](std::span<const double> z) {
                return suppress(z, v, f);
              }};
    case InterventionKind::kRepel:
      return {model, [v = spec.direction, m = spec.mapper](std::span<const double> z) {
                return repel(z, v, m);
              }};
    case InterventionKind::kSuppressSubspace:
      return {model, [d = spec.dims](std::span<const double> z) { return suppress_subspace(z, d); }};
    case InterventionKind::kAblate:
      return {ablate(model, spec.dims), {}};
    case InterventionKind::kPrune:
      return {prune(model, spec.dims), {}};
  }
  throw std::logic_error("unhandled intervention kind");
}

}  // namespace anchorlab
