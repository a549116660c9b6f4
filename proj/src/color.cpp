#include "anchorlab/color.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "anchorlab/rng.hpp"

namespace anchorlab {

Color::Color(double r, double g, double b) : rgb_{r, g, b} {
  for (double c : rgb_) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw std::invalid_argument("color channel " + std::to_string(c) +
                                  " outside [0, 1]");
    }
  }
}

HsvColor to_hsv(const Color& c) {
  const double r = c.r(), g = c.g(), b = c.b();
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double chroma = mx - mn;
  HsvColor out;
  out.v = mx;
  out.s = mx > 0.0 ? chroma / mx : 0.0;
  if (chroma <= 0.0) return out;
  double sector = 0.0;
  if (mx == r) {
    sector = (g - b) / chroma;
    if (sector < 0.0) sector += 6.0;
  } else if (mx == g) {
    sector = (b - r) / chroma + 2.0;
  } else {
    sector = (r - g) / chroma + 4.0;
  }
  out.h = sector / 6.0;
  if (out.h >= 1.0) out.h -= 1.0;
  return out;
}

Color to_rgb(const HsvColor& hsv) {
  double h = hsv.h - std::floor(hsv.h);
  const double sector = h * 6.0;
  const double c = hsv.v * hsv.s;
  const double x = c * (1.0 - std::abs(std::fmod(sector, 2.0) - 1.0));
  const double m = hsv.v - c;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(sector) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
  return Color(clamp01(r + m), clamp01(g + m), clamp01(b + m));
}

std::vector<Color> rgb_grid(std::size_t subdivisions) {
  if (subdivisions < 2) {
    throw std::invalid_argument("rgb_grid: subdivisions must be >= 2, got " +
                                std::to_string(subdivisions));
  }
  const double step = 1.0 / static_cast<double>(subdivisions - 1);
  auto level = [&](std::size_t i) {
    return i + 1 == subdivisions ? 1.0 : static_cast<double>(i) * step;
  };
  std::vector<Color> grid;
  grid.reserve(subdivisions * subdivisions * subdivisions);
  for (std::size_t i = 0; i < subdivisions; ++i) {
    for (std::size_t j = 0; j < subdivisions; ++j) {
      for (std::size_t k = 0; k < subdivisions; ++k) {
        grid.emplace_back(level(i), level(j), level(k));
      }
    }
  }
  return grid;
}

double p_red(const Color& x) {
  const double base = x.r() * (1.0 - x.g() / 2.0 - x.b() / 2.0);
  return std::clamp(0.08 * std::pow(base, 8), 0.0, 1.0);
}

double p_vibrant(const Color& x) {
  const HsvColor hsv = to_hsv(x);
  return std::clamp(0.01 * std::pow(hsv.s * hsv.v, 10), 0.0, 1.0);
}

LabelProbability label_probability(const std::string& name) {
  if (name == "red") return p_red;
  if (name == "vibrant") return p_vibrant;
  throw std::invalid_argument("unknown label function '" + name + "'");
}

std::vector<bool> draw_labels(const Color& x, std::span<const LabelProbability> concepts,
                              std::mt19937_64& rng) {
  std::vector<bool> labels(concepts.size());
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    const double u = uniform01(rng);
    labels[i] = concepts[i](x) > u;
  }
  return labels;
}

double color_similarity(const HsvColor& target, const HsvColor& x) {
  const double dh = std::abs(x.h - target.h);
  const double delta_deg = 360.0 * std::min(dh, 1.0 - dh);
  const double hue_sim = std::max(0.0, (90.0 - delta_deg) / 90.0);
  const double r = (x.s * x.v + target.s * target.v) / 2.0;
  const double weighted_hue = r * hue_sim + (1.0 - r);
  return weighted_hue * (1.0 - std::abs(x.s - target.s)) *
         (1.0 - std::abs(x.v - target.v));
}

const std::vector<NamedColor>& reference_colors() {
  constexpr double half = 127.0 / 255.0;
  static const std::vector<NamedColor> colors{
      {"red", Color(1, 0, 0)},       {"yellow", Color(1, 1, 0)},
      {"lime", Color(half, 1, 0)},   {"green", Color(0, 1, 0)},
      {"cyan", Color(0, 1, 1)},      {"blue", Color(0, 0, 1)},
      {"purple", Color(half, 0, 1)}, {"magenta", Color(1, 0, 1)},
      {"black", Color(0, 0, 0)},     {"gray", Color(half, half, half)},
      {"white", Color(1, 1, 1)},
  };
  return colors;
}

const Color& reference_color(const std::string& name) {
  for (const auto& c : reference_colors()) {
    if (c.name == name) return c.color;
  }
  throw std::invalid_argument("unknown reference color '" + name + "'");
}

}  // namespace anchorlab
