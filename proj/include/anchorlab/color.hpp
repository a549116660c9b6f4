#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace anchorlab {

/// RGB color with channels in [0, 1]; construction rejects anything else.
class Color {
 public:
  Color() = default;
  Color(double r, double g, double b);

  double r() const { return rgb_[0]; }
  double g() const { return rgb_[1]; }
  double b() const { return rgb_[2]; }
  std::span<const double, 3> rgb() const { return rgb_; }

  bool operator==(const Color&) const = default;

 private:
  std::array<double, 3> rgb_{0.0, 0.0, 0.0};
};

/// Hue as a fraction of a full turn in [0, 1); saturation and value in [0, 1].
struct HsvColor {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;
};

/// Hexagonal HSV model. Achromatic colors (s = 0) get hue 0.
HsvColor to_hsv(const Color& c);
Color to_rgb(const HsvColor& hsv);

/// Uniform grid over the RGB cube including the corners, in r-major order.
/// Throws std::invalid_argument when subdivisions < 2.
std::vector<Color> rgb_grid(std::size_t subdivisions);

/// 0.08 * [r (1 - g/2 - b/2)]^8, peaking at pure red.
double p_red(const Color& x);
/// 0.01 * (s v)^10 on the HSV view.
double p_vibrant(const Color& x);

using LabelProbability = std::function<double(const Color&)>;

/// Looks up a named label-probability function ("red", "vibrant").
/// Throws std::invalid_argument for unknown names.
LabelProbability label_probability(const std::string& name);

/// One Bernoulli draw 1[p > u], u ~ U(0, 1), per probability function.
std::vector<bool> draw_labels(const Color& x, std::span<const LabelProbability> concepts,
                              std::mt19937_64& rng);

/// Hue-aware similarity in [0, 1]: hue similarity decays linearly to zero at a
/// quarter turn, is blended towards 1 for low-vibrancy pairs, and is scaled by
/// saturation and value proximity.
double color_similarity(const HsvColor& target, const HsvColor& x);

/// Named reference colors used in reports.
struct NamedColor {
  std::string name;
  Color color;
};
/// Red, yellow, lime, green, cyan, blue, purple, magenta, black, gray, white.
const std::vector<NamedColor>& reference_colors();
const Color& reference_color(const std::string& name);

}  // namespace anchorlab
