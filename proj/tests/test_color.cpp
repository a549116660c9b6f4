#include <cmath>
#include <map>
#include <set>

#include "anchorlab/color.hpp"
#include "anchorlab/rng.hpp"
#include "anchorlab/trainer.hpp"
#include "doctest.h"

using namespace anchorlab;
using doctest::Approx;

TEST_CASE("color construction is range checked") {
  CHECK_NOTHROW(Color(0, 0.5, 1));
  CHECK_THROWS_AS(Color(1.1, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(Color(0, -0.01, 0), std::invalid_argument);
  CHECK_THROWS_AS(Color(0, 0, std::nan("")), std::invalid_argument);
}

TEST_CASE("hsv against reference values") {
  struct Case {
    Color rgb;
    double h, s, v;
  };
  // Reference values from an independent implementation (Python colorsys).
  const Case cases[] = {
      {Color(1, 0, 0), 0.0, 1.0, 1.0},
      {Color(0.2, 0.6, 0.4), 0.416666666666667, 0.666666666666667, 0.6},
      {Color(0.9, 0.1, 0.7), 0.875, 0.888888888888889, 0.9},
      {Color(0.25, 0.25, 0.5), 0.666666666666667, 0.5, 0.5},
      {Color(0.5, 0.5, 0.5), 0.0, 0.0, 0.5},
      {Color(0, 1, 1), 0.5, 1.0, 1.0},
      {Color(0.3, 0.05, 0.0), 0.027777777777778, 1.0, 0.3},
  };
  for (const auto& c : cases) {
    const HsvColor hsv = to_hsv(c.rgb);
    CHECK(hsv.h == Approx(c.h).epsilon(1e-12));
    CHECK(hsv.s == Approx(c.s).epsilon(1e-12));
    CHECK(hsv.v == Approx(c.v).epsilon(1e-12));
    const Color back = to_rgb(hsv);
    CHECK(back.r() == Approx(c.rgb.r()).epsilon(1e-12));
    CHECK(back.g() == Approx(c.rgb.g()).epsilon(1e-12));
    CHECK(back.b() == Approx(c.rgb.b()).epsilon(1e-12));
  }
}

TEST_CASE("hsv round trip over the grid") {
  for (const Color& c : rgb_grid(8)) {
    const Color back = to_rgb(to_hsv(c));
    CHECK(std::abs(back.r() - c.r()) < 1e-12);
    CHECK(std::abs(back.g() - c.g()) < 1e-12);
    CHECK(std::abs(back.b() - c.b()) < 1e-12);
  }
}

TEST_CASE("rgb grid") {
  const auto corners = rgb_grid(2);
  CHECK(corners.size() == 8);
  for (const Color& c : corners) {
    for (double ch : c.rgb()) CHECK((ch == 0.0 || ch == 1.0));
  }
  const auto g8 = rgb_grid(8);
  CHECK(g8.size() == 512);
  CHECK(g8.front() == Color(0, 0, 0));
  CHECK(g8.back() == Color(1, 1, 1));
  std::set<double> levels;
  for (const Color& c : rgb_grid(3)) levels.insert(c.r());
  CHECK(levels == std::set<double>{0.0, 0.5, 1.0});
  CHECK(rgb_grid(3).size() == 27);
  CHECK_THROWS_AS(rgb_grid(1), std::invalid_argument);
}

TEST_CASE("label probabilities") {
  CHECK(p_red(Color(1, 0, 0)) == Approx(0.08));
  CHECK(p_red(Color(0, 0.3, 0.9)) == 0.0);
  CHECK(p_red(Color(1, 0.5, 0)) == Approx(0.08 * std::pow(0.75, 8)));
  CHECK(p_red(Color(1, 0.5, 0)) == Approx(0.0080090).epsilon(1e-6));
  CHECK(p_vibrant(Color(1, 0, 0)) == Approx(0.01));
  CHECK(p_vibrant(Color(0.4, 0.4, 0.4)) == 0.0);
  CHECK(p_vibrant(to_rgb({0.3, 0.9, 1.0})) == Approx(0.003487).epsilon(1e-4));
  CHECK(label_probability("red")(Color(1, 0, 0)) == p_red(Color(1, 0, 0)));
  CHECK_THROWS_AS(label_probability("teal"), std::invalid_argument);
}

TEST_CASE("label draws") {
  std::mt19937_64 rng(1);
  const std::vector<LabelProbability> never{[](const Color&) { return 0.0; }};
  const std::vector<LabelProbability> always{[](const Color&) { return 1.0; }};
  for (int i = 0; i < 1000; ++i) {
    CHECK_FALSE(draw_labels(Color(1, 0, 0), never, rng)[0]);
    CHECK(draw_labels(Color(1, 0, 0), always, rng)[0]);
  }
}

TEST_CASE("batch sampling is uniform over the grid") {
  const auto grid = rgb_grid(8);
  auto rng = make_stream(0, RngStream::kBatches);
  std::map<std::size_t, std::size_t> counts;
  const std::size_t steps = 1500, batch = 64;
  for (std::size_t s = 0; s < steps; ++s) {
    for (const Color& c : sample_batch(grid, batch, rng)) {
      const auto r = static_cast<std::size_t>(std::lround(c.r() * 7));
      const auto g = static_cast<std::size_t>(std::lround(c.g() * 7));
      const auto b = static_cast<std::size_t>(std::lround(c.b() * 7));
      ++counts[(r * 8 + g) * 8 + b];
    }
  }
  CHECK(counts.size() == 512);
  const double expected = static_cast<double>(steps * batch) / 512.0;
  CHECK(expected == 187.5);
  double chi2 = 0.0;
  for (const auto& [k, n] : counts) chi2 += (n - expected) * (n - expected) / expected;
  // 99.9th percentile of chi-square with 511 degrees of freedom.
  CHECK(chi2 < 615.51);
}

TEST_CASE("batch sampling is deterministic per seed") {
  const auto grid = rgb_grid(8);
  auto a = make_stream(42, RngStream::kBatches);
  auto b = make_stream(42, RngStream::kBatches);
  auto other = make_stream(42, RngStream::kLabels);
  const auto ba = sample_batch(grid, 64, a);
  CHECK(ba == sample_batch(grid, 64, b));
  CHECK(ba != sample_batch(grid, 64, other));
  CHECK(ba.size() == 64);
}

TEST_CASE("red label counts per run are binomially plausible") {
  // Simulate the label stream of whole runs (1500 x 64 draws) and check the
  // realized count against the window the experiments rely on.
  const auto grid = rgb_grid(8);
  double mean_p = 0.0;
  for (const Color& c : grid) mean_p += p_red(c);
  mean_p /= static_cast<double>(grid.size());
  const double expected = 96000.0 * mean_p;
  CHECK(expected == Approx(86.3).epsilon(0.01));

  const std::vector<LabelProbability> red{p_red};
  int inside = 0;
  const int runs = 100;
  double total = 0.0;
  for (int seed = 0; seed < runs; ++seed) {
    auto batches = make_stream(seed, RngStream::kBatches);
    auto labels = make_stream(seed, RngStream::kLabels);
    int count = 0;
    for (int s = 0; s < 1500; ++s) {
      for (const Color& c : sample_batch(grid, 64, batches)) count += draw_labels(c, red, labels)[0];
    }
    total += count;
    if (count >= 60 && count <= 110) ++inside;
  }
  CHECK(inside >= 95);
  // Mean of 100 runs: standard error about sqrt(86 / 100) ~ 0.93.
  CHECK(std::abs(total / runs - expected) < 4.0);
}

TEST_CASE("color similarity") {
  const HsvColor red = to_hsv(Color(1, 0, 0));
  CHECK(color_similarity(red, red) == 1.0);
  CHECK(color_similarity(red, to_hsv(Color(0, 1, 1))) == 0.0);
  CHECK(color_similarity(red, HsvColor{30.0 / 360.0, 1.0, 1.0}) == Approx(2.0 / 3.0));
  CHECK(color_similarity(red, HsvColor{0.0, 0.0, 0.5}) == 0.0);
  // Hue distance wraps around the circle.
  CHECK(color_similarity(red, HsvColor{330.0 / 360.0, 1.0, 1.0}) == Approx(2.0 / 3.0));
  // Low-vibrancy pairs are blended towards hue-agnostic similarity.
  const HsvColor a{0.0, 0.2, 0.5}, b{0.5, 0.2, 0.5};
  CHECK(color_similarity(a, b) == Approx(0.9));
}

TEST_CASE("reference colors") {
  CHECK(reference_colors().size() == 11);
  CHECK(reference_color("red") == Color(1, 0, 0));
  CHECK(reference_color("cyan") == Color(0, 1, 1));
  CHECK_THROWS_AS(reference_color("teal"), std::invalid_argument);
}
