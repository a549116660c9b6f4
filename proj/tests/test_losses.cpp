#include <cmath>
#include <random>

#include "anchorlab/losses.hpp"
#include "anchorlab/rng.hpp"
#include "doctest.h"
#include "gradcheck.hpp"

using namespace anchorlab;
using doctest::Approx;

namespace {

std::vector<double> unit(std::vector<double> v) { return l2_normalized(v); }

std::vector<double> random_unit(std::size_t n, std::mt19937_64& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng, -1.0, 1.0);
  return l2_normalized(v);
}

// Independent pair enumeration.
double brute_separation(const std::vector<std::vector<double>>& z, int p) {
  double acc = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (i == j) continue;
      double c = 0.0;
      for (std::size_t k = 0; k < z[i].size(); ++k) c += z[i][k] * z[j][k];
      acc += std::pow(c, p);
      ++pairs;
    }
  }
  return acc / static_cast<double>(pairs);
}

const std::vector<double> e1{1, 0, 0, 0};
const std::vector<double> e2{0, 1, 0, 0};
const std::vector<double> e3{0, 0, 1, 0};

}  // namespace

TEST_CASE("task loss") {
  const std::vector<double> x{0.2, 0.4, 0.6};
  CHECK(task_loss(x, x) == 0.0);
  CHECK(task_loss(std::vector<double>{1, 0, 0}, std::vector<double>{0, 0, 0}) == 1.0);
  CHECK(task_loss(std::vector<double>{1, 0, 0}, std::vector<double>{0.5, 0.5, 0.5}) == 0.75);
  CHECK_THROWS_AS(task_loss(x, std::vector<double>{1, 2}), ShapeError);
}

TEST_CASE("separation") {
  const std::vector<std::vector<double>> same{e1, e1};
  CHECK(separation(same, 100) == 1.0);
  const std::vector<std::vector<double>> ortho{e1, e2};
  CHECK(separation(ortho, 100) == 0.0);
  const std::vector<std::vector<double>> three{e1, e1, e2};
  CHECK(separation(three, 100) == Approx(1.0 / 3.0));
  CHECK_THROWS_AS(separation(std::vector<std::vector<double>>{e1}, 100), std::invalid_argument);
  CHECK_THROWS_AS(separation(three, 3), std::invalid_argument);
}

TEST_CASE("separation equals brute-force pair enumeration for small batches") {
  std::mt19937_64 rng(17);
  for (std::size_t b = 2; b <= 8; ++b) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<std::vector<double>> z;
      for (std::size_t i = 0; i < b; ++i) z.push_back(random_unit(4, rng));
      // Force some near-duplicates so the high power is not all underflow.
      if (b > 2) z[1] = unit({z[0][0] + 0.05, z[0][1], z[0][2], z[0][3]});
      for (int p : {2, 10, 100}) {
        const double expected = brute_separation(z, p);
        CHECK(separation(z, p) == Approx(expected).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("anchor and anti-anchor terms") {
  CHECK(anchor_term(e1, e1) == 0.0);
  CHECK(anchor_term(e2, e1) == 1.0);
  CHECK(anchor_term(std::vector<double>{-1, 0, 0, 0}, e1) == 2.0);
  CHECK(anti_anchor_term(e1, e1) == 1.0);
  CHECK(anti_anchor_term(std::vector<double>{-0.6, 0.8, 0, 0}, e1) == 0.0);
  const std::vector<double> sixty{0.5, std::sqrt(3.0) / 2.0, 0, 0};
  CHECK(anti_anchor_term(sixty, e1) == Approx(0.5));
}

TEST_CASE("subspace and anti-subspace terms") {
  const std::vector<std::size_t> d01{0, 1};
  const std::vector<std::size_t> d0{0};
  CHECK(subspace_term(unit({0.6, 0.8, 0, 0}), d01) == Approx(0.0));
  CHECK(subspace_term(e3, d01) == 1.0);
  CHECK(subspace_term(std::vector<double>{0.5, 0.5, 0.5, 0.5}, d0) == 0.75);
  CHECK(anti_subspace_term(e3, d01) == 0.0);
  CHECK(anti_subspace_term(e1, d0) == 1.0);
  CHECK(anti_subspace_term(std::vector<double>{0.6, 0.8, 0, 0}, d0) == Approx(0.36));
}

TEST_CASE("concept specs") {
  const auto anchor = make_concept("red", ConceptKind::kAnchor, e1, {}, "red", "lambda_anchor");
  CHECK(anchor.application == Application::kLabeledOnly);
  const auto anti = make_concept("x", ConceptKind::kAntiSubspace, {}, {0}, "", "lambda_anti_subspace");
  CHECK(anti.application == Application::kAllSamples);
  CHECK(applies(anti, false));
  CHECK_FALSE(applies(anchor, false));
  CHECK(applies(anchor, true));
  CHECK(concept_term(anchor, e2) == 1.0);
  CHECK_NOTHROW(validate(anchor, 4));
  CHECK_THROWS_AS(validate(anchor, 5), std::invalid_argument);
  auto bad = anchor;
  bad.direction = {2, 0, 0, 0};
  CHECK_THROWS_AS(validate(bad, 4), std::invalid_argument);
  auto out_of_range = anti;
  out_of_range.dims = {4};
  CHECK_THROWS_AS(validate(out_of_range, 4), std::invalid_argument);
  auto no_label = anchor;
  no_label.label = "";
  CHECK_THROWS_AS(validate(no_label, 4), std::invalid_argument);

  CHECK(concept_from_json(to_json(anchor)) == anchor);
  CHECK(concept_from_json(to_json(anti)) == anti);
  auto j = to_json(anchor);
  j["colour"] = 1;
  CHECK_THROWS(concept_from_json(j));
}

TEST_CASE("concept gradients match finite differences") {
  std::mt19937_64 rng(23);
  const std::vector<ConceptSpec> specs{
      make_concept("a", ConceptKind::kAnchor, e1, {}, "red", "w"),
      make_concept("s", ConceptKind::kSubspace, {}, {0, 1}, "red", "w"),
      make_concept("aa", ConceptKind::kAntiAnchor, unit({1, -1, 0, 0}), {}, "", "w"),
      make_concept("as", ConceptKind::kAntiSubspace, {}, {2}, "", "w"),
  };
  for (const auto& spec : specs) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto z = random_unit(4, rng);
      const auto g = concept_term_gradient(spec, z);
      for (std::size_t k = 0; k < 4; ++k) {
        auto up = z, down = z;
        up[k] += 1e-6;
        down[k] -= 1e-6;
        const double numeric = (concept_term(spec, up) - concept_term(spec, down)) / 2e-6;
        CHECK(g[k] == Approx(numeric).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("taped loss terms match finite differences") {
  std::mt19937_64 rng(29);
  const std::size_t batch = 6;
  std::vector<Parameter> raw;
  raw.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    Tensor t = Tensor::vector(4);
    for (double& v : t.values) v = uniform(rng, -1.0, 1.0);
    raw.emplace_back("z" + std::to_string(i), t);
  }
  // Two near-parallel latents give the high-power term a real gradient.
  raw[1].value.values = raw[0].value.values;
  raw[1].value[2] += 0.05;
  std::vector<Parameter*> params;
  for (auto& p : raw) params.push_back(&p);

  auto latents = [&](Tape& t) {
    std::vector<Var> z;
    for (auto& p : raw) z.push_back(t.l2_normalize(t.parameter(p)));
    return z;
  };

  SUBCASE("separation") {
    for (int p : {2, 100}) {
      const auto r = testing::check_gradients(params, [&](Tape& t) {
        const auto z = latents(t);
        return taped_separation(t, z, p);
      });
      CHECK(r.max_relative < 1e-4);
    }
  }

  const std::vector<ConceptSpec> specs{
      make_concept("a", ConceptKind::kAnchor, e1, {}, "red", "w"),
      make_concept("s", ConceptKind::kSubspace, {}, {0, 1}, "red", "w"),
      make_concept("aa", ConceptKind::kAntiAnchor, unit({1, -1, 0, 0}), {}, "", "w"),
      make_concept("as", ConceptKind::kAntiSubspace, {}, {2}, "", "w"),
  };
  const std::vector<bool> gates{true, false, true, true, false, true};
  for (const auto& spec : specs) {
    SUBCASE(spec.name.c_str()) {
      const auto r = testing::check_gradients(params, [&](Tape& t) {
        const auto z = latents(t);
        return taped_concept_mean(t, spec, z, gates);
      });
      CHECK(r.max_relative < 1e-4);
    }
  }

  SUBCASE("total") {
    std::vector<Parameter> out;
    out.reserve(batch);
    std::vector<std::vector<double>> inputs;
    for (std::size_t i = 0; i < batch; ++i) {
      Tensor t = Tensor::vector(3);
      for (double& v : t.values) v = uniform(rng, 0.0, 1.0);
      out.emplace_back("y" + std::to_string(i), t);
      inputs.push_back({uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)});
    }
    std::vector<Parameter*> all = params;
    for (auto& p : out) all.push_back(&p);
    LabelMatrix labels(batch, std::vector<bool>(specs.size(), false));
    for (std::size_t i = 0; i < batch; ++i) {
      for (std::size_t k = 0; k < specs.size(); ++k) labels[i][k] = (i + k) % 2 == 0;
    }
    const LossWeights w{0.7, {1.5, 2.0, 0.5, 3.0}};
    const auto r = testing::check_gradients(all, [&](Tape& t) {
      const auto z = latents(t);
      std::vector<Var> xs, ys;
      for (std::size_t i = 0; i < batch; ++i) {
        xs.push_back(t.constant(inputs[i]));
        ys.push_back(t.parameter(out[i]));
      }
      return taped_total_loss(t, xs, ys, z, labels, specs, w, 100).total;
    });
    CHECK(r.max_relative < 1e-4);
  }
}

TEST_CASE("total loss composition") {
  const std::vector<std::vector<double>> x{{1, 0, 0}, {0, 1, 0}, {0.5, 0.5, 0.5}};
  const std::vector<std::vector<double>> y{{0.9, 0.1, 0}, {0, 1, 0}, {0.4, 0.5, 0.7}};
  const std::vector<std::vector<double>> z{e1, unit({1, 1, 0, 0}), e3};
  const std::vector<ConceptSpec> specs{
      make_concept("red", ConceptKind::kAnchor, e1, {}, "red", "w"),
      make_concept("not", ConceptKind::kAntiSubspace, {}, {2}, "", "w"),
  };
  const double mean_task = (task_loss(x[0], y[0]) + task_loss(x[1], y[1]) + task_loss(x[2], y[2])) / 3;

  SUBCASE("all weights zero") {
    const LabelMatrix labels(3, std::vector<bool>{true, true});
    const auto l = total_loss(x, y, z, labels, specs, {0.0, {0.0, 0.0}}, 100);
    CHECK(l.total == Approx(mean_task).epsilon(1e-14));
    CHECK(l.task == Approx(mean_task).epsilon(1e-14));
  }
  SUBCASE("no labels switch off attractive terms only") {
    const LabelMatrix labels(3, std::vector<bool>{false, false});
    const auto l = total_loss(x, y, z, labels, specs, {0.0, {1.0, 1.0}}, 100);
    CHECK(l.concepts[0] == 0.0);
    CHECK(l.concepts[1] == Approx(1.0 / 3.0));
  }
  SUBCASE("a labeled sample on the anchor contributes nothing") {
    LabelMatrix labels(3, std::vector<bool>{false, false});
    labels[0][0] = true;
    const auto l = total_loss(x, y, z, labels, specs, {0.0, {1.0, 0.0}}, 100);
    CHECK(l.weighted_concepts[0] == 0.0);
  }
  SUBCASE("total is the weighted sum of the parts") {
    LabelMatrix labels(3, std::vector<bool>{true, false});
    labels[1][0] = true;
    const LossWeights w{0.3, {2.0, 5.0}};
    const auto l = total_loss(x, y, z, labels, specs, w, 2);
    const double expected = l.task + w.separation * l.separation + 2.0 * l.concepts[0] + 5.0 * l.concepts[1];
    CHECK(std::abs(l.total - expected) < 1e-10);
    CHECK(l.weighted_separation == Approx(0.3 * l.separation));
    // Attractive terms average over the batch, not over the labeled count.
    const double anchor_sum = anchor_term(z[0], e1) + anchor_term(z[1], e1) + anchor_term(z[2], e1);
    CHECK(l.concepts[0] == Approx(anchor_sum / 3.0));
  }
  SUBCASE("taped breakdown equals the eager one") {
    LabelMatrix labels(3, std::vector<bool>{true, false});
    const LossWeights w{0.3, {2.0, 5.0}};
    const auto eager = total_loss(x, y, z, labels, specs, w, 100);
    Tape t;
    std::vector<Var> xs, ys, zs;
    for (int i = 0; i < 3; ++i) {
      xs.push_back(t.constant(x[i]));
      ys.push_back(t.constant(y[i]));
      zs.push_back(t.constant(z[i]));
    }
    const auto taped = taped_total_loss(t, xs, ys, zs, labels, specs, w, 100);
    CHECK(t.scalar(taped.total) == Approx(eager.total).epsilon(1e-14));
    CHECK(taped.breakdown.separation == Approx(eager.separation).epsilon(1e-14));
    CHECK(taped.breakdown.concepts[1] == Approx(eager.concepts[1]).epsilon(1e-14));
  }
}
