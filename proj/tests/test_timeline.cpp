#include "anchorlab/timeline.hpp"
#include "doctest.h"

using namespace anchorlab;
using doctest::Approx;

TEST_CASE("keyframe interpolation") {
  Timeline t;
  t.set_channel("a", {{0, 0.1}});
  CHECK(t.value_at("a", 0) == 0.1);
  CHECK(t.value_at("a", 12345) == 0.1);

  t.set_channel("b", {{0, 0.0}, {10, 1.0}});
  CHECK(t.value_at("b", 5) == Approx(0.5));
  CHECK(t.value_at("b", 10) == 1.0);
  CHECK(t.value_at("b", 99) == 1.0);

  t.set_channel("c", {{0, 2.0, Interpolation::kHold}, {10, 4.0}, {20, 0.0}});
  CHECK(t.value_at("c", 9) == 2.0);
  CHECK(t.value_at("c", 10) == 4.0);
  CHECK(t.value_at("c", 15) == Approx(2.0));

  // Before the first keyframe the first value applies.
  t.set_channel("d", {{5, 3.0}, {10, 1.0}});
  CHECK(t.value_at("d", 0) == 3.0);

  CHECK_THROWS_AS(t.value_at("missing", 0), std::out_of_range);
  CHECK_THROWS_AS(t.set_channel("e", {}), std::invalid_argument);
  CHECK_THROWS_AS(t.set_channel("e", {{5, 1.0}, {5, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(t.set_channel("e", {{0, -1.0}}), std::invalid_argument);
}

TEST_CASE("timeline json round trip") {
  const Timeline t = preset_timeline("ablation_5d");
  CHECK(timeline_from_json(to_json(t)) == t);
  CHECK_THROWS(timeline_from_json(nlohmann::json::parse(R"({"eta": [[0, 1.0, "cubic"]]})")));
  CHECK_THROWS(timeline_from_json(nlohmann::json::parse(R"({"eta": [[0]]})")));
}

TEST_CASE("learning-rate schedule of the presets") {
  for (const auto& name : timeline_preset_names()) {
    const Timeline t = preset_timeline(name);
    CHECK(t.value_at(channels::kEta, 0) == Approx(1e-8));
    CHECK(t.value_at(channels::kEta, 10) == Approx(0.01));
    CHECK(t.value_at(channels::kEta, 1500) == Approx(0.05));
    for (const auto& [channel, keys] : t.channels()) {
      const double v = t.value_at(channel, 0);
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
    }
  }
  CHECK_THROWS_AS(preset_timeline("nope"), std::invalid_argument);
}

TEST_CASE("ablation preset releases the reserved dimension by step 750") {
  const Timeline t = preset_timeline("ablation_5d");
  CHECK(t.value_at(channels::kAntiSubspace, 0) > 0.0);
  for (std::int64_t s : {750, 900, 1499}) CHECK(t.value_at(channels::kAntiSubspace, s) < 1e-9);
}
