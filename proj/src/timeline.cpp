#include "anchorlab/timeline.hpp"

#include <cmath>
#include <stdexcept>

namespace anchorlab {

void Timeline::set_channel(const std::string& name, std::vector<Keyframe> keyframes) {
  if (keyframes.empty()) {
    throw std::invalid_argument("channel '" + name + "' has no keyframes");
  }
  for (std::size_t i = 0; i < keyframes.size(); ++i) {
    const double v = keyframes[i].value;
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("channel '" + name + "': keyframe values must be finite and >= 0");
    }
    if (i > 0 && keyframes[i].step <= keyframes[i - 1].step) {
      throw std::invalid_argument("channel '" + name + "': keyframe steps must strictly increase");
    }
  }
  channels_[name] = std::move(keyframes);
}

const std::vector<Keyframe>& Timeline::channel(const std::string& name) const {
  auto it = channels_.find(name);
  if (it == channels_.end()) throw std::out_of_range("unknown timeline channel '" + name + "'");
  return it->second;
}

double Timeline::value_at(const std::string& name, std::int64_t step) const {
  const auto& keys = channel(name);
  if (step <= keys.front().step) return keys.front().value;
  if (step >= keys.back().step) return keys.back().value;
  std::size_t i = 0;
  while (keys[i + 1].step <= step) ++i;
  const Keyframe& a = keys[i];
  const Keyframe& b = keys[i + 1];
  if (a.interpolation == Interpolation::kHold) return a.value;
  const double t = static_cast<double>(step - a.step) / static_cast<double>(b.step - a.step);
  return a.value + t * (b.value - a.value);
}

namespace {

Keyframe lin(std::int64_t step, double value) { return {step, value, Interpolation::kLinear}; }
Keyframe hold(std::int64_t step, double value) { return {step, value, Interpolation::kHold}; }

// Warmup, ramp, plateau, decay. Shared by every experiment.
std::vector<Keyframe> learning_rate() {
  return {lin(0, 1e-8), lin(10, 0.01), hold(750, 0.1), lin(1100, 0.1), lin(1500, 0.05)};
}

}  // namespace

const std::vector<std::string>& timeline_preset_names() {
  static const std::vector<std::string> names{"suppression_4d", "ablation_5d",
                                              "single_anchor_4d", "hue_subspace_4d"};
  return names;
}

Timeline preset_timeline(const std::string& name) {
  using namespace channels;
  Timeline t;
  t.set_channel(kEta, learning_rate());
  // Separation holds steady, then fades to zero over the second half.
  const std::vector<Keyframe> separation_strong{hold(0, 5.0), lin(750, 5.0), lin(1500, 0.0)};
  const std::vector<Keyframe> subspace{lin(0, 2.0), lin(500, 4.0), lin(1000, 4.0), lin(1500, 2.0)};
  const std::vector<Keyframe> anchor{lin(0, 1.0), lin(500, 16.0), lin(1000, 16.0), lin(1500, 4.0)};
  if (name == "suppression_4d") {
    // Subspace held high throughout; anchor peaks mid-training.
    t.set_channel(kSeparation, separation_strong);
    t.set_channel(kSubspace, subspace);
    t.set_channel(kAnchor, anchor);
  } else if (name == "ablation_5d") {
    // Clear the target dimension first, then let the anchor pull red into it.
    t.set_channel(kSeparation, {hold(0, 1.0), lin(750, 1.0), lin(1500, 0.0)});
    t.set_channel(kAntiSubspace, {hold(0, 1.0), lin(400, 1.0), lin(750, 0.0)});
    t.set_channel(kAntiAnchor, {lin(0, 0.5), lin(1500, 0.5)});
    t.set_channel(kAnchor, {lin(0, 0.0), lin(400, 16.0), lin(1200, 16.0), lin(1500, 8.0)});
  } else if (name == "single_anchor_4d") {
    t.set_channel(kSeparation, separation_strong);
    t.set_channel(kAnchor, anchor);
  } else if (name == "hue_subspace_4d") {
    t.set_channel(kSeparation, separation_strong);
    t.set_channel(kSubspace, subspace);
  } else {
    throw std::invalid_argument("unknown timeline preset '" + name + "'");
  }
  return t;
}

nlohmann::json to_json(const Timeline& t) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, keys] : t.channels()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Keyframe& k : keys) {
      arr.push_back({k.step, k.value, k.interpolation == Interpolation::kHold ? "hold" : "linear"});
    }
    j[name] = std::move(arr);
  }
  return j;
}

Timeline timeline_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("timeline must be an object of channels");
  Timeline t;
  for (const auto& [name, arr] : j.items()) {
    if (!arr.is_array()) throw std::invalid_argument("channel '" + name + "' must be an array");
    std::vector<Keyframe> keys;
    for (const auto& k : arr) {
      if (!k.is_array() || k.size() < 2 || k.size() > 3 || !k[0].is_number_integer() ||
          !k[1].is_number()) {
        throw std::invalid_argument("channel '" + name +
                                    "': keyframes are [step, value] or [step, value, mode]");
      }
      Keyframe kf{k[0].get<std::int64_t>(), k[1].get<double>(), Interpolation::kLinear};
      if (k.size() == 3) {
        const std::string mode = k[2].get<std::string>();
        if (mode == "hold") {
          kf.interpolation = Interpolation::kHold;
        } else if (mode != "linear") {
          throw std::invalid_argument("channel '" + name + "': unknown interpolation '" + mode + "'");
        }
      }
      keys.push_back(kf);
    }
    t.set_channel(name, std::move(keys));
  }
  return t;
}

}  // namespace anchorlab
