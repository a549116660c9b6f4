#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace anchorlab {

/// How a keyframe's value carries forward to the next keyframe.
enum class Interpolation { kLinear, kHold };

struct Keyframe {
  std::int64_t step = 0;
  double value = 0.0;
  Interpolation interpolation = Interpolation::kLinear;

  bool operator==(const Keyframe&) const = default;
};

/// Named piecewise schedules (learning rate and regularizer weights).
///
/// Each keyframe's interpolation mode governs the segment that starts at it.
/// Before the first keyframe a channel reports the first value, after the
/// last keyframe the last value.
class Timeline {
 public:
  Timeline() = default;

  /// Replaces a channel. Throws std::invalid_argument unless steps strictly
  /// increase, values are finite and non-negative, and the list is non-empty.
  void set_channel(const std::string& name, std::vector<Keyframe> keyframes);

  /// Throws std::out_of_range for an unknown channel.
  double value_at(const std::string& channel, std::int64_t step) const;

  bool has_channel(const std::string& name) const { return channels_.contains(name); }
  const std::vector<Keyframe>& channel(const std::string& name) const;
  const std::map<std::string, std::vector<Keyframe>>& channels() const { return channels_; }

  bool operator==(const Timeline&) const = default;

 private:
  std::map<std::string, std::vector<Keyframe>> channels_;
};

/// Channel names used by the shipped presets.
namespace channels {
inline constexpr const char* kEta = "eta";
inline constexpr const char* kSeparation = "lambda_sep";
inline constexpr const char* kAnchor = "lambda_anchor";
inline constexpr const char* kSubspace = "lambda_subspace";
inline constexpr const char* kAntiAnchor = "lambda_anti_anchor";
inline constexpr const char* kAntiSubspace = "lambda_anti_subspace";
}  // namespace channels

/// Experiment ids with a documented default timeline.
const std::vector<std::string>& timeline_preset_names();

/// Throws std::invalid_argument for an unknown preset.
Timeline preset_timeline(const std::string& name);

/// {"eta": [[step, value, "linear"|"hold"], ...], ...}
nlohmann::json to_json(const Timeline& t);
Timeline timeline_from_json(const nlohmann::json& j);

}  // namespace anchorlab
