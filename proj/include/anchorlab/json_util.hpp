#pragma once

#include <algorithm>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace anchorlab {

/// Fail-closed parsing: any key outside `allowed` is an error.
inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace anchorlab
