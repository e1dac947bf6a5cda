#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cyclegap/serialization.hpp"
#include "cyclegap/theory.hpp"

namespace cyclegap {

/// One line of a check log: {check, params, value, bound, pass, seed} with
/// pass = true | false | "n/a".
struct CheckReport {
  std::string check;
  json params = json::object();
  double value = 0.0;
  std::optional<double> bound;
  CheckOutcome outcome = CheckOutcome::NotApplicable;
  std::uint64_t seed = 0;

  json to_json() const {
    json j{{"check", check}, {"params", params}};
    j["value"] = std::isfinite(value) ? json(value) : json(format_roundtrip(value));
    j["bound"] = bound ? json(*bound) : json(nullptr);
    if (outcome == CheckOutcome::NotApplicable) {
      j["pass"] = "n/a";
    } else {
      j["pass"] = outcome == CheckOutcome::Pass;
    }
    j["seed"] = seed;
    return j;
  }

  std::string line() const { return to_json().dump(); }
};

}  // namespace cyclegap
