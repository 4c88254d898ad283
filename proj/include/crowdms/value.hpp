#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace crowdms {

/// Structured values exchanged between clients, authored code and the
/// executor. Objects keep their keys sorted, which the canonical form relies on.
using Value = nlohmann::json;

/// Logical time in seconds. The engine never reads a wall clock.
using Timestamp = std::int64_t;

constexpr Timestamp minutes(double m) { return static_cast<Timestamp>(m * 60.0); }

class CanonicalFormError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic text form: sorted keys, no whitespace, shortest round-trip
/// numbers. Integral numbers print without a fraction, so 1 and 1.0 agree.
/// Throws CanonicalFormError on NaN or infinity.
std::string canonicalize(const Value& value);

/// Parses canonical (or any JSON) text. Throws CanonicalFormError.
Value parse_value(std::string_view text);

bool canonical_equal(const Value& a, const Value& b);

}  // namespace crowdms
