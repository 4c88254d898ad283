#include "crowdms/value.hpp"

#include <charconv>
#include <cmath>

namespace crowdms {
namespace {

void append_number(std::string& out, double d) {
  if (!std::isfinite(d)) throw CanonicalFormError("non-finite number has no canonical form");
  if (d == 0.0) {
    out += '0';
    return;
  }
  constexpr double kExactIntegerLimit = 9007199254740992.0;  // 2^53
  if (std::trunc(d) == d && std::fabs(d) < kExactIntegerLimit) {
    out += std::to_string(static_cast<std::int64_t>(d));
    return;
  }
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), d);
  if (ec != std::errc{}) throw CanonicalFormError("number formatting failed");
  out.append(buf, end);
}

void append_string(std::string& out, const std::string& s) {
  out += Value(s).dump(-1, ' ', false, Value::error_handler_t::strict);
}

void append(std::string& out, const Value& v) {
  switch (v.type()) {
    case Value::value_t::null:
    case Value::value_t::discarded:
      out += "null";
      break;
    case Value::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      break;
    case Value::value_t::number_integer:
      out += std::to_string(v.get<std::int64_t>());
      break;
    case Value::value_t::number_unsigned:
      out += std::to_string(v.get<std::uint64_t>());
      break;
    case Value::value_t::number_float:
      append_number(out, v.get<double>());
      break;
    case Value::value_t::string:
      append_string(out, v.get_ref<const std::string&>());
      break;
    case Value::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += ',';
        first = false;
        append(out, e);
      }
      out += ']';
      break;
    }
    case Value::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        append_string(out, it.key());
        out += ':';
        append(out, it.value());
      }
      out += '}';
      break;
    }
    case Value::value_t::binary:
      throw CanonicalFormError("binary values have no canonical form");
  }
}

}  // namespace

std::string canonicalize(const Value& value) {
  std::string out;
  try {
    append(out, value);
  } catch (const nlohmann::json::exception& e) {
    throw CanonicalFormError(e.what());
  }
  return out;
}

Value parse_value(std::string_view text) {
  try {
    return Value::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CanonicalFormError(e.what());
  }
}

bool canonical_equal(const Value& a, const Value& b) { return canonicalize(a) == canonicalize(b); }

}  // namespace crowdms
