#include "confusion_lens/json_format.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace confusion_lens {

double round_significant(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*g", digits, value);
  return std::strtod(buffer, nullptr);
}

Json json_number(double value) {
  if (!std::isfinite(value)) return nullptr;
  const double rounded = round_significant(value);
  // Integral values print without a trailing ".0" so "9" and "2661" stay
  // readable in reports.
  if (std::abs(rounded) < 9.0e15 && rounded == std::trunc(rounded)) {
    return static_cast<std::int64_t>(rounded);
  }
  return rounded;
}

namespace {

Json canonicalize(const Json& value) {
  switch (value.type()) {
    case Json::value_t::object: {
      Json out = Json::object();
      for (const auto& [key, item] : value.items()) out[key] = canonicalize(item);
      return out;
    }
    case Json::value_t::array: {
      Json out = Json::array();
      for (const auto& item : value) out.push_back(canonicalize(item));
      return out;
    }
    case Json::value_t::number_float:
      return json_number(value.get<double>());
    default:
      return value;
  }
}

}  // namespace

std::string dump_canonical(const Json& value) {
  return canonicalize(value).dump(-1, ' ', false,
                                  Json::error_handler_t::replace);
}

}  // namespace confusion_lens
