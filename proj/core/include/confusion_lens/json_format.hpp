#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace confusion_lens {

using Json = nlohmann::json;

constexpr int kSignificantDigits = 12;

/// Rounds to `digits` significant decimal digits. Non-finite values pass
/// through unchanged.
double round_significant(double value, int digits = kSignificantDigits);

/// JSON number rounded to 12 significant digits, or null when not finite.
Json json_number(double value);

/// Compact single-line dump. Object keys come out sorted because Json is
/// backed by std::map; every float is re-rounded to 12 significant digits.
std::string dump_canonical(const Json& value);

}  // namespace confusion_lens
