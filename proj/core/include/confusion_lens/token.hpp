#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "confusion_lens/span.hpp"

namespace confusion_lens {

/// One model token mapped onto the source.
struct TokenRecord {
  std::size_t index = 0;
  std::string text;  // exactly source.substr(span)
  CharSpan span;
  // ln Pr(token | preceding tokens); absent when the backend gives none,
  // which is the usual case for index 0.
  std::optional<double> logprob;

  bool operator==(const TokenRecord&) const = default;
};

/// Throws DataError unless the records partition `source` in order, their
/// texts match the covered bytes, indices run 0..n-1 and every logprob is
/// finite and <= 0.
void validate_records(std::string_view source, std::span<const TokenRecord> records);

}  // namespace confusion_lens
