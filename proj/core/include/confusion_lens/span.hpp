#pragma once

#include <compare>
#include <cstddef>

namespace confusion_lens {

/// Half-open byte range [start, end) into a UTF-8 source text.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end > start ? end - start : 0; }
  bool empty() const { return end <= start; }
  bool contains(const CharSpan& other) const {
    return start <= other.start && other.end <= end;
  }
  // At least one shared byte.
  bool intersects(const CharSpan& other) const {
    return start < other.end && other.start < end;
  }

  auto operator<=>(const CharSpan&) const = default;
};

}  // namespace confusion_lens
