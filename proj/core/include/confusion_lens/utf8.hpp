#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace confusion_lens::utf8 {

inline bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

/// True when `offset` starts a code point (or equals the text length).
inline bool is_boundary(std::string_view text, std::size_t offset) {
  if (offset == 0 || offset == text.size()) return true;
  if (offset > text.size()) return false;
  return !is_continuation(static_cast<unsigned char>(text[offset]));
}

/// Byte length of the code point starting at `offset`; malformed lead bytes
/// count as one byte so iteration always progresses.
inline std::size_t char_length(std::string_view text, std::size_t offset) {
  const auto lead = static_cast<unsigned char>(text[offset]);
  std::size_t len = 1;
  if (lead >= 0xF0) {
    len = 4;
  } else if (lead >= 0xE0) {
    len = 3;
  } else if (lead >= 0xC0) {
    len = 2;
  }
  std::size_t i = 1;
  while (i < len && offset + i < text.size() &&
         is_continuation(static_cast<unsigned char>(text[offset + i]))) {
    ++i;
  }
  return i;
}

bool is_valid(std::string_view text);

/// Appends the UTF-8 encoding of `cp`.
void append_code_point(std::string& out, char32_t cp);

/// Decodes one code point at `offset`, advancing it. Returns U+FFFD on
/// malformed input.
char32_t decode(std::string_view text, std::size_t& offset);

}  // namespace confusion_lens::utf8
