#include "confusion_lens/alignment.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <optional>

#include "confusion_lens/error.hpp"
#include "confusion_lens/utf8.hpp"

namespace confusion_lens {

namespace {

constexpr std::string_view kSentencePieceSpace = "\xE2\x96\x81";  // U+2581

// Inverse of the GPT-2 bytes_to_unicode table: printable Latin-1 bytes map
// to themselves, the remaining 68 bytes to U+0100 onwards.
const std::array<int, 512>& byte_level_inverse() {
  static const std::array<int, 512> table = [] {
    std::array<int, 512> inv{};
    inv.fill(-1);
    int next = 256;
    for (int b = 0; b < 256; ++b) {
      const bool printable = (b >= 33 && b <= 126) || (b >= 161 && b <= 172) ||
                             (b >= 174 && b <= 255);
      if (printable) {
        inv[b] = b;
      } else {
        inv[next++] = b;
      }
    }
    return inv;
  }();
  return table;
}

std::optional<std::string> decode_byte_level(std::string_view piece) {
  std::string out;
  std::size_t i = 0;
  bool changed = false;
  while (i < piece.size()) {
    const char32_t cp = utf8::decode(piece, i);
    if (cp >= 512 || byte_level_inverse()[cp] < 0) return std::nullopt;
    const int byte = byte_level_inverse()[cp];
    changed |= static_cast<char32_t>(byte) != cp || cp >= 128;
    out.push_back(static_cast<char>(byte));
  }
  if (!changed) return std::nullopt;
  return out;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// "<0x0A>" style SentencePiece byte fallback pieces.
std::optional<std::string> decode_byte_piece(std::string_view piece) {
  if (piece.size() != 6 || piece.substr(0, 3) != "<0x" || piece[5] != '>') return std::nullopt;
  const int hi = hex_value(piece[3]);
  const int lo = hex_value(piece[4]);
  if (hi < 0 || lo < 0) return std::nullopt;
  return std::string(1, static_cast<char>(hi * 16 + lo));
}

// OpenAI renders undecodable byte sequences as "bytes:\xe2\x80".
std::optional<std::string> decode_bytes_escape(std::string_view piece) {
  constexpr std::string_view prefix = "bytes:";
  if (!piece.starts_with(prefix)) return std::nullopt;
  std::string out;
  std::size_t i = prefix.size();
  while (i < piece.size()) {
    if (i + 3 < piece.size() && piece[i] == '\\' && piece[i + 1] == 'x') {
      const int hi = hex_value(piece[i + 2]);
      const int lo = hex_value(piece[i + 3]);
      if (hi < 0 || lo < 0) return std::nullopt;
      out.push_back(static_cast<char>(hi * 16 + lo));
      i += 4;
    } else {
      out.push_back(piece[i++]);
    }
  }
  return out;
}

std::string replace_all(std::string_view text, std::string_view from, std::string_view to) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = text.find(from, pos);
    if (hit == std::string_view::npos) break;
    out.append(text.substr(pos, hit - pos));
    out.append(to);
    pos = hit + from.size();
  }
  out.append(text.substr(pos));
  return out;
}

std::string printable(std::string_view piece) {
  std::string out;
  for (const char c : piece) {
    if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else if (static_cast<unsigned char>(c) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\x%02x", static_cast<unsigned char>(c));
      out += buf;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> piece_decodings(std::string_view piece) {
  std::vector<std::string> out;
  auto add = [&out](std::string candidate) {
    if (std::find(out.begin(), out.end(), candidate) == out.end()) {
      out.push_back(std::move(candidate));
    }
  };
  add(std::string(piece));
  if (auto bytes = decode_byte_piece(piece)) add(*bytes);
  if (piece.find(kSentencePieceSpace) != std::string_view::npos) {
    add(replace_all(piece, kSentencePieceSpace, " "));
  }
  if (auto decoded = decode_byte_level(piece)) add(*decoded);
  if (auto decoded = decode_bytes_escape(piece)) add(*decoded);
  return out;
}

std::vector<CharSpan> align_tokens(std::string_view source,
                                   std::span<const std::string> pieces) {
  std::vector<CharSpan> spans;
  spans.reserve(pieces.size());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const std::string_view rest = source.substr(offset);
    std::size_t matched = 0;
    for (const std::string& candidate : piece_decodings(pieces[i])) {
      if (candidate.empty()) continue;
      if (rest.starts_with(candidate)) {
        matched = candidate.size();
        break;
      }
      if (offset == 0 && candidate.size() > 1 && candidate.front() == ' ' &&
          rest.starts_with(std::string_view(candidate).substr(1))) {
        matched = candidate.size() - 1;
        break;
      }
    }
    if (matched == 0) {
      const std::string_view expected = rest.substr(0, 16);
      throw AlignmentError(offset, "piece #" + std::to_string(i) + " \"" +
                                       printable(pieces[i]) + "\" does not match \"" +
                                       printable(expected) + "\"");
    }
    spans.push_back({offset, offset + matched});
    offset += matched;
  }
  if (offset != source.size()) {
    throw AlignmentError(offset, "token pieces end before the source does");
  }
  return spans;
}

}  // namespace confusion_lens
