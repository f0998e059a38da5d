#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "confusion_lens/span.hpp"

namespace confusion_lens {

/// Maps tokenizer pieces onto `source`, left to right.
///
/// Each piece is tried verbatim first, then with whitespace markers
/// normalized: SentencePiece "▁" and "<0xNN>" byte pieces, GPT-2 byte-level
/// symbols ("Ġ", "Ċ", ...), and OpenAI "bytes:\xNN" escapes. A leading
/// space on the very first piece is dropped when the source has none
/// (SentencePiece dummy prefix).
///
/// The returned spans partition [0, source.size()). Throws AlignmentError
/// with the first offset that cannot be matched.
std::vector<CharSpan> align_tokens(std::string_view source,
                                   std::span<const std::string> pieces);

/// Candidate decodings of a piece, most literal first. Exposed for tests.
std::vector<std::string> piece_decodings(std::string_view piece);

}  // namespace confusion_lens
