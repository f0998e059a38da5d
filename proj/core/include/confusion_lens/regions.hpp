#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "confusion_lens/category.hpp"
#include "confusion_lens/corpus.hpp"
#include "confusion_lens/peaks.hpp"
#include "confusion_lens/perplexity.hpp"

namespace confusion_lens {

enum class LexClass {
  identifier_part,
  number,
  op,
  bracket,
  punctuation,
  whitespace,
  keyword,
  other,
};

std::string_view to_string(LexClass lex_class);

/// Lexical class of a token text, ignoring surrounding whitespace. Keywords
/// are those of `language` (Java is built in; other languages only get the
/// generic character rules).
LexClass classify(std::string_view token_text, std::string_view language = "java");

/// A span of locally high perplexity grown from one or more peaks.
struct Region {
  std::string snippet_id;
  CharSpan span;              // union of member token spans
  std::size_t first_token = 0;
  std::size_t last_token = 0;  // inclusive; members are contiguous
  std::size_t peak_index = 0;  // token index of the seeding peak
  double peak_value = 0.0;     // on the detection scale
  double max_ppl = 1.0;
  double avg_ppl = 1.0;
  std::optional<SyntaxCategory> category;
  std::optional<std::string> label;  // AST node kind
  bool overlaps_aoi = false;

  std::vector<std::size_t> token_indices() const;
  bool contains_token(std::size_t index) const {
    return first_token <= index && index <= last_token;
  }
};

/// Grows a region around the peak token so that it covers whole lexemes:
/// split identifiers and numbers are rejoined, an operator takes its
/// single-lexeme operand(s) (one side for unary/update operators, both for
/// a binary operator between two single-lexeme operands), and a number takes
/// a sign whose left neighbour is an operator or bracket. Rules repeat to a
/// fixpoint and never cross ";" or brackets. Metrics use `options`.
Region expand(std::size_t peak_token, double peak_value, std::span<const TokenRecord> records,
              std::string_view snippet_id = {}, const PerplexityOptions& options = {},
              std::string_view language = "java");

/// Merges regions that overlap, touch, or are separated by at most
/// `gap_tokens` non-whitespace tokens, to a fixpoint. The merged peak is the
/// member peak with the highest detection value (earliest on ties) and
/// metrics are recomputed over the union. Input order does not matter;
/// output is sorted by start.
std::vector<Region> merge(std::vector<Region> regions, std::span<const TokenRecord> records,
                          std::size_t gap_tokens = 1, const PerplexityOptions& options = {});

/// True when the region shares a token with the token set of any AOI.
bool overlaps_aoi(const Region& region, const Snippet& snippet,
                  std::span<const TokenRecord> records);
/// Same criterion on character spans alone (regions are unions of whole
/// tokens, so the two agree).
bool overlaps_aoi(CharSpan region_span, const Snippet& snippet);

struct VariantOverlap {
  std::size_t regions = 0;   // detected regions
  std::size_t overlap = 0;   // regions sharing a token with an AOI
  std::size_t novel = 0;     // regions touching no AOI
  std::size_t aois = 0;      // annotated AOIs
  std::size_t hit = 0;       // AOIs touched by at least one region
  std::size_t missed = 0;    // AOIs no region touches
  double detection_rate() const {
    return aois == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(aois);
  }
};

struct OverlapSummary {
  VariantOverlap clean;
  VariantOverlap confusing;
};

/// Regions are matched to snippets by id; regions for unknown snippets
/// throw DataError.
OverlapSummary overlap_counts(std::span<const Region> regions, const Corpus& corpus);

/// Region JSONL line: {"snippet_id","start","end","peak_token","max_ppl",
/// "avg_ppl","category","label","overlaps_aoi"}.
std::string serialize_region(const Region& region);
/// Reads a region line; token range fields are not part of the format and
/// stay zero. Throws DataError.
Region parse_region(std::string_view line);

}  // namespace confusion_lens
