#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "confusion_lens/span.hpp"

namespace confusion_lens {

enum class Variant { clean, confusing };

std::string_view to_string(Variant variant);
/// Throws DataError for anything other than "clean" / "confusing".
Variant parse_variant(std::string_view text);

struct Snippet {
  std::string id;
  std::string pair_id;
  Variant variant = Variant::clean;
  std::string language = "java";
  std::string source;
  std::optional<std::string> atom_category;
  // Sorted by start, non-overlapping, within [0, source.size()).
  std::vector<CharSpan> aois;
};

/// Throws DataError when `index` is out of range.
CharSpan aoi_of(const Snippet& snippet, std::size_t index);

struct SnippetPair {
  std::size_t clean = 0;      // index into Corpus::snippets()
  std::size_t confusing = 0;  // index into Corpus::snippets()
};

/// A validated, immutable set of snippets with its clean/confusing pairing
/// index. Safe to share across threads after construction.
class Corpus {
 public:
  Corpus() = default;
  /// Validates ids, pairing and AOIs; normalizes AOI order. Throws DataError.
  explicit Corpus(std::vector<Snippet> snippets);

  const std::vector<Snippet>& snippets() const { return snippets_; }
  const std::map<std::string, SnippetPair>& pairs() const { return pairs_; }
  std::size_t size() const { return snippets_.size(); }
  bool empty() const { return snippets_.empty(); }

  const Snippet* find(std::string_view id) const;
  /// Throws DataError for unknown ids.
  const Snippet& at(std::string_view id) const;

  const Snippet& clean_of(const SnippetPair& pair) const {
    return snippets_[pair.clean];
  }
  const Snippet& confusing_of(const SnippetPair& pair) const {
    return snippets_[pair.confusing];
  }

 private:
  std::vector<Snippet> snippets_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::map<std::string, SnippetPair> pairs_;
};

/// Parses one JSONL line. `line_number` is only used in error messages.
Snippet parse_snippet(std::string_view line, std::size_t line_number = 0);
std::string serialize_snippet(const Snippet& snippet);

/// Reads a JSONL corpus; blank lines are skipped. Errors carry
/// "<origin>:<line>:" prefixes.
Corpus read_corpus(std::istream& in, std::string_view origin = "<stream>");
Corpus load_corpus(const std::filesystem::path& path);

/// One line per snippet, in corpus order, AOIs normalized.
std::string serialize_corpus(const Corpus& corpus);

}  // namespace confusion_lens
