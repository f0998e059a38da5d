#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "confusion_lens/span.hpp"
#include "confusion_lens/token.hpp"

namespace confusion_lens {

/// Which tokens take part in aggregates.
struct PerplexityOptions {
  // Index 0 has no conditioning context; include it only when the backend
  // supplied an unconditional probability.
  bool include_first = false;
  bool exclude_whitespace = false;
};

/// Included tokens have a logprob, pass the index-0 rule and, when
/// requested, are not whitespace-only.
bool is_included(const TokenRecord& record, const PerplexityOptions& options);

/// exp(-logprob) for each included token, in order. Throws DataError for a
/// positive logprob or when no token is included.
std::vector<double> token_perplexities(std::span<const TokenRecord> records,
                                       const PerplexityOptions& options = {});

/// Indices of tokens sharing at least one byte with `span`.
std::vector<std::size_t> intersecting_tokens(std::span<const TokenRecord> records,
                                             CharSpan span);

/// exp(mean surprisal) over included tokens intersecting `span` (all tokens
/// when absent), i.e. the inverse geometric mean of token probabilities.
/// Throws DataError when no included token qualifies.
double avg_perplexity(std::span<const TokenRecord> records,
                      std::optional<CharSpan> span = std::nullopt,
                      const PerplexityOptions& options = {});

/// Largest single-token perplexity among the same token set.
double max_perplexity(std::span<const TokenRecord> records,
                      std::optional<CharSpan> span = std::nullopt,
                      const PerplexityOptions& options = {});

/// avg/max over the token index range [first, last].
double avg_perplexity_range(std::span<const TokenRecord> records, std::size_t first,
                            std::size_t last, const PerplexityOptions& options = {});
double max_perplexity_range(std::span<const TokenRecord> records, std::size_t first,
                            std::size_t last, const PerplexityOptions& options = {});

struct PerplexityProfile {
  std::string snippet_id;
  std::vector<TokenRecord> tokens;
  // exp(-logprob) per token; absent where the token has no logprob.
  std::vector<std::optional<double>> perplexities;
  double snippet_avg = 1.0;
  double snippet_max = 1.0;
  PerplexityOptions options;
};

/// Throws DataError when the records carry no usable logprob.
PerplexityProfile build_profile(std::string snippet_id, std::vector<TokenRecord> records,
                                const PerplexityOptions& options = {});

/// Profile JSONL line: {"snippet_id","snippet_avg","snippet_max",
/// "tokens":[{"index","start","end","ppl"}]}, floats at 12 significant digits.
std::string serialize_profile(const PerplexityProfile& profile);

/// Rebuilds a profile from its JSONL form; token texts come from `source`
/// and logprobs from ln(ppl). Throws DataError.
PerplexityProfile parse_profile(std::string_view line, std::string_view source,
                                const PerplexityOptions& options = {});
/// Reads just the snippet id of a profile line.
std::string profile_snippet_id(std::string_view line);

}  // namespace confusion_lens
