#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "confusion_lens/token.hpp"

namespace confusion_lens {

/// Byte-level n-gram model with add-one smoothing over the 256 byte values.
/// Contexts shorter than order-1 at the start of a text are padded with a
/// boundary symbol outside the byte range.
class NgramModel {
 public:
  static constexpr int kBoundary = 256;
  static constexpr int kAlphabet = 256;

  explicit NgramModel(int order = 3);

  int order() const { return order_; }

  void train(std::string_view text);

  /// Smoothed Pr(byte | context). `context` holds the order-1 preceding
  /// symbols, oldest first; kBoundary marks positions before the text start.
  double probability(std::span<const int> context, int byte) const;

  std::uint64_t context_count(std::span<const int> context) const;
  std::uint64_t ngram_count(std::span<const int> context, int byte) const;

  /// One record per UTF-8 code point; a token's logprob is the sum of its
  /// byte logprobs. Every record, including index 0, carries a logprob.
  std::vector<TokenRecord> score(std::string_view source) const;

 private:
  std::uint64_t key(std::span<const int> context) const;

  int order_;
  std::unordered_map<std::uint64_t, std::uint32_t> context_counts_;
  std::unordered_map<std::uint64_t, std::uint32_t> ngram_counts_;
};

}  // namespace confusion_lens
