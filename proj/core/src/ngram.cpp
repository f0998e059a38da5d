#include "confusion_lens/ngram.hpp"

#include <cmath>
#include <stdexcept>

#include "confusion_lens/utf8.hpp"

namespace confusion_lens {

NgramModel::NgramModel(int order) : order_(order) {
  if (order < 1 || order > 7) throw std::invalid_argument("n-gram order must be in [1, 7]");
}

std::uint64_t NgramModel::key(std::span<const int> context) const {
  std::uint64_t k = 0;
  for (const int symbol : context) k = (k << 9) | static_cast<std::uint64_t>(symbol);
  return k;
}

void NgramModel::train(std::string_view text) {
  std::vector<int> history(static_cast<std::size_t>(order_ - 1), kBoundary);
  for (const char c : text) {
    const int byte = static_cast<unsigned char>(c);
    const std::uint64_t ctx = key(history);
    ++context_counts_[ctx];
    ++ngram_counts_[(ctx << 9) | static_cast<std::uint64_t>(byte)];
    if (!history.empty()) {
      history.erase(history.begin());
      history.push_back(byte);
    }
  }
}

std::uint64_t NgramModel::context_count(std::span<const int> context) const {
  const auto it = context_counts_.find(key(context));
  return it == context_counts_.end() ? 0 : it->second;
}

std::uint64_t NgramModel::ngram_count(std::span<const int> context, int byte) const {
  const auto it = ngram_counts_.find((key(context) << 9) | static_cast<std::uint64_t>(byte));
  return it == ngram_counts_.end() ? 0 : it->second;
}

double NgramModel::probability(std::span<const int> context, int byte) const {
  return (static_cast<double>(ngram_count(context, byte)) + 1.0) /
         (static_cast<double>(context_count(context)) + kAlphabet);
}

std::vector<TokenRecord> NgramModel::score(std::string_view source) const {
  std::vector<TokenRecord> records;
  std::vector<int> history(static_cast<std::size_t>(order_ - 1), kBoundary);
  std::size_t offset = 0;
  while (offset < source.size()) {
    const std::size_t len = utf8::char_length(source, offset);
    double logprob = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      const int byte = static_cast<unsigned char>(source[offset + k]);
      logprob += std::log(probability(history, byte));
      if (!history.empty()) {
        history.erase(history.begin());
        history.push_back(byte);
      }
    }
    TokenRecord r;
    r.index = records.size();
    r.text = std::string(source.substr(offset, len));
    r.span = {offset, offset + len};
    r.logprob = logprob;
    records.push_back(std::move(r));
    offset += len;
  }
  return records;
}

}  // namespace confusion_lens
