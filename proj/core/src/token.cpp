#include "confusion_lens/token.hpp"

#include <cmath>

#include "confusion_lens/error.hpp"

namespace confusion_lens {

void validate_records(std::string_view source, std::span<const TokenRecord> records) {
  std::size_t offset = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const TokenRecord& r = records[i];
    const std::string where = "token " + std::to_string(i);
    if (r.index != i) throw DataError(where + ": index " + std::to_string(r.index) + " out of sequence");
    if (r.span.start != offset || r.span.end <= r.span.start || r.span.end > source.size()) {
      throw DataError(where + ": span [" + std::to_string(r.span.start) + "," +
                      std::to_string(r.span.end) + ") breaks the partition at offset " +
                      std::to_string(offset));
    }
    if (source.substr(r.span.start, r.span.length()) != r.text) {
      throw DataError(where + ": text does not match source at offset " +
                      std::to_string(r.span.start));
    }
    if (r.logprob && (!std::isfinite(*r.logprob) || *r.logprob > 0.0)) {
      throw DataError(where + ": logprob must be finite and <= 0");
    }
    offset = r.span.end;
  }
  if (offset != source.size()) {
    throw DataError("tokens cover " + std::to_string(offset) + " of " +
                    std::to_string(source.size()) + " source bytes");
  }
}

}  // namespace confusion_lens
