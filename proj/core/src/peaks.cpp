#include "confusion_lens/peaks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "confusion_lens/error.hpp"

namespace confusion_lens {

std::vector<Peak> find_peaks(std::span<const double> signal, double threshold) {
  std::vector<Peak> peaks;
  const std::size_t n = signal.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(signal[i - 1] < signal[i])) {
      ++i;
      continue;
    }
    // Walk over a plateau of equal values.
    std::size_t run_end = i;
    while (run_end + 1 < n && signal[run_end + 1] == signal[i]) ++run_end;
    if (run_end + 1 >= n || !(signal[run_end + 1] < signal[i])) {
      i = run_end + 1;
      continue;
    }

    const double value = signal[i];
    double left_base = value;
    for (std::size_t j = i; j-- > 0;) {
      if (signal[j] > value) break;
      left_base = std::min(left_base, signal[j]);
    }
    double right_base = value;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (signal[j] > value) break;
      right_base = std::min(right_base, signal[j]);
    }
    const double prominence = value - std::max(left_base, right_base);
    if (prominence >= threshold) peaks.push_back({i, value, prominence});
    i = run_end + 1;
  }
  return peaks;
}

std::string_view to_string(DetectionScale scale) {
  switch (scale) {
    case DetectionScale::surprisal:
      return "surprisal";
    case DetectionScale::raw_ppl:
      return "raw_ppl";
    case DetectionScale::log10_ppl:
      return "log10_ppl";
  }
  return "surprisal";
}

DetectionScale parse_detection_scale(std::string_view name) {
  if (name == "surprisal") return DetectionScale::surprisal;
  if (name == "raw_ppl") return DetectionScale::raw_ppl;
  if (name == "log10_ppl") return DetectionScale::log10_ppl;
  throw UsageError("unknown detection scale \"" + std::string(name) +
                   "\" (expected surprisal, raw_ppl or log10_ppl)");
}

DetectionSignal detection_signal(const PerplexityProfile& profile, DetectionScale scale) {
  DetectionSignal out;
  for (const auto& r : profile.tokens) {
    if (!is_included(r, profile.options)) continue;
    const double surprisal = -*r.logprob;
    double value = surprisal;
    if (scale == DetectionScale::raw_ppl) {
      value = std::exp(surprisal);
    } else if (scale == DetectionScale::log10_ppl) {
      value = surprisal / std::numbers::ln10;
    }
    out.values.push_back(value);
    out.token_indices.push_back(r.index);
  }
  return out;
}

}  // namespace confusion_lens
