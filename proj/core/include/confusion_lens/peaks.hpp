#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "confusion_lens/perplexity.hpp"

namespace confusion_lens {

struct Peak {
  std::size_t index = 0;  // position in the signal
  double value = 0.0;
  double prominence = 0.0;

  bool operator==(const Peak&) const = default;
};

/// Single-sample peaks whose topographic prominence reaches `threshold`.
///
/// A candidate is a strict local maximum, or the leftmost sample of a
/// plateau of equal values that is strictly higher than both neighbours of
/// the run. The first and last samples are never candidates. Each base is
/// the minimum of the signal between the candidate and the nearest strictly
/// higher sample on that side (or the signal edge); prominence is the value
/// minus the higher of the two bases. Results are in increasing index order.
std::vector<Peak> find_peaks(std::span<const double> signal, double threshold);

enum class DetectionScale { surprisal, raw_ppl, log10_ppl };

std::string_view to_string(DetectionScale scale);
/// Throws UsageError for unknown names.
DetectionScale parse_detection_scale(std::string_view name);

/// Detection values for the included tokens of a profile, with the token
/// index each value belongs to.
struct DetectionSignal {
  std::vector<double> values;
  std::vector<std::size_t> token_indices;
};

/// surprisal = -logprob, raw_ppl = exp(surprisal), log10_ppl = surprisal/ln 10.
DetectionSignal detection_signal(const PerplexityProfile& profile, DetectionScale scale);

}  // namespace confusion_lens
