#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "confusion_lens/corpus.hpp"
#include "confusion_lens/peaks.hpp"
#include "confusion_lens/perplexity.hpp"
#include "confusion_lens/regions.hpp"
#include "confusion_lens/syntax.hpp"

namespace confusion_lens {

struct DetectOptions {
  double prominence = 0.8;
  DetectionScale scale = DetectionScale::surprisal;
  std::size_t gap_tokens = 1;
  PerplexityOptions perplexity;
};

struct Detection {
  std::vector<Region> regions;     // categorized and filtered
  std::vector<Region> candidates;  // categorized, before filtering
  std::vector<std::string> warnings;
};

/// Peaks -> expansion -> merging -> labelling -> filtering for one snippet.
/// Merged regions that cover only whitespace are dropped before labelling.
/// The profile's own perplexity options are replaced by `options.perplexity`.
/// Throws ParseError when the snippet does not parse.
Detection detect_regions(const Snippet& snippet, PerplexityProfile profile,
                         const CategoryMap& map = CategoryMap::java_default(),
                         const DetectOptions& options = {});

}  // namespace confusion_lens
