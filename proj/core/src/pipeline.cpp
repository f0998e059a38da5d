#include "confusion_lens/pipeline.hpp"

#include <string_view>

namespace confusion_lens {

Detection detect_regions(const Snippet& snippet, PerplexityProfile profile,
                         const CategoryMap& map, const DetectOptions& options) {
  profile.options = options.perplexity;
  const DetectionSignal signal = detection_signal(profile, options.scale);

  std::vector<Region> grown;
  for (const Peak& peak : find_peaks(signal.values, options.prominence)) {
    grown.push_back(expand(signal.token_indices[peak.index], peak.value, profile.tokens,
                           snippet.id, options.perplexity, snippet.language));
  }

  Detection out;
  if (grown.empty()) return out;
  out.candidates = merge(std::move(grown), profile.tokens, options.gap_tokens, options.perplexity);
  // A region made only of whitespace has nothing to label.
  std::erase_if(out.candidates, [&](const Region& r) {
    const std::string_view text =
        std::string_view(snippet.source).substr(r.span.start, r.span.length());
    return text.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
  });

  const Ast ast = parse_source(snippet.source, snippet.language);
  const auto warn = [&](const std::string& message) {
    out.warnings.push_back(snippet.id + ": " + message);
  };
  for (Region& region : out.candidates) {
    label_region(region, ast, map, warn);
    region.overlaps_aoi = overlaps_aoi(region, snippet, profile.tokens);
  }
  out.regions = filter_regions(out.candidates);
  return out;
}

}  // namespace confusion_lens
