#include "confusion_lens/perplexity.hpp"

#include <algorithm>
#include <cmath>

#include "confusion_lens/error.hpp"
#include "confusion_lens/json_format.hpp"

namespace confusion_lens {

namespace {

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  });
}

double checked_surprisal(const TokenRecord& r) {
  if (*r.logprob > 0.0 || !std::isfinite(*r.logprob)) {
    throw DataError("token " + std::to_string(r.index) + ": logprob must be finite and <= 0");
  }
  return -*r.logprob;
}

template <typename Visit>
std::size_t for_each_included(std::span<const TokenRecord> records,
                              std::optional<CharSpan> span, const PerplexityOptions& options,
                              Visit&& visit) {
  std::size_t n = 0;
  for (const auto& r : records) {
    if (span && !r.span.intersects(*span)) continue;
    if (!is_included(r, options)) continue;
    visit(checked_surprisal(r));
    ++n;
  }
  return n;
}

std::string describe(std::optional<CharSpan> span) {
  if (!span) return "snippet";
  return "span [" + std::to_string(span->start) + "," + std::to_string(span->end) + ")";
}

}  // namespace

bool is_included(const TokenRecord& record, const PerplexityOptions& options) {
  if (!record.logprob) return false;
  if (record.index == 0 && !options.include_first) return false;
  if (options.exclude_whitespace && is_blank(record.text)) return false;
  return true;
}

std::vector<double> token_perplexities(std::span<const TokenRecord> records,
                                       const PerplexityOptions& options) {
  std::vector<double> out;
  for_each_included(records, std::nullopt, options,
                    [&out](double s) { out.push_back(std::exp(s)); });
  if (out.empty()) throw DataError("no tokens with perplexity after exclusions");
  return out;
}

std::vector<std::size_t> intersecting_tokens(std::span<const TokenRecord> records,
                                             CharSpan span) {
  std::vector<std::size_t> out;
  for (const auto& r : records) {
    if (r.span.intersects(span)) out.push_back(r.index);
  }
  return out;
}

double avg_perplexity(std::span<const TokenRecord> records, std::optional<CharSpan> span,
                      const PerplexityOptions& options) {
  // Log-space accumulation in extended precision; one exp at the end.
  long double total = 0.0L;
  const std::size_t n = for_each_included(records, span, options,
                                          [&total](double s) { total += s; });
  if (n == 0) throw DataError("no tokens in " + describe(span));
  return static_cast<double>(std::exp(total / static_cast<long double>(n)));
}

double max_perplexity(std::span<const TokenRecord> records, std::optional<CharSpan> span,
                      const PerplexityOptions& options) {
  double best = -1.0;
  const std::size_t n = for_each_included(records, span, options,
                                          [&best](double s) { best = std::max(best, s); });
  if (n == 0) throw DataError("no tokens in " + describe(span));
  return std::exp(best);
}

double avg_perplexity_range(std::span<const TokenRecord> records, std::size_t first,
                            std::size_t last, const PerplexityOptions& options) {
  return avg_perplexity(records.subspan(first, last - first + 1), std::nullopt, options);
}

double max_perplexity_range(std::span<const TokenRecord> records, std::size_t first,
                            std::size_t last, const PerplexityOptions& options) {
  return max_perplexity(records.subspan(first, last - first + 1), std::nullopt, options);
}

PerplexityProfile build_profile(std::string snippet_id, std::vector<TokenRecord> records,
                                const PerplexityOptions& options) {
  PerplexityProfile p;
  p.snippet_id = std::move(snippet_id);
  p.options = options;
  p.perplexities.reserve(records.size());
  for (const auto& r : records) {
    p.perplexities.push_back(r.logprob ? std::optional<double>(std::exp(checked_surprisal(r)))
                                       : std::nullopt);
  }
  p.tokens = std::move(records);
  try {
    p.snippet_avg = avg_perplexity(p.tokens, std::nullopt, options);
    p.snippet_max = max_perplexity(p.tokens, std::nullopt, options);
  } catch (const DataError& e) {
    throw DataError("snippet " + p.snippet_id + ": " + e.what());
  }
  return p;
}

std::string serialize_profile(const PerplexityProfile& profile) {
  Json tokens = Json::array();
  for (std::size_t i = 0; i < profile.tokens.size(); ++i) {
    const auto& r = profile.tokens[i];
    Json t;
    t["index"] = r.index;
    t["start"] = r.span.start;
    t["end"] = r.span.end;
    t["ppl"] = profile.perplexities[i] ? json_number(*profile.perplexities[i]) : Json(nullptr);
    tokens.push_back(std::move(t));
  }
  Json j;
  j["snippet_id"] = profile.snippet_id;
  j["snippet_avg"] = json_number(profile.snippet_avg);
  j["snippet_max"] = json_number(profile.snippet_max);
  j["tokens"] = std::move(tokens);
  return dump_canonical(j);
}

std::string profile_snippet_id(std::string_view line) {
  try {
    return Json::parse(line).at("snippet_id").get<std::string>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed profile: ") + e.what());
  }
}

PerplexityProfile parse_profile(std::string_view line, std::string_view source,
                                const PerplexityOptions& options) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw DataError(std::string("malformed profile JSON: ") + e.what());
  }
  std::vector<TokenRecord> records;
  std::string id;
  try {
    id = j.at("snippet_id").get<std::string>();
    for (const auto& t : j.at("tokens")) {
      TokenRecord r;
      r.index = t.at("index").get<std::size_t>();
      r.span = {t.at("start").get<std::size_t>(), t.at("end").get<std::size_t>()};
      if (r.span.end > source.size() || r.span.start >= r.span.end) {
        throw DataError("profile " + id + ": token span outside the snippet source");
      }
      r.text = std::string(source.substr(r.span.start, r.span.length()));
      if (const auto& ppl = t.at("ppl"); !ppl.is_null()) {
        const double value = ppl.get<double>();
        if (!(value >= 1.0)) throw DataError("profile " + id + ": perplexity below 1");
        r.logprob = -std::log(value);
      }
      records.push_back(std::move(r));
    }
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed profile: ") + e.what());
  }
  try {
    validate_records(source, records);
  } catch (const DataError& e) {
    throw DataError("profile " + id + " does not match the corpus source: " + e.what());
  }
  return build_profile(std::move(id), std::move(records), options);
}

}  // namespace confusion_lens
