#include "commands.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "confusion_lens/backend.hpp"
#include "confusion_lens/corpus.hpp"
#include "confusion_lens/json_format.hpp"
#include "confusion_lens/pipeline.hpp"
#include "confusion_lens/regions.hpp"
#include "confusion_lens/stats.hpp"
#include "confusion_lens/syntax.hpp"

namespace confusion_lens::cli {

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

// Throws a copy of `e` with `context` prefixed, keeping its error class.
[[noreturn]] void throw_with_context(const Error& e, const std::string& context) {
  std::string message = e.what();
  if (!message.starts_with(context + ": ")) message = context + ": " + message;
  switch (e.kind()) {
    case ErrorKind::usage:
      throw UsageError(message);
    case ErrorKind::backend:
      throw BackendError(message);
    case ErrorKind::data:
      break;
  }
  throw DataError(message);
}

[[noreturn]] void rethrow_with_context(const std::exception_ptr& error, const std::string& context) {
  try {
    std::rethrow_exception(error);
  } catch (const Error& e) {
    throw_with_context(e, context);
  } catch (const std::exception& e) {
    throw DataError(context + ": " + e.what());
  }
}

// Snippet ids in output order.
std::vector<const Snippet*> sorted_snippets(const Corpus& corpus) {
  std::vector<const Snippet*> out;
  for (const auto& s : corpus.snippets()) out.push_back(&s);
  std::sort(out.begin(), out.end(), [](const Snippet* a, const Snippet* b) { return a->id < b->id; });
  return out;
}

// Profiles keyed by snippet id, rebuilt against the corpus sources.
std::map<std::string, PerplexityProfile> load_profiles(const std::filesystem::path& path,
                                                       const Corpus& corpus,
                                                       const PerplexityOptions& options) {
  std::map<std::string, PerplexityProfile> out;
  std::size_t line_number = 0;
  for (const auto& line : read_lines(path)) {
    ++line_number;
    if (blank(line)) continue;
    const std::string where = path.string() + ":" + std::to_string(line_number);
    try {
      const std::string id = profile_snippet_id(line);
      const Snippet* snippet = corpus.find(id);
      if (!snippet) throw DataError("profile for unknown snippet \"" + id + "\"");
      if (out.count(id)) throw DataError("duplicate profile for \"" + id + "\"");
      out.emplace(id, parse_profile(line, snippet->source, options));
    } catch (const Error& e) {
      throw_with_context(e, where);
    }
  }
  return out;
}

const PerplexityProfile& profile_for(const std::map<std::string, PerplexityProfile>& profiles,
                                     const std::string& id) {
  const auto it = profiles.find(id);
  if (it == profiles.end()) throw DataError("no profile for snippet \"" + id + "\"");
  return it->second;
}

std::vector<Region> load_regions(const std::filesystem::path& path) {
  std::vector<Region> out;
  std::size_t line_number = 0;
  for (const auto& line : read_lines(path)) {
    ++line_number;
    if (blank(line)) continue;
    try {
      out.push_back(parse_region(line));
    } catch (const Error& e) {
      throw_with_context(e, path.string() + ":" + std::to_string(line_number));
    }
  }
  return out;
}

double metric_value(std::span<const TokenRecord> records, std::optional<CharSpan> span,
                    Metric metric, const PerplexityOptions& options) {
  return metric == Metric::avg ? avg_perplexity(records, span, options)
                               : max_perplexity(records, span, options);
}

// Perplexity over the union of the token sets of `aois`.
double aoi_union_value(std::span<const TokenRecord> records, std::span<const CharSpan> aois,
                       Metric metric, const PerplexityOptions& options) {
  std::vector<TokenRecord> members;
  for (const auto& r : records) {
    const bool inside = std::any_of(aois.begin(), aois.end(),
                                    [&](const CharSpan& aoi) { return r.span.intersects(aoi); });
    if (inside) members.push_back(r);
  }
  return metric_value(members, std::nullopt, metric, options);
}

Json overlap_json(const VariantOverlap& v) {
  Json j;
  j["regions"] = v.regions;
  j["overlap"] = v.overlap;
  j["novel"] = v.novel;
  j["aois"] = v.aois;
  j["hit"] = v.hit;
  j["missed"] = v.missed;
  j["detection_rate"] = json_number(v.detection_rate());
  return j;
}

}  // namespace

Level parse_level(std::string_view text) {
  if (text == "snippet") return Level::snippet;
  if (text == "aoi") return Level::aoi;
  throw UsageError("unknown level \"" + std::string(text) + "\" (expected snippet or aoi)");
}

Metric parse_metric(std::string_view text) {
  if (text == "avg") return Metric::avg;
  if (text == "max") return Metric::max;
  throw UsageError("unknown metric \"" + std::string(text) + "\" (expected avg or max)");
}

std::string_view to_string(Level level) { return level == Level::snippet ? "snippet" : "aoi"; }
std::string_view to_string(Metric metric) { return metric == Metric::avg ? "avg" : "max"; }

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void write_output(const std::optional<std::filesystem::path>& path, const std::string& text) {
  if (!path || path->empty() || *path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(*path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path->string());
  out << text;
  if (!out) throw DataError("failed writing " + path->string());
}

std::string run_ppl(const PplOptions& options, Diagnostics&) {
  const Corpus corpus = load_corpus(options.corpus);
  BackendConfig config = parse_backend_spec(options.backend);
  config.model = options.model;
  config.ngram_order = options.ngram_order;
  config.timeout = std::chrono::milliseconds(static_cast<long long>(options.timeout_seconds * 1000));
  config.max_attempts = std::max(1, options.retries + 1);
  if (const char* key = std::getenv("CONFUSION_LENS_API_KEY")) config.api_key = key;

  std::vector<std::string> training = clean_sources(corpus);
  for (const auto& path : options.training) training.push_back(read_text(path));
  std::unique_ptr<Backend> backend = make_backend(config, training);
  if (options.cache) {
    backend = std::make_unique<CachedBackend>(std::move(backend),
                                              std::make_shared<TokenCache>(*options.cache));
  }

  const auto snippets = sorted_snippets(corpus);
  std::vector<std::string> lines(snippets.size());
  std::vector<std::exception_ptr> errors(snippets.size());
  parallel_for(snippets.size(), options.jobs, [&](std::size_t i) {
    try {
      const Snippet& s = *snippets[i];
      lines[i] = serialize_profile(
          build_profile(s.id, backend->tokenize_with_logprobs(s), options.perplexity));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i]) rethrow_with_context(errors[i], "snippet " + snippets[i]->id);
  }
  std::string out;
  for (const auto& line : lines) out += line + "\n";
  return out;
}

std::string run_detect(const DetectCommandOptions& options, Diagnostics& diagnostics) {
  const Corpus corpus = load_corpus(options.corpus);
  const auto profiles = load_profiles(options.profiles, corpus, options.perplexity);
  const CategoryMap map =
      options.mapping ? CategoryMap::load(*options.mapping) : CategoryMap::java_default();
  DetectOptions detect;
  detect.prominence = options.prominence;
  detect.scale = options.scale;
  detect.gap_tokens = options.gap;
  detect.perplexity = options.perplexity;

  const auto snippets = sorted_snippets(corpus);
  for (const Snippet* s : snippets) profile_for(profiles, s->id);

  std::vector<Detection> results(snippets.size());
  std::vector<std::string> failures(snippets.size());
  parallel_for(snippets.size(), options.jobs, [&](std::size_t i) {
    const Snippet& s = *snippets[i];
    try {
      results[i] = detect_regions(s, profile_for(profiles, s.id), map, detect);
    } catch (const ParseError& e) {
      failures[i] = "snippet " + s.id + ": parse error at " + e.what() + "; skipped";
    }
  });

  std::string out;
  for (std::size_t i = 0; i < snippets.size(); ++i) {
    if (!failures[i].empty()) {
      diagnostics.warn(failures[i]);
      diagnostics.partial = true;
      continue;
    }
    for (const auto& w : results[i].warnings) diagnostics.warn(w);
    const auto& regions = options.keep_filtered ? results[i].candidates : results[i].regions;
    for (const auto& r : regions) out += serialize_region(r) + "\n";
  }
  return out;
}

std::string run_compare(const CompareOptions& options, Diagnostics& diagnostics) {
  const Corpus corpus = load_corpus(options.corpus);
  const auto profiles = load_profiles(options.profiles, corpus, options.perplexity);

  auto compare_one = [&](Level level, Metric metric, bool tolerate_failure) {
    std::vector<PairedMetric> pairs;
    for (const auto& [pair_id, pair] : corpus.pairs()) {
      const Snippet& clean = corpus.clean_of(pair);
      const Snippet& confusing = corpus.confusing_of(pair);
      const auto& clean_tokens = profile_for(profiles, clean.id).tokens;
      const auto& confusing_tokens = profile_for(profiles, confusing.id).tokens;
      if (level == Level::snippet) {
        pairs.push_back({pair_id,
                         metric_value(clean_tokens, std::nullopt, metric, options.perplexity),
                         metric_value(confusing_tokens, std::nullopt, metric, options.perplexity)});
        continue;
      }
      if (clean.aois.empty() || confusing.aois.empty()) {
        diagnostics.warn("pair " + pair_id + ": no AOI on one side; skipped at AOI level");
        continue;
      }
      if (clean.aois.size() == confusing.aois.size()) {
        for (std::size_t k = 0; k < clean.aois.size(); ++k) {
          pairs.push_back(
              {clean.aois.size() == 1 ? pair_id : pair_id + "#" + std::to_string(k),
               metric_value(clean_tokens, clean.aois[k], metric, options.perplexity),
               metric_value(confusing_tokens, confusing.aois[k], metric, options.perplexity)});
        }
      } else {
        pairs.push_back({pair_id,
                         aoi_union_value(clean_tokens, clean.aois, metric, options.perplexity),
                         aoi_union_value(confusing_tokens, confusing.aois, metric,
                                         options.perplexity)});
      }
    }
    Json j;
    try {
      WilcoxonOptions w;
      w.continuity_correction = options.continuity_correction;
      j = to_json(wilcoxon_signed_rank(pairs, w));
    } catch (const DataError& e) {
      if (!tolerate_failure) throw;
      j["test"] = "wilcoxon_signed_rank";
      j["error"] = e.what();
    }
    j["level"] = std::string(to_string(level));
    j["metric"] = std::string(to_string(metric));
    Json list = Json::array();
    for (const auto& p : pairs) {
      list.push_back({{"pair_id", p.pair_id},
                      {"clean", json_number(p.clean_value)},
                      {"confusing", json_number(p.confusing_value)}});
    }
    j["pairs"] = std::move(list);
    return j;
  };

  if (!options.all) return dump_canonical(compare_one(options.level, options.metric, false)) + "\n";
  Json results = Json::array();
  for (const Level level : {Level::snippet, Level::aoi}) {
    for (const Metric metric : {Metric::avg, Metric::max}) {
      results.push_back(compare_one(level, metric, true));
    }
  }
  return dump_canonical(Json{{"results", std::move(results)}}) + "\n";
}

namespace {

struct Measurement {
  std::size_t line = 0;
  std::string snippet_id;
  std::optional<CharSpan> span;
  std::optional<std::size_t> aoi_index;
  double value = 0.0;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(std::move(field));
  for (auto& f : out) {
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.pop_back();
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.erase(f.begin());
  }
  return out;
}

double parse_double(const std::string& text, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || !std::isfinite(v)) {
    throw DataError(where + ": invalid number \"" + text + "\"");
  }
  return v;
}

std::size_t parse_size(const std::string& text, const std::string& where) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw DataError(where + ": invalid offset \"" + text + "\"");
  }
  return static_cast<std::size_t>(std::stoull(text));
}

std::vector<Measurement> load_measurements(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw DataError(path.string() + ": empty measurements file");
  const auto header = split_csv(lines[0]);
  const bool by_span = header == std::vector<std::string>{"snippet_id", "start", "end", "value"};
  const bool by_aoi = header == std::vector<std::string>{"snippet_id", "aoi_index", "value"};
  if (!by_span && !by_aoi) {
    throw DataError(path.string() +
                    ":1: header must be snippet_id,start,end,value or snippet_id,aoi_index,value");
  }
  std::vector<Measurement> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    const auto fields = split_csv(lines[i]);
    if (fields.size() != header.size()) throw DataError(where + ": wrong number of fields");
    Measurement m;
    m.line = i + 1;
    m.snippet_id = fields[0];
    if (by_span) {
      m.span = CharSpan{parse_size(fields[1], where), parse_size(fields[2], where)};
      if (m.span->empty()) throw DataError(where + ": empty span");
    } else {
      m.aoi_index = parse_size(fields[1], where);
    }
    m.value = parse_double(fields.back(), where);
    out.push_back(std::move(m));
  }
  return out;
}

// Index of the candidate span sharing the most characters with `target`
// (earliest on ties), or nullopt when none overlaps.
std::optional<std::size_t> best_overlap(std::span<const CharSpan> candidates, CharSpan target) {
  std::optional<std::size_t> best;
  std::size_t best_shared = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const std::size_t lo = std::max(candidates[i].start, target.start);
    const std::size_t hi = std::min(candidates[i].end, target.end);
    const std::size_t shared = hi > lo ? hi - lo : 0;
    if (shared > best_shared) {
      best_shared = shared;
      best = i;
    }
  }
  return best;
}

}  // namespace

std::string run_correlate(const CorrelateOptions& options, Diagnostics& diagnostics) {
  if (options.aoi == options.regions.has_value()) {
    throw UsageError("correlate needs exactly one of --regions or --aoi");
  }
  if (options.aoi && !options.profiles) throw UsageError("--aoi requires --profiles");
  const Corpus corpus = load_corpus(options.corpus);
  const auto measurements = load_measurements(options.measurements);

  // Candidate units per snippet: spans and their x values.
  struct Unit {
    CharSpan span;
    double x = 0.0;
  };
  std::map<std::string, std::vector<Unit>> units;
  if (options.aoi) {
    const auto profiles = load_profiles(*options.profiles, corpus, options.perplexity);
    for (const auto& s : corpus.snippets()) {
      const auto& tokens = profile_for(profiles, s.id).tokens;
      for (const auto& aoi : s.aois) {
        units[s.id].push_back({aoi, metric_value(tokens, aoi, options.metric, options.perplexity)});
      }
    }
  } else {
    for (const auto& r : load_regions(*options.regions)) {
      if (!corpus.find(r.snippet_id)) {
        throw DataError("region refers to unknown snippet \"" + r.snippet_id + "\"");
      }
      units[r.snippet_id].push_back({r.span, options.metric == Metric::avg ? r.avg_ppl : r.max_ppl});
    }
  }

  std::map<Variant, std::vector<ClusterPoint>> points;
  std::vector<std::string> unresolved;
  for (const auto& m : measurements) {
    const std::string where = options.measurements.string() + ":" + std::to_string(m.line);
    const Snippet* snippet = corpus.find(m.snippet_id);
    if (!snippet) {
      unresolved.push_back(where + ": unknown snippet \"" + m.snippet_id + "\"");
      continue;
    }
    std::optional<CharSpan> target = m.span;
    if (m.aoi_index) {
      if (*m.aoi_index >= snippet->aois.size()) {
        unresolved.push_back(where + ": snippet \"" + m.snippet_id + "\" has no AOI " +
                             std::to_string(*m.aoi_index));
        continue;
      }
      target = snippet->aois[*m.aoi_index];
    }
    const auto& candidates = units[m.snippet_id];
    std::vector<CharSpan> spans;
    for (const auto& u : candidates) spans.push_back(u.span);
    const auto hit = best_overlap(spans, *target);
    if (!hit) {
      unresolved.push_back(where + ": no " + std::string(options.aoi ? "AOI" : "region") +
                           " overlaps [" + std::to_string(target->start) + ", " +
                           std::to_string(target->end) + ")");
      continue;
    }
    points[snippet->variant].push_back({m.snippet_id, candidates[*hit].x, m.value});
  }
  if (!unresolved.empty()) {
    std::string message = std::to_string(unresolved.size()) + " unresolved measurement row(s):";
    for (const auto& u : unresolved) message += "\n  " + u;
    throw DataError(message);
  }

  Json out;
  out["mode"] = options.aoi ? "aoi" : "regions";
  out["metric"] = std::string(to_string(options.metric));
  bool any = false;
  for (const Variant v : {Variant::clean, Variant::confusing}) {
    const auto& pts = points[v];
    Json block;
    try {
      if (options.clustered) {
        BootstrapOptions b;
        b.replicates = options.replicates;
        b.seed = options.seed;
        b.jobs = options.jobs;
        block = to_json(clustered_bootstrap_spearman(pts, b));
      } else {
        std::vector<double> xs;
        std::vector<double> ys;
        for (const auto& p : pts) {
          xs.push_back(p.x);
          ys.push_back(p.y);
        }
        block = to_json(spearman(xs, ys));
      }
      any = true;
    } catch (const DataError& e) {
      block["test"] = options.clustered ? "spearman_clustered_bootstrap" : "spearman";
      block["n"] = pts.size();
      block["error"] = e.what();
      diagnostics.warn(std::string(to_string(v)) + ": " + e.what());
    }
    out[std::string(to_string(v))] = std::move(block);
  }
  if (!any) throw DataError("no variant had enough joined points to correlate");
  return dump_canonical(out) + "\n";
}

std::string run_overlap(const OverlapOptions& options, Diagnostics&) {
  const Corpus corpus = load_corpus(options.corpus);
  const auto regions = load_regions(options.regions);
  const OverlapSummary summary = overlap_counts(regions, corpus);
  Json j;
  j["clean"] = overlap_json(summary.clean);
  j["confusing"] = overlap_json(summary.confusing);
  return dump_canonical(j) + "\n";
}

std::string run_report(const ReportOptions& options, Diagnostics& diagnostics) {
  const Corpus corpus = load_corpus(options.corpus);
  const auto profiles = load_profiles(options.profiles, corpus, {});
  std::map<std::string, std::vector<Region>> regions;
  if (options.regions) {
    for (auto& r : load_regions(*options.regions)) regions[r.snippet_id].push_back(std::move(r));
  }
  static constexpr std::string_view kRamp = " .:-=+*#%@";
  static constexpr std::array<int, 10> kColors = {16, 17, 18, 19, 54, 90, 126, 162, 198, 196};

  std::ostringstream out;
  bool shown = false;
  for (const Snippet* s : sorted_snippets(corpus)) {
    if (options.snippet && *options.snippet != s->id) continue;
    shown = true;
    const auto& profile = profile_for(profiles, s->id);
    const std::string& src = s->source;
    // Per-byte heat level from the token covering it, on a log scale
    // relative to the snippet maximum.
    std::vector<int> level(src.size(), -1);
    const double top = std::log(std::max(profile.snippet_max, 1.0 + 1e-9));
    for (std::size_t t = 0; t < profile.tokens.size(); ++t) {
      const auto& ppl = profile.perplexities[t];
      if (!ppl) continue;
      const double frac = std::clamp(std::log(std::max(*ppl, 1.0)) / top, 0.0, 1.0);
      const int l = static_cast<int>(std::lround(frac * (kRamp.size() - 1)));
      for (std::size_t b = profile.tokens[t].span.start; b < profile.tokens[t].span.end; ++b) {
        level[b] = l;
      }
    }
    std::vector<bool> marked(src.size(), false);
    for (const auto& r : regions[s->id]) {
      for (std::size_t b = r.span.start; b < std::min(r.span.end, src.size()); ++b) marked[b] = true;
    }

    out << "== " << s->id << " (" << to_string(s->variant) << ")  avg "
        << json_number(profile.snippet_avg).dump() << "  max "
        << json_number(profile.snippet_max).dump() << "\n";
    std::size_t line_start = 0;
    while (line_start <= src.size()) {
      std::size_t line_end = src.find('\n', line_start);
      if (line_end == std::string::npos) line_end = src.size();
      std::string code;
      std::string heat;
      std::string under;
      bool any_mark = false;
      for (std::size_t b = line_start; b < line_end; ++b) {
        const unsigned char c = static_cast<unsigned char>(src[b]);
        if ((c & 0xC0) == 0x80) {
          code += src[b];
          continue;
        }
        const int l = level[b];
        if (options.color && l >= 0) {
          code += "\x1b[48;5;" + std::to_string(kColors[l]) + "m\x1b[97m";
          code += src[b];
          code += "\x1b[0m";
        } else {
          code += src[b] == '\t' ? ' ' : src[b];
        }
        heat += l < 0 ? ' ' : kRamp[l];
        under += marked[b] ? '^' : ' ';
        any_mark = any_mark || marked[b];
      }
      out << "  " << code << "\n";
      if (!options.color) out << "  " << heat << "\n";
      if (any_mark) out << "  " << under << "\n";
      if (line_end == src.size()) break;
      line_start = line_end + 1;
    }
    if (regions.count(s->id)) {
      for (const auto& r : regions[s->id]) {
        out << "  region [" << r.span.start << ", " << r.span.end << ") "
            << (r.label ? *r.label : "?") << " "
            << (r.category ? std::string(to_string(*r.category)) : "?") << " max "
            << json_number(r.max_ppl).dump() << "\n";
      }
    }
    out << "\n";
  }
  if (options.snippet && !shown) {
    diagnostics.warn("no snippet with id \"" + *options.snippet + "\"");
    diagnostics.partial = true;
  }
  return out.str();
}

}  // namespace confusion_lens::cli
