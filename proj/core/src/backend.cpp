#include "confusion_lens/backend.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <thread>

#include "confusion_lens/alignment.hpp"
#include "confusion_lens/error.hpp"
#include "confusion_lens/json_format.hpp"

namespace confusion_lens {

BackendConfig parse_backend_spec(std::string_view spec) {
  BackendConfig config;
  if (spec == "reference") {
    config.kind = BackendConfig::Kind::reference;
  } else if (spec.starts_with("file:")) {
    config.kind = BackendConfig::Kind::file;
    config.path = std::string(spec.substr(5));
    if (config.path.empty()) throw UsageError("backend file: needs a path");
  } else if (spec.starts_with("http:") || spec.starts_with("https:")) {
    config.kind = BackendConfig::Kind::http;
    const std::size_t colon = spec.find(':');
    std::string_view rest = spec.substr(colon + 1);
    // Both "http:URL" and a bare "http://host" are accepted.
    config.endpoint = rest.starts_with("//") ? std::string(spec) : std::string(rest);
    if (config.endpoint.empty()) throw UsageError("backend http: needs a URL");
  } else {
    throw UsageError("unknown backend \"" + std::string(spec) +
                     "\" (expected reference, file:PATH or http:URL)");
  }
  return config;
}

// ---------------------------------------------------------------------------

ReferenceBackend::ReferenceBackend(int order, std::span<const std::string> training_texts)
    : model_(order) {
  for (const auto& text : training_texts) model_.train(text);
}

std::vector<TokenRecord> ReferenceBackend::tokenize_with_logprobs(const Snippet& snippet) {
  if (snippet.source.empty()) throw DataError("snippet " + snippet.id + ": empty source");
  return model_.score(snippet.source);
}

std::string ReferenceBackend::identity() const {
  return "reference:" + std::to_string(model_.order());
}

// ---------------------------------------------------------------------------

std::string serialize_token_stream(const std::string& snippet_id,
                                   const std::vector<TokenRecord>& records) {
  Json tokens = Json::array();
  for (const auto& r : records) {
    Json t;
    t["index"] = r.index;
    t["text"] = r.text;
    t["start"] = r.span.start;
    t["end"] = r.span.end;
    t["logprob"] = r.logprob ? Json(*r.logprob) : Json(nullptr);
    tokens.push_back(std::move(t));
  }
  Json j;
  j["snippet_id"] = snippet_id;
  j["tokens"] = std::move(tokens);
  // Full round-trip precision: replayed logprobs must equal the originals.
  return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

TokenStream parse_token_stream(std::string_view line, std::size_t line_number) {
  const std::string where = "line " + std::to_string(line_number) + ": ";
  try {
    const Json j = Json::parse(line);
    TokenStream stream;
    stream.snippet_id = j.at("snippet_id").get<std::string>();
    if (auto it = j.find("cache_key"); it != j.end()) stream.cache_key = it->get<std::string>();
    for (const auto& t : j.at("tokens")) {
      TokenRecord r;
      r.index = t.at("index").get<std::size_t>();
      r.text = t.at("text").get<std::string>();
      r.span = {t.at("start").get<std::size_t>(), t.at("end").get<std::size_t>()};
      if (auto it = t.find("logprob"); it != t.end() && !it->is_null()) {
        r.logprob = it->get<double>();
      }
      stream.records.push_back(std::move(r));
    }
    return stream;
  } catch (const Json::exception& e) {
    throw DataError(where + "malformed token stream: " + e.what());
  }
}

FileBackend::FileBackend(const std::filesystem::path& path) : path_(path) {
  std::ifstream in(path);
  if (!in) throw BackendError("cannot open recorded token file " + path.string());
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    TokenStream stream;
    try {
      stream = parse_token_stream(line, line_number);
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + e.what());
    }
    if (!recorded_.emplace(stream.snippet_id, std::move(stream.records)).second) {
      throw DataError(path.string() + ": line " + std::to_string(line_number) +
                      ": duplicate snippet_id \"" + stream.snippet_id + "\"");
    }
  }
}

std::vector<TokenRecord> FileBackend::tokenize_with_logprobs(const Snippet& snippet) {
  const auto it = recorded_.find(snippet.id);
  if (it == recorded_.end()) {
    throw BackendError("no recorded tokens for snippet " + snippet.id + " in " +
                       path_.string());
  }
  try {
    validate_records(snippet.source, it->second);
  } catch (const DataError& e) {
    throw DataError("snippet " + snippet.id + ": " + e.what());
  }
  return it->second;
}

std::string FileBackend::identity() const { return "file:" + path_.filename().string(); }

// ---------------------------------------------------------------------------

std::string source_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

TokenCache::TokenCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;  // cold cache
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    TokenStream stream;
    try {
      stream = parse_token_stream(line, line_number);
    } catch (const DataError& e) {
      throw DataError("corrupt cache " + path_.string() + ": " + e.what());
    }
    if (!stream.cache_key) {
      throw DataError("corrupt cache " + path_.string() + ": line " +
                      std::to_string(line_number) + ": missing cache_key");
    }
    entries_[*stream.cache_key] = std::move(stream.records);
  }
}

std::string TokenCache::key_for(const Backend& backend, std::string_view source) {
  return backend.identity() + "|" + backend.model_name() + "|" + source_hash(source);
}

std::optional<std::vector<TokenRecord>> TokenCache::get(const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TokenCache::put(const std::string& key, const std::string& snippet_id,
                     const std::vector<TokenRecord>& records) {
  std::lock_guard lock(mutex_);
  if (!entries_.emplace(key, records).second) return;
  Json j = Json::parse(serialize_token_stream(snippet_id, records));
  j["cache_key"] = key;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw DataError("cannot write cache " + path_.string());
  out << j.dump(-1, ' ', false, Json::error_handler_t::replace) << '\n';
}

std::size_t TokenCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

CachedBackend::CachedBackend(std::unique_ptr<Backend> inner, std::shared_ptr<TokenCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::vector<TokenRecord> CachedBackend::tokenize_with_logprobs(const Snippet& snippet) {
  const std::string key = TokenCache::key_for(*inner_, snippet.source);
  if (auto hit = cache_->get(key)) {
    try {
      validate_records(snippet.source, *hit);
    } catch (const DataError& e) {
      throw DataError("cached tokens for snippet " + snippet.id + ": " + e.what());
    }
    std::lock_guard lock(mutex_);
    ++hits_;
    return *hit;
  }
  auto records = inner_->tokenize_with_logprobs(snippet);
  cache_->put(key, snippet.id, records);
  return records;
}

std::size_t CachedBackend::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

// ---------------------------------------------------------------------------

std::vector<std::string> clean_sources(const Corpus& corpus) {
  std::vector<std::string> out;
  for (const auto& s : corpus.snippets()) {
    if (s.variant == Variant::clean) out.push_back(s.source);
  }
  return out;
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config,
                                      std::span<const std::string> training_texts) {
  switch (config.kind) {
    case BackendConfig::Kind::reference:
      return std::make_unique<ReferenceBackend>(config.ngram_order, training_texts);
    case BackendConfig::Kind::file:
      return std::make_unique<FileBackend>(config.path);
    case BackendConfig::Kind::http:
      return std::make_unique<HttpBackend>(config);
  }
  throw UsageError("unsupported backend kind");
}

std::vector<TokenRecord> tokenize_with_logprobs(const Snippet& snippet,
                                                const BackendConfig& config,
                                                std::span<const std::string> training_texts) {
  return make_backend(config, training_texts)->tokenize_with_logprobs(snippet);
}

}  // namespace confusion_lens
