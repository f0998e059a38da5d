#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "confusion_lens/corpus.hpp"
#include "confusion_lens/ngram.hpp"
#include "confusion_lens/token.hpp"

namespace confusion_lens {

struct BackendConfig {
  enum class Kind { http, file, reference };

  Kind kind = Kind::reference;
  std::string endpoint;         // http: base URL or full completions URL
  std::filesystem::path path;   // file: recorded fixture
  std::string model = "default";
  std::string api_key;          // http: bearer token
  int ngram_order = 3;          // reference
  std::chrono::milliseconds timeout{60000};
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::size_t max_in_flight = 4;
};

/// Parses "reference", "file:PATH" or "http:URL" / "https:URL".
/// Throws UsageError on anything else.
BackendConfig parse_backend_spec(std::string_view spec);

class Backend {
 public:
  virtual ~Backend() = default;
  /// Records partition the snippet source. Implementations must be callable
  /// concurrently for distinct snippets.
  virtual std::vector<TokenRecord> tokenize_with_logprobs(const Snippet& snippet) = 0;
  /// Stable name used in cache keys, e.g. "reference:3".
  virtual std::string identity() const = 0;
  virtual std::string model_name() const { return "default"; }
};

class ReferenceBackend final : public Backend {
 public:
  ReferenceBackend(int order, std::span<const std::string> training_texts);

  std::vector<TokenRecord> tokenize_with_logprobs(const Snippet& snippet) override;
  std::string identity() const override;
  const NgramModel& model() const { return model_; }

 private:
  NgramModel model_;
};

/// Replays recorded token streams (fixture or cache format).
class FileBackend final : public Backend {
 public:
  explicit FileBackend(const std::filesystem::path& path);

  std::vector<TokenRecord> tokenize_with_logprobs(const Snippet& snippet) override;
  std::string identity() const override;

 private:
  std::filesystem::path path_;
  std::map<std::string, std::vector<TokenRecord>> recorded_;
};

/// Completion-style client: {model, prompt, max_tokens: 0, echo: true,
/// logprobs: 1}. Retries transport errors and 5xx/429 responses with
/// exponential backoff.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(BackendConfig config);

  std::vector<TokenRecord> tokenize_with_logprobs(const Snippet& snippet) override;
  std::string identity() const override;
  std::string model_name() const override { return config_.model; }

 private:
  BackendConfig config_;
  std::string scheme_host_port_;
  std::string request_path_;
};

/// Builds tokens from a completions response body (the parsed JSON text).
/// Exposed for tests; throws BackendError/AlignmentError.
std::vector<TokenRecord> records_from_completion(std::string_view source,
                                                 std::string_view response_body);

/// FNV-1a 64-bit hash as 16 lowercase hex digits.
std::string source_hash(std::string_view text);

/// JSONL store of token streams keyed by (backend identity, model, source
/// hash). Lines: {"cache_key","snippet_id","tokens":[...]}. Writes are
/// serialized and appended immediately.
class TokenCache {
 public:
  explicit TokenCache(std::filesystem::path path);

  static std::string key_for(const Backend& backend, std::string_view source);

  std::optional<std::vector<TokenRecord>> get(const std::string& key) const;
  void put(const std::string& key, const std::string& snippet_id,
           const std::vector<TokenRecord>& records);
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<std::string, std::vector<TokenRecord>> entries_;
};

/// Serves from the cache when possible, otherwise asks `inner` and stores
/// the result.
class CachedBackend final : public Backend {
 public:
  CachedBackend(std::unique_ptr<Backend> inner, std::shared_ptr<TokenCache> cache);

  std::vector<TokenRecord> tokenize_with_logprobs(const Snippet& snippet) override;
  std::string identity() const override { return inner_->identity(); }
  std::string model_name() const override { return inner_->model_name(); }

  std::size_t hits() const;

 private:
  std::unique_ptr<Backend> inner_;
  std::shared_ptr<TokenCache> cache_;
  mutable std::mutex mutex_;
  std::size_t hits_ = 0;
};

/// Training texts default to the clean variants of `corpus`.
std::unique_ptr<Backend> make_backend(const BackendConfig& config,
                                      std::span<const std::string> training_texts);

std::vector<std::string> clean_sources(const Corpus& corpus);

/// Convenience single-shot entry point; builds a fresh backend per call.
std::vector<TokenRecord> tokenize_with_logprobs(const Snippet& snippet,
                                                const BackendConfig& config,
                                                std::span<const std::string> training_texts);

/// Fixture / cache record serialization: {"snippet_id","tokens":[{"index",
/// "text","start","end","logprob"}]}.
std::string serialize_token_stream(const std::string& snippet_id,
                                   const std::vector<TokenRecord>& records);
struct TokenStream {
  std::string snippet_id;
  std::optional<std::string> cache_key;
  std::vector<TokenRecord> records;
};
/// Throws DataError naming `line_number` for malformed input.
TokenStream parse_token_stream(std::string_view line, std::size_t line_number);

}  // namespace confusion_lens
