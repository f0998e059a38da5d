#include <cmath>
#include <thread>

#include <httplib.h>

#include "confusion_lens/alignment.hpp"
#include "confusion_lens/backend.hpp"
#include "confusion_lens/error.hpp"
#include "confusion_lens/json_format.hpp"

namespace confusion_lens {

namespace {

// Splits "http://host:port/some/path" into ("http://host:port", "/some/path").
std::pair<std::string, std::string> split_url(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw UsageError("malformed URL \"" + url + "\"");
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string completions_path(std::string path) {
  while (!path.empty() && path.back() == '/') path.pop_back();
  if (path.ends_with("/completions")) return path;
  if (path.ends_with("/v1")) return path + "/completions";
  return path + "/v1/completions";
}

// Tiny positive values show up from half-precision servers.
constexpr double kPositiveLogprobSlack = 1e-6;

}  // namespace

std::vector<TokenRecord> records_from_completion(std::string_view source,
                                                 std::string_view response_body) {
  Json body;
  try {
    body = Json::parse(response_body);
  } catch (const Json::parse_error& e) {
    throw BackendError(std::string("response is not JSON: ") + e.what());
  }
  const Json* logprobs = nullptr;
  if (auto choices = body.find("choices");
      choices != body.end() && choices->is_array() && !choices->empty()) {
    if (auto lp = choices->front().find("logprobs");
        lp != choices->front().end() && lp->is_object()) {
      logprobs = &*lp;
    }
  }
  if (logprobs == nullptr || !logprobs->contains("tokens") ||
      !logprobs->contains("token_logprobs")) {
    throw BackendError("response lacks logprobs");
  }

  std::vector<std::string> pieces;
  std::vector<std::optional<double>> values;
  try {
    pieces = logprobs->at("tokens").get<std::vector<std::string>>();
    for (const auto& v : logprobs->at("token_logprobs")) {
      values.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
    }
  } catch (const Json::exception& e) {
    throw BackendError(std::string("malformed logprobs: ") + e.what());
  }
  if (pieces.size() != values.size()) {
    throw BackendError("tokens and token_logprobs differ in length");
  }

  // Echo responses may lead with a BOS piece that has no source text, and
  // some servers append a generated token despite max_tokens = 0.
  std::size_t first = 0;
  std::size_t last = pieces.size();
  std::vector<CharSpan> spans;
  while (true) {
    try {
      spans = align_tokens(source, std::span(pieces).subspan(first, last - first));
      break;
    } catch (const AlignmentError& e) {
      if (e.offset() == 0 && first == 0 && !values.empty() && !values[0] &&
          pieces.size() > 1) {
        first = 1;
        continue;
      }
      if (e.offset() == source.size() && last > first + 1) {
        --last;
        continue;
      }
      throw;
    }
  }

  std::vector<TokenRecord> records;
  records.reserve(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    TokenRecord r;
    r.index = i;
    r.span = spans[i];
    r.text = std::string(source.substr(spans[i].start, spans[i].length()));
    r.logprob = values[first + i];
    if (r.logprob) {
      if (!std::isfinite(*r.logprob)) throw BackendError("non-finite logprob");
      if (*r.logprob > kPositiveLogprobSlack) {
        throw BackendError("positive logprob " + std::to_string(*r.logprob));
      }
      if (*r.logprob > 0.0) r.logprob = 0.0;
    }
    records.push_back(std::move(r));
  }
  if (!records.empty() && first == 0) {
    // The first echoed token has no conditioning context.
    records.front().logprob.reset();
  }
  return records;
}

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  auto [base, path] = split_url(config_.endpoint);
  scheme_host_port_ = std::move(base);
  request_path_ = completions_path(std::move(path));
  if (scheme_host_port_.starts_with("https://")) {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    throw UsageError("this build has no TLS support; use an http:// endpoint");
#endif
  }
  if (config_.max_attempts < 1) config_.max_attempts = 1;
}

std::string HttpBackend::identity() const { return "http:" + scheme_host_port_ + request_path_; }

std::vector<TokenRecord> HttpBackend::tokenize_with_logprobs(const Snippet& snippet) {
  if (snippet.source.empty()) throw DataError("snippet " + snippet.id + ": empty source");

  Json request;
  request["model"] = config_.model;
  request["prompt"] = snippet.source;
  request["max_tokens"] = 0;
  request["echo"] = true;
  request["logprobs"] = 1;
  const std::string payload = request.dump();

  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  std::string last_error;
  auto backoff = config_.initial_backoff;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    httplib::Client client(scheme_host_port_);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
        config_.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());

    auto result = client.Post(request_path_, headers, payload, "application/json");
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
    } else if (result->status == 200) {
      try {
        return records_from_completion(snippet.source, result->body);
      } catch (const AlignmentError& e) {
        throw AlignmentError(e.offset(), "snippet " + snippet.id + ": " + e.what());
      } catch (const BackendError& e) {
        throw BackendError("snippet " + snippet.id + ": " + e.what());
      }
    } else if (result->status == 429 || result->status >= 500) {
      last_error = "HTTP " + std::to_string(result->status);
    } else {
      throw BackendError("snippet " + snippet.id + ": HTTP " +
                         std::to_string(result->status) + " from " + scheme_host_port_ +
                         request_path_ + ": " + result->body.substr(0, 200));
    }
    if (attempt < config_.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw BackendError("snippet " + snippet.id + ": backend unreachable after " +
                     std::to_string(config_.max_attempts) + " attempts (" + last_error + ")");
}

}  // namespace confusion_lens
