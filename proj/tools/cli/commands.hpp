#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "confusion_lens/peaks.hpp"
#include "confusion_lens/perplexity.hpp"

namespace confusion_lens::cli {

// Non-fatal messages (skipped snippets, unmapped node kinds, ...).
struct Diagnostics {
  std::vector<std::string> warnings;
  // Set when some input was skipped; the command still produced output but
  // exits with a data error.
  bool partial = false;
  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

struct PplOptions {
  std::filesystem::path corpus;
  std::string backend = "reference";
  std::optional<std::filesystem::path> cache;
  std::string model = "default";
  int ngram_order = 3;
  std::vector<std::filesystem::path> training;  // extra training files for the reference model
  std::size_t jobs = 1;
  double timeout_seconds = 60.0;
  int retries = 2;
  PerplexityOptions perplexity;
};

struct DetectCommandOptions {
  std::filesystem::path profiles;
  std::filesystem::path corpus;
  double prominence = 0.8;
  DetectionScale scale = DetectionScale::surprisal;
  std::size_t gap = 1;
  std::optional<std::filesystem::path> mapping;
  std::size_t jobs = 1;
  bool keep_filtered = false;
  PerplexityOptions perplexity;
};

enum class Level { snippet, aoi };
enum class Metric { avg, max };

struct CompareOptions {
  std::filesystem::path profiles;
  std::filesystem::path corpus;
  Level level = Level::snippet;
  Metric metric = Metric::avg;
  bool all = false;
  bool continuity_correction = false;
  PerplexityOptions perplexity;
};

struct CorrelateOptions {
  std::optional<std::filesystem::path> regions;  // region mode
  bool aoi = false;                              // AOI mode
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> profiles;  // required in AOI mode
  std::filesystem::path measurements;
  Metric metric = Metric::max;
  bool clustered = false;
  std::size_t replicates = 10000;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  PerplexityOptions perplexity;
};

struct OverlapOptions {
  std::filesystem::path regions;
  std::filesystem::path corpus;
};

struct ReportOptions {
  std::filesystem::path profiles;
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> regions;
  std::optional<std::string> snippet;
  bool color = false;
};

Level parse_level(std::string_view text);
Metric parse_metric(std::string_view text);
std::string_view to_string(Level level);
std::string_view to_string(Metric metric);

// Each command returns its full output text. Outputs are ordered by snippet
// id and do not depend on `jobs`.
std::string run_ppl(const PplOptions& options, Diagnostics& diagnostics);
std::string run_detect(const DetectCommandOptions& options, Diagnostics& diagnostics);
std::string run_compare(const CompareOptions& options, Diagnostics& diagnostics);
std::string run_correlate(const CorrelateOptions& options, Diagnostics& diagnostics);
std::string run_overlap(const OverlapOptions& options, Diagnostics& diagnostics);
std::string run_report(const ReportOptions& options, Diagnostics& diagnostics);

// Runs fn(0..count-1) on up to `jobs` threads. The first exception (lowest
// index) is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

// Writes to `path`, or to stdout when the path is empty or "-".
void write_output(const std::optional<std::filesystem::path>& path, const std::string& text);

}  // namespace confusion_lens::cli
