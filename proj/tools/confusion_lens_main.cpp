#include <iostream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "confusion_lens/error.hpp"

namespace cl = confusion_lens;
namespace cli = confusion_lens::cli;

namespace {

void add_perplexity_flags(CLI::App* cmd, cl::PerplexityOptions& options) {
  cmd->add_flag("--include-first", options.include_first,
                "Count token 0 in aggregates when it has a logprob");
  cmd->add_flag("--exclude-whitespace", options.exclude_whitespace,
                "Leave whitespace-only tokens out of aggregates");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Token-level perplexity analysis of code snippets"};
  app.require_subcommand(1);
  std::optional<std::filesystem::path> out;

  cli::PplOptions ppl;
  std::string ppl_timeout_help = "Per-request timeout in seconds";
  auto* ppl_cmd = app.add_subcommand("ppl", "Score every snippet and write perplexity profiles");
  ppl_cmd->add_option("--corpus", ppl.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  ppl_cmd->add_option("--backend", ppl.backend, "reference | file:PATH | http:URL")
      ->capture_default_str();
  ppl_cmd->add_option("--cache", ppl.cache, "Token cache JSONL (created if missing)");
  ppl_cmd->add_option("--model", ppl.model, "Model name sent to the HTTP backend")
      ->capture_default_str();
  ppl_cmd->add_option("--order", ppl.ngram_order, "Reference n-gram order")
      ->check(CLI::Range(1, 7))
      ->capture_default_str();
  ppl_cmd->add_option("--train", ppl.training, "Extra training text for the reference model")
      ->check(CLI::ExistingFile);
  ppl_cmd->add_option("--jobs", ppl.jobs, "Parallel snippets")->check(CLI::PositiveNumber)
      ->capture_default_str();
  ppl_cmd->add_option("--timeout", ppl.timeout_seconds, ppl_timeout_help)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ppl_cmd->add_option("--retries", ppl.retries, "Retries after a failed request")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ppl_cmd->add_option("--out", out, "Output file (default stdout)");
  add_perplexity_flags(ppl_cmd, ppl.perplexity);

  cli::DetectCommandOptions detect;
  std::string scale = "surprisal";
  auto* detect_cmd = app.add_subcommand("detect", "Find, expand, label and filter regions");
  detect_cmd->add_option("--profiles", detect.profiles, "Profiles JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  detect_cmd->add_option("--corpus", detect.corpus, "Corpus JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  detect_cmd->add_option("--prominence", detect.prominence, "Minimum peak prominence")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  detect_cmd->add_option("--scale", scale, "surprisal | raw_ppl | log10_ppl")
      ->check(CLI::IsMember({"surprisal", "raw_ppl", "log10_ppl"}))
      ->capture_default_str();
  detect_cmd->add_option("--gap", detect.gap, "Non-whitespace tokens allowed between merged regions")
      ->capture_default_str();
  detect_cmd->add_option("--mapping", detect.mapping, "Node kind to category JSON")
      ->check(CLI::ExistingFile);
  detect_cmd->add_option("--jobs", detect.jobs, "Parallel snippets")->check(CLI::PositiveNumber)
      ->capture_default_str();
  detect_cmd->add_flag("--keep-filtered", detect.keep_filtered,
                       "Also emit regions in filtered categories");
  detect_cmd->add_option("--out", out, "Output file (default stdout)");
  add_perplexity_flags(detect_cmd, detect.perplexity);

  cli::CompareOptions compare;
  std::string level = "snippet";
  std::string metric = "avg";
  auto* compare_cmd = app.add_subcommand("compare", "Wilcoxon signed-rank test, clean vs confusing");
  compare_cmd->add_option("--profiles", compare.profiles, "Profiles JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  compare_cmd->add_option("--corpus", compare.corpus, "Corpus JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  compare_cmd->add_option("--level", level, "snippet | aoi")
      ->check(CLI::IsMember({"snippet", "aoi"}))
      ->capture_default_str();
  compare_cmd->add_option("--metric", metric, "avg | max")
      ->check(CLI::IsMember({"avg", "max"}))
      ->capture_default_str();
  compare_cmd->add_flag("--all", compare.all, "All four level/metric combinations");
  compare_cmd->add_flag("--continuity-correction", compare.continuity_correction,
                        "Apply a 0.5 continuity correction to z");
  compare_cmd->add_option("--out", out, "Output file (default stdout)");
  add_perplexity_flags(compare_cmd, compare.perplexity);

  cli::CorrelateOptions correlate;
  std::string correlate_metric = "max";
  auto* correlate_cmd =
      app.add_subcommand("correlate", "Spearman correlation of perplexity with measurements");
  auto* regions_opt = correlate_cmd->add_option("--regions", correlate.regions, "Regions JSONL")
                          ->check(CLI::ExistingFile);
  auto* aoi_flag = correlate_cmd->add_flag("--aoi", correlate.aoi, "Correlate over annotated AOIs");
  regions_opt->excludes(aoi_flag);
  correlate_cmd->add_option("--corpus", correlate.corpus, "Corpus JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  correlate_cmd->add_option("--profiles", correlate.profiles, "Profiles JSONL (with --aoi)")
      ->check(CLI::ExistingFile);
  correlate_cmd->add_option("--measurements", correlate.measurements, "Measurements CSV")
      ->required()
      ->check(CLI::ExistingFile);
  correlate_cmd->add_option("--metric", correlate_metric, "avg | max")
      ->check(CLI::IsMember({"avg", "max"}))
      ->capture_default_str();
  correlate_cmd->add_flag("--clustered", correlate.clustered, "Snippet-clustered bootstrap CI");
  correlate_cmd->add_option("--replicates", correlate.replicates, "Bootstrap replicates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  correlate_cmd->add_option("--seed", correlate.seed, "Bootstrap seed")->capture_default_str();
  correlate_cmd->add_option("--jobs", correlate.jobs, "Bootstrap threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  correlate_cmd->add_option("--out", out, "Output file (default stdout)");
  add_perplexity_flags(correlate_cmd, correlate.perplexity);

  cli::OverlapOptions overlap;
  auto* overlap_cmd = app.add_subcommand("overlap", "Region/AOI overlap counts per variant");
  overlap_cmd->add_option("--regions", overlap.regions, "Regions JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  overlap_cmd->add_option("--corpus", overlap.corpus, "Corpus JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  overlap_cmd->add_option("--out", out, "Output file (default stdout)");

  cli::ReportOptions report;
  auto* report_cmd = app.add_subcommand("report", "Terminal heat strip of token perplexity");
  report_cmd->add_option("--profiles", report.profiles, "Profiles JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  report_cmd->add_option("--corpus", report.corpus, "Corpus JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  report_cmd->add_option("--regions", report.regions, "Regions JSONL to underline")
      ->check(CLI::ExistingFile);
  report_cmd->add_option("--snippet", report.snippet, "Only this snippet id");
  report_cmd->add_flag("--color", report.color, "ANSI background colours instead of a ramp row");
  report_cmd->add_option("--out", out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(cl::ErrorKind::usage);
  }

  cli::Diagnostics diagnostics;
  int status = 0;
  try {
    std::string text;
    if (*ppl_cmd) {
      text = cli::run_ppl(ppl, diagnostics);
    } else if (*detect_cmd) {
      detect.scale = cl::parse_detection_scale(scale);
      text = cli::run_detect(detect, diagnostics);
    } else if (*compare_cmd) {
      compare.level = cli::parse_level(level);
      compare.metric = cli::parse_metric(metric);
      text = cli::run_compare(compare, diagnostics);
    } else if (*correlate_cmd) {
      correlate.metric = cli::parse_metric(correlate_metric);
      text = cli::run_correlate(correlate, diagnostics);
    } else if (*overlap_cmd) {
      text = cli::run_overlap(overlap, diagnostics);
    } else if (*report_cmd) {
      text = cli::run_report(report, diagnostics);
    }
    cli::write_output(out, text);
    if (diagnostics.partial) status = static_cast<int>(cl::ErrorKind::data);
  } catch (const cl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    status = e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    status = static_cast<int>(cl::ErrorKind::data);
  }
  for (const auto& w : diagnostics.warnings) std::cerr << "warning: " << w << "\n";
  return status;
}
