#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "confusion_lens/json_format.hpp"

namespace confusion_lens {

struct PairedMetric {
  std::string pair_id;
  double clean_value = 0.0;
  double confusing_value = 0.0;
};

struct WilcoxonOptions {
  bool continuity_correction = false;
  // Exact p is used up to this many non-zero differences when |d| has no ties.
  std::size_t exact_max_n = 12;
};

struct WilcoxonResult {
  double w_statistic = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  double z = 0.0;  // signed: positive when confusing values dominate
  double p_value = 1.0;
  double effect_r = 0.0;  // z / sqrt(n_pairs)
  std::size_t n_pairs = 0;
  std::size_t n_nonzero = 0;
  bool ties = false;
  bool exact = false;
};

/// Two-sided signed-rank test on d = confusing - clean. Throws DataError
/// when every difference is zero.
WilcoxonResult wilcoxon_signed_rank(std::span<const PairedMetric> pairs,
                                    const WilcoxonOptions& options = {});
WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences,
                                    const WilcoxonOptions& options = {});

/// Exact two-sided p = min(1, 2 P(W+ <= w)) under the null with ranks 1..n.
double wilcoxon_exact_p(std::size_t n, double w);

/// 1-based ranks with ties sharing their mean rank.
std::vector<double> mid_ranks(std::span<const double> values);

struct CorrelationResult {
  double rho = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::size_t replicates = 0;
  std::size_t replicates_used = 0;
  std::uint64_t seed = 0;
};

/// Rank correlation, or nullopt when fewer than 3 points or either side is
/// constant.
std::optional<double> spearman_rho(std::span<const double> xs, std::span<const double> ys);

/// Throws DataError on length mismatch, n < 3 or constant input.
CorrelationResult spearman(std::span<const double> xs, std::span<const double> ys);

struct ClusterPoint {
  std::string cluster;
  double x = 0.0;
  double y = 0.0;
};

struct BootstrapOptions {
  std::size_t replicates = 10000;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  double min_valid_fraction = 0.95;
};

/// Spearman on all points plus a percentile 95% CI from resampling whole
/// clusters. Each replicate draws from its own generator seeded by (seed,
/// replicate index), so results do not depend on `jobs`. Throws DataError
/// for fewer than 2 clusters or too many undefined replicates.
CorrelationResult clustered_bootstrap_spearman(std::span<const ClusterPoint> points,
                                               const BootstrapOptions& options = {});

/// Replicate rhos in replicate order (nullopt where undefined).
std::vector<std::optional<double>> bootstrap_replicates(std::span<const ClusterPoint> points,
                                                        const BootstrapOptions& options);

/// Linear-interpolation quantile of sorted data (R type 7).
double quantile_sorted(std::span<const double> sorted, double q);

/// Generator seed for one bootstrap replicate.
std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t replicate);

Json to_json(const WilcoxonResult& result);
Json to_json(const CorrelationResult& result);

}  // namespace confusion_lens
