#include "confusion_lens/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "confusion_lens/error.hpp"

namespace confusion_lens {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform integer in [0, n) by rejection, independent of the standard
// library's distribution implementation.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t range = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return static_cast<std::size_t>(draw % range);
}

double normal_two_sided(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

}  // namespace

std::vector<double> mid_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double wilcoxon_exact_p(std::size_t n, double w) {
  const std::size_t total = n * (n + 1) / 2;
  // counts[s] = number of sign patterns with W+ = s.
  std::vector<double> counts(total + 1, 0.0);
  counts[0] = 1.0;
  for (std::size_t rank = 1; rank <= n; ++rank) {
    for (std::size_t s = total; s >= rank; --s) counts[s] += counts[s - rank];
  }
  double at_or_below = 0.0;
  for (std::size_t s = 0; s <= total && static_cast<double>(s) <= w; ++s) at_or_below += counts[s];
  const double p = 2.0 * at_or_below / std::ldexp(1.0, static_cast<int>(n));
  return std::min(1.0, p);
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences,
                                    const WilcoxonOptions& options) {
  WilcoxonResult r;
  r.n_pairs = differences.size();
  std::vector<double> nonzero;
  for (const double d : differences) {
    if (!std::isfinite(d)) throw DataError("non-finite paired difference");
    if (d != 0.0) nonzero.push_back(d);
  }
  if (nonzero.empty()) throw DataError("all differences zero");
  const std::size_t n = nonzero.size();
  r.n_nonzero = n;

  std::vector<double> magnitudes(n);
  std::transform(nonzero.begin(), nonzero.end(), magnitudes.begin(),
                 [](double d) { return std::fabs(d); });
  const std::vector<double> ranks = mid_ranks(magnitudes);
  for (std::size_t i = 0; i < n; ++i) (nonzero[i] > 0 ? r.w_plus : r.w_minus) += ranks[i];
  r.w_statistic = std::min(r.w_plus, r.w_minus);

  std::map<double, std::size_t> tie_groups;
  for (const double m : magnitudes) ++tie_groups[m];
  double tie_term = 0.0;
  for (const auto& [value, t] : tie_groups) {
    if (t > 1) r.ties = true;
    const double tt = static_cast<double>(t);
    tie_term += tt * tt * tt - tt;
  }

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  double deviation = r.w_plus - mean;
  if (options.continuity_correction) {
    const double shrunk = std::max(0.0, std::fabs(deviation) - 0.5);
    deviation = deviation < 0 ? -shrunk : shrunk;
  }
  r.z = variance > 0.0 ? deviation / std::sqrt(variance) : 0.0;
  r.effect_r = r.z / std::sqrt(static_cast<double>(r.n_pairs));

  if (n <= options.exact_max_n && !r.ties) {
    r.exact = true;
    r.p_value = wilcoxon_exact_p(n, r.w_statistic);
  } else {
    r.p_value = std::min(1.0, normal_two_sided(r.z));
  }
  return r;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const PairedMetric> pairs,
                                    const WilcoxonOptions& options) {
  std::vector<double> d;
  d.reserve(pairs.size());
  for (const auto& p : pairs) d.push_back(p.confusing_value - p.clean_value);
  return wilcoxon_signed_rank(std::span<const double>(d), options);
}

std::optional<double> spearman_rho(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 3) return std::nullopt;
  const std::vector<double> rx = mid_ranks(xs);
  const std::vector<double> ry = mid_ranks(ys);
  const std::size_t n = rx.size();
  if (rx == ry) {
    if (std::all_of(rx.begin(), rx.end(), [&](double v) { return v == rx[0]; })) return std::nullopt;
    return 1.0;
  }
  const long double mean = (static_cast<long double>(n) + 1.0L) / 2.0L;
  long double sxy = 0.0L;
  long double sxx = 0.0L;
  long double syy = 0.0L;
  bool mirrored = true;
  for (std::size_t i = 0; i < n; ++i) {
    const long double dx = rx[i] - mean;
    const long double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
    mirrored = mirrored && rx[i] + ry[i] == static_cast<double>(n + 1);
  }
  if (sxx == 0.0L || syy == 0.0L) return std::nullopt;
  if (mirrored) return -1.0;
  const double rho = static_cast<double>(sxy / std::sqrt(sxx * syy));
  return std::clamp(rho, -1.0, 1.0);
}

CorrelationResult spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DataError("spearman: length mismatch");
  if (xs.size() < 3) throw DataError("spearman: need at least 3 points");
  const auto rho = spearman_rho(xs, ys);
  if (!rho) throw DataError("spearman: constant input, rho undefined");
  CorrelationResult r;
  r.rho = *rho;
  r.n = xs.size();
  if (std::fabs(r.rho) >= 1.0) {
    r.p_value = 0.0;
  } else {
    const double df = static_cast<double>(r.n) - 2.0;
    const double t = r.rho * std::sqrt(df / (1.0 - r.rho * r.rho));
    const boost::math::students_t dist(df);
    r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
  }
  return r;
}

std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t replicate) {
  return splitmix64(splitmix64(seed) ^ replicate);
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DataError("quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<std::optional<double>> bootstrap_replicates(std::span<const ClusterPoint> points,
                                                        const BootstrapOptions& options) {
  std::map<std::string, std::vector<std::size_t>> by_cluster;
  for (std::size_t i = 0; i < points.size(); ++i) by_cluster[points[i].cluster].push_back(i);
  if (by_cluster.size() < 2) throw DataError("clustered bootstrap needs at least 2 clusters");
  if (options.replicates == 0) throw UsageError("replicates must be positive");
  std::vector<const std::vector<std::size_t>*> clusters;
  for (const auto& [id, members] : by_cluster) clusters.push_back(&members);

  std::vector<std::optional<double>> out(options.replicates);
  auto run = [&](std::size_t begin, std::size_t stride) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t rep = begin; rep < options.replicates; rep += stride) {
      std::mt19937_64 rng(replicate_seed(options.seed, rep));
      xs.clear();
      ys.clear();
      for (std::size_t k = 0; k < clusters.size(); ++k) {
        for (const std::size_t i : *clusters[uniform_index(rng, clusters.size())]) {
          xs.push_back(points[i].x);
          ys.push_back(points[i].y);
        }
      }
      out[rep] = spearman_rho(xs, ys);
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, options.replicates);
  if (jobs == 1) {
    run(0, 1);
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t j = 0; j < jobs; ++j) workers.emplace_back(run, j, jobs);
  }
  return out;
}

CorrelationResult clustered_bootstrap_spearman(std::span<const ClusterPoint> points,
                                               const BootstrapOptions& options) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  CorrelationResult r = spearman(xs, ys);
  const auto reps = bootstrap_replicates(points, options);
  std::vector<double> valid;
  for (const auto& rho : reps) {
    if (rho) valid.push_back(*rho);
  }
  if (static_cast<double>(valid.size()) <
      options.min_valid_fraction * static_cast<double>(options.replicates)) {
    throw DataError("clustered bootstrap: only " + std::to_string(valid.size()) + " of " +
                    std::to_string(options.replicates) + " replicates had a defined rho");
  }
  std::sort(valid.begin(), valid.end());
  r.ci_low = quantile_sorted(valid, 0.025);
  r.ci_high = quantile_sorted(valid, 0.975);
  r.replicates = options.replicates;
  r.replicates_used = valid.size();
  r.seed = options.seed;
  return r;
}

Json to_json(const WilcoxonResult& r) {
  Json j;
  j["test"] = "wilcoxon_signed_rank";
  j["statistic"] = json_number(r.w_statistic);
  j["w_plus"] = json_number(r.w_plus);
  j["w_minus"] = json_number(r.w_minus);
  j["z"] = json_number(r.z);
  j["p"] = json_number(r.p_value);
  j["effect_r"] = json_number(r.effect_r);
  j["n"] = r.n_pairs;
  j["n_nonzero"] = r.n_nonzero;
  j["method"] = r.exact ? "exact" : "normal";
  j["ci"] = nullptr;
  j["seed"] = nullptr;
  j["replicates"] = nullptr;
  return j;
}

Json to_json(const CorrelationResult& r) {
  Json j;
  const bool bootstrapped = r.ci_low.has_value();
  j["test"] = bootstrapped ? "spearman_clustered_bootstrap" : "spearman";
  j["statistic"] = json_number(r.rho);
  j["rho"] = json_number(r.rho);
  j["z"] = nullptr;
  j["p"] = json_number(r.p_value);
  j["effect_r"] = nullptr;
  j["n"] = r.n;
  if (bootstrapped) {
    j["ci"] = Json::array({json_number(*r.ci_low), json_number(*r.ci_high)});
    j["seed"] = r.seed;
    j["replicates"] = r.replicates;
    j["replicates_used"] = r.replicates_used;
  } else {
    j["ci"] = nullptr;
    j["seed"] = nullptr;
    j["replicates"] = nullptr;
  }
  return j;
}

}  // namespace confusion_lens
