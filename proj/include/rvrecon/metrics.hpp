#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rvrecon {

// Per-scan comparison of a predicted against a ground-truth RV series.
struct ScanScore {
    std::string scan_id;
    double mae = 0.0;
    double mse = 0.0;
    double pearson_r = 0.0;
    double dtw = 0.0;
};

enum class Metric { mae, mse, pearson, dtw };

Metric metric_parse(const std::string& name);
std::string metric_name(Metric m);
double metric_value(const ScanScore& s, Metric m);
// Error metrics improve downward, correlation improves upward.
bool metric_lower_is_better(Metric m);

double mae(const std::vector<double>& pred, const std::vector<double>& truth);
double mse(const std::vector<double>& pred, const std::vector<double>& truth);

// Product-moment correlation. Throws if either input has (population) std
// below 1e-12.
double pearson(const std::vector<double>& pred, const std::vector<double>& truth);

// Dynamic time warping with absolute-difference local cost and steps
// {(1,0),(0,1),(1,1)}; the cost of a cell is added once per path visit and
// there is no window constraint. Returns the total cost of the best path.
double dtw(const std::vector<double>& pred, const std::vector<double>& truth);

ScanScore score_scan(const std::string& scan_id, const std::vector<double>& pred,
                     const std::vector<double>& truth);

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;  // population
};

struct ScoreAggregate {
    MetricSummary mae, mse, pearson_r, dtw;
};

ScoreAggregate aggregate(const std::vector<ScanScore>& scores);
MetricSummary aggregate_metric(const std::vector<ScanScore>& scores, Metric m);

// Two-sided sign-flip permutation test on the paired per-scan differences of
// one metric. Both score sets must cover the same scan ids. All 2^n sign
// patterns are enumerated when that is no more work than n_perm samples;
// otherwise n_perm random patterns are drawn (seeded) and the identity
// pattern is included in the count, so p >= 1/(n_perm+1).
double paired_permutation_test(const std::vector<ScanScore>& scores_a,
                               const std::vector<ScanScore>& scores_b, Metric metric,
                               std::size_t n_perm, std::uint64_t seed);

// Percent improvement of `new_mean` over `baseline_mean`: error metrics use
// 100*(baseline-new)/baseline, correlation uses 100*(new-baseline)/|baseline|.
double relative_improvement(double baseline_mean, double new_mean, Metric metric);

// Per-scan score table with a trailing '#'-prefixed summary block.
void write_score_table(const std::string& path, const std::vector<ScanScore>& scores);
std::vector<ScanScore> read_score_table(const std::string& path);

}  // namespace rvrecon
