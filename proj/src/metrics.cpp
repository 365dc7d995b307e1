#include "rvrecon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace rvrecon {

namespace {

void require_same_length(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("metric over an empty range");
    if (a.size() != b.size())
        throw std::invalid_argument("length mismatch: " + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()));
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Metric metric_parse(const std::string& name) {
    if (name == "mae") return Metric::mae;
    if (name == "mse") return Metric::mse;
    if (name == "pearson" || name == "pearson_r") return Metric::pearson;
    if (name == "dtw") return Metric::dtw;
    throw std::invalid_argument("unknown metric '" + name + "' (expected mae, mse, pearson or dtw)");
}

std::string metric_name(Metric m) {
    switch (m) {
        case Metric::mae: return "mae";
        case Metric::mse: return "mse";
        case Metric::pearson: return "pearson_r";
        case Metric::dtw: return "dtw";
    }
    return "?";
}

double metric_value(const ScanScore& s, Metric m) {
    switch (m) {
        case Metric::mae: return s.mae;
        case Metric::mse: return s.mse;
        case Metric::pearson: return s.pearson_r;
        case Metric::dtw: return s.dtw;
    }
    return 0.0;
}

bool metric_lower_is_better(Metric m) { return m != Metric::pearson; }

double mae(const std::vector<double>& pred, const std::vector<double>& truth) {
    require_same_length(pred, truth);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - truth[i]);
    return acc / static_cast<double>(pred.size());
}

double mse(const std::vector<double>& pred, const std::vector<double>& truth) {
    require_same_length(pred, truth);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

double pearson(const std::vector<double>& pred, const std::vector<double>& truth) {
    require_same_length(pred, truth);
    const double n = static_cast<double>(pred.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        ma += pred[i];
        mb += truth[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double da = pred[i] - ma;
        const double db = truth[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    const double sda = std::sqrt(saa / n);
    const double sdb = std::sqrt(sbb / n);
    if (sda <= 1e-12 || sdb <= 1e-12)
        throw std::runtime_error("pearson: zero-variance input");
    return sab / std::sqrt(saa * sbb);
}

double dtw(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.empty() || truth.empty()) throw std::invalid_argument("dtw: empty input");
    const std::size_t n = pred.size(), m = truth.size();
    // Rolling single row keeps the DP at O(min area) memory.
    std::vector<double> prev(m), cur(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double c = std::abs(pred[0] - truth[j]);
        prev[j] = c + (j > 0 ? prev[j - 1] : 0.0);
    }
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double c = std::abs(pred[i] - truth[j]);
            double best = prev[j];  // (1,0)
            if (j > 0) {
                best = std::min(best, cur[j - 1]);   // (0,1)
                best = std::min(best, prev[j - 1]);  // (1,1)
            }
            cur[j] = c + best;
        }
        std::swap(prev, cur);
    }
    return prev[m - 1];
}

ScanScore score_scan(const std::string& scan_id, const std::vector<double>& pred,
                     const std::vector<double>& truth) {
    ScanScore s;
    s.scan_id = scan_id;
    s.mae = mae(pred, truth);
    s.mse = mse(pred, truth);
    s.pearson_r = pearson(pred, truth);
    s.dtw = dtw(pred, truth);
    return s;
}

MetricSummary aggregate_metric(const std::vector<ScanScore>& scores, Metric m) {
    if (scores.empty()) throw std::invalid_argument("aggregate: no scores");
    const double n = static_cast<double>(scores.size());
    MetricSummary out;
    for (const auto& s : scores) out.mean += metric_value(s, m);
    out.mean /= n;
    for (const auto& s : scores) {
        const double d = metric_value(s, m) - out.mean;
        out.stddev += d * d;
    }
    out.stddev = std::sqrt(out.stddev / n);
    return out;
}

ScoreAggregate aggregate(const std::vector<ScanScore>& scores) {
    return ScoreAggregate{aggregate_metric(scores, Metric::mae), aggregate_metric(scores, Metric::mse),
                          aggregate_metric(scores, Metric::pearson), aggregate_metric(scores, Metric::dtw)};
}

double paired_permutation_test(const std::vector<ScanScore>& scores_a,
                               const std::vector<ScanScore>& scores_b, Metric metric,
                               std::size_t n_perm, std::uint64_t seed) {
    if (n_perm < 1) throw std::invalid_argument("paired_permutation_test: n_perm must be >= 1");

    std::map<std::string, double> by_id_a, by_id_b;
    for (const auto& s : scores_a) by_id_a[s.scan_id] = metric_value(s, metric);
    for (const auto& s : scores_b) by_id_b[s.scan_id] = metric_value(s, metric);
    if (by_id_a.size() != by_id_b.size() || by_id_a.empty())
        throw std::invalid_argument("paired_permutation_test: score sets differ in size");

    std::vector<double> diffs;
    std::string missing;
    for (const auto& [id, va] : by_id_a) {
        auto it = by_id_b.find(id);
        if (it == by_id_b.end()) {
            missing += (missing.empty() ? "" : ", ") + id;
            continue;
        }
        diffs.push_back(va - it->second);
    }
    if (!missing.empty())
        throw std::invalid_argument("paired_permutation_test: scans only in one set: " + missing);

    const std::size_t n = diffs.size();
    double t_obs = 0.0;
    for (double d : diffs) t_obs += d;
    t_obs = std::abs(t_obs) / static_cast<double>(n);
    // Tolerance for resummation noise when comparing permuted statistics.
    const double eps = 1e-12 * (t_obs + 1.0);

    const bool exhaustive = n < 63 && (1ull << n) <= n_perm;
    if (exhaustive) {
        const std::uint64_t total = 1ull << n;
        std::uint64_t count = 0;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            double t = 0.0;
            for (std::size_t i = 0; i < n; ++i) t += (mask >> i) & 1 ? -diffs[i] : diffs[i];
            if (std::abs(t) / static_cast<double>(n) >= t_obs - eps) ++count;
        }
        return static_cast<double>(count) / static_cast<double>(total);
    }

    std::mt19937_64 rng(seed);
    std::size_t count = 0;
    for (std::size_t p = 0; p < n_perm; ++p) {
        double t = 0.0;
        std::uint64_t bits = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i % 64 == 0) bits = rng();
            t += (bits >> (i % 64)) & 1 ? -diffs[i] : diffs[i];
        }
        if (std::abs(t) / static_cast<double>(n) >= t_obs - eps) ++count;
    }
    // The identity permutation always matches and enters both counts.
    return static_cast<double>(count + 1) / static_cast<double>(n_perm + 1);
}

double relative_improvement(double baseline_mean, double new_mean, Metric metric) {
    if (baseline_mean == 0.0) throw std::invalid_argument("relative_improvement: zero baseline");
    if (metric == Metric::pearson)
        return 100.0 * (new_mean - baseline_mean) / std::abs(baseline_mean);
    return 100.0 * (baseline_mean - new_mean) / baseline_mean;
}

void write_score_table(const std::string& path, const std::vector<ScanScore>& scores) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "scan_id,mae,mse,pearson_r,dtw\n";
    for (const auto& s : scores)
        out << s.scan_id << "," << fmt17(s.mae) << "," << fmt17(s.mse) << "," << fmt17(s.pearson_r)
            << "," << fmt17(s.dtw) << "\n";
    out << "# summary,metric,mean,std\n";
    for (Metric m : {Metric::mae, Metric::mse, Metric::pearson, Metric::dtw}) {
        const MetricSummary ms = aggregate_metric(scores, m);
        out << "# summary," << metric_name(m) << "," << fmt17(ms.mean) << "," << fmt17(ms.stddev) << "\n";
    }
}

std::vector<ScanScore> read_score_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<ScanScore> scores;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("scan_id,", 0) == 0) continue;
        std::istringstream cells(line);
        std::string id, f1, f2, f3, f4;
        if (!std::getline(cells, id, ',') || !std::getline(cells, f1, ',') ||
            !std::getline(cells, f2, ',') || !std::getline(cells, f3, ',') || !std::getline(cells, f4))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed score row");
        ScanScore s;
        s.scan_id = id;
        s.mae = std::stod(f1);
        s.mse = std::stod(f2);
        s.pearson_r = std::stod(f3);
        s.dtw = std::stod(f4);
        scores.push_back(s);
    }
    if (scores.empty()) throw std::runtime_error(path + ": no score rows");
    return scores;
}

}  // namespace rvrecon
