#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "qselect/attack.hpp"
#include "qselect/errors.hpp"

namespace qselect {

/// Table-row aggregate over one attack run.
struct AggregateReport {
    double original_acc = 0.0;  // percentage
    double attack_acc = 0.0;    // percentage
    double avg_queries = 0.0;
    std::optional<double> avg_queries_success;  // absent when nothing succeeded
    std::size_t n_examples = 0;
    std::size_t n_success = 0;
};

/// Attack success rate: relative accuracy degradation.
inline double asr(double original_acc, double attack_acc) {
    if (original_acc <= 0.0) throw ZeroOriginalAccuracyError("original accuracy is zero");
    return (original_acc - attack_acc) / original_acc;
}

/// Tradeoff score between the two selectors: ASR_Diff + Query_Diff.
inline double edr(double asr_greedy, double asr_binary, double queries_greedy,
                  double queries_binary) {
    if (asr_greedy == 0.0) throw DivisionByZeroError("greedy ASR is zero");
    if (queries_greedy == 0.0) throw DivisionByZeroError("greedy query count is zero");
    double asr_diff = (asr_binary - asr_greedy) / asr_greedy;
    double query_diff = (queries_greedy - queries_binary) / queries_greedy;
    return asr_diff + query_diff;
}

inline AggregateReport aggregate(const std::vector<AttackOutcome>& outcomes,
                                 const std::vector<std::size_t>& gold) {
    if (outcomes.empty() || outcomes.size() != gold.size())
        throw EmptyRunError("aggregate needs equal-length, non-empty inputs");
    AggregateReport report;
    report.n_examples = outcomes.size();
    std::size_t orig_correct = 0;
    std::size_t final_correct = 0;
    std::size_t total_queries = 0;
    std::size_t success_queries = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const AttackOutcome& o = outcomes[i];
        if (o.original_label == gold[i]) ++orig_correct;
        if (o.final_label == gold[i]) ++final_correct;
        total_queries += o.queries.total();
        if (o.success) {
            ++report.n_success;
            success_queries += o.queries.total();
        }
    }
    double n = static_cast<double>(report.n_examples);
    report.original_acc = 100.0 * static_cast<double>(orig_correct) / n;
    report.attack_acc = 100.0 * static_cast<double>(final_correct) / n;
    report.avg_queries = static_cast<double>(total_queries) / n;
    if (report.n_success > 0)
        report.avg_queries_success =
            static_cast<double>(success_queries) / static_cast<double>(report.n_success);
    return report;
}

/// Agreement between a reference (GS) top-10 and another method's top-10.
struct AgreementStats {
    double first_gs_position_mean = 0.0;    // 1-based rank, NotFound excluded
    double first_gs_position_median = 0.0;  // lower central value on even counts
    std::size_t not_found = 0;
    double overlap_mean = 0.0;
    double overlap_median = 0.0;
    std::size_t none_overlap = 0;
};

namespace detail {

inline double lower_median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

}  // namespace detail

inline AgreementStats agreement_stats(
    const std::vector<std::vector<std::size_t>>& gs_top10,
    const std::vector<std::vector<std::size_t>>& other_top10) {
    AgreementStats stats;
    std::vector<double> first_ranks;
    std::vector<double> overlaps;
    for (std::size_t i = 0; i < gs_top10.size(); ++i) {
        const auto& gs = gs_top10[i];
        const auto& other = other_top10[i];
        if (!gs.empty()) {
            auto it = std::find(other.begin(), other.end(), gs.front());
            if (it == other.end())
                ++stats.not_found;
            else
                first_ranks.push_back(static_cast<double>(it - other.begin()) + 1.0);
        }
        std::size_t overlap = 0;
        for (std::size_t p : other)
            if (std::find(gs.begin(), gs.end(), p) != gs.end()) ++overlap;
        overlaps.push_back(static_cast<double>(overlap));
        if (overlap == 0) ++stats.none_overlap;
    }
    if (!first_ranks.empty()) {
        double sum = 0.0;
        for (double r : first_ranks) sum += r;
        stats.first_gs_position_mean = sum / static_cast<double>(first_ranks.size());
        stats.first_gs_position_median = detail::lower_median(first_ranks);
    }
    if (!overlaps.empty()) {
        double sum = 0.0;
        for (double o : overlaps) sum += o;
        stats.overlap_mean = sum / static_cast<double>(overlaps.size());
        stats.overlap_median = detail::lower_median(overlaps);
    }
    return stats;
}

namespace detail {

// r^2 of an ordinary least-squares fit y = a + b*x.
inline double ols_r2(const std::vector<double>& x, const std::vector<double>& y) {
    double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    double b = (n * sxy - sx * sy) / denom;
    double a = (sy - b * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    double mean_y = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double fit = a + b * x[i];
        ss_res += (y[i] - fit) * (y[i] - fit);
        ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
    }
    if (ss_tot == 0.0) return 1.0;
    return 1.0 - ss_res / ss_tot;
}

}  // namespace detail

/// Least-squares fit of query counts against n and against log2(n); returns
/// (r2_linear, r2_log).
inline std::pair<double, double> fit_query_trend(
    const std::vector<std::pair<std::size_t, std::size_t>>& samples) {
    if (samples.size() < 3) throw DegenerateSamplesError("need at least 3 samples");
    std::vector<double> n_values, log_values, queries;
    for (const auto& [n, q] : samples) {
        n_values.push_back(static_cast<double>(n));
        log_values.push_back(std::log2(static_cast<double>(n)));
        queries.push_back(static_cast<double>(q));
    }
    std::size_t distinct =
        std::set<double>(n_values.begin(), n_values.end()).size();
    if (distinct < 2) throw DegenerateSamplesError("need at least 2 distinct lengths");
    return {detail::ols_r2(n_values, queries), detail::ols_r2(log_values, queries)};
}

}  // namespace qselect
