#ifndef POLYURN_STATS_HPP
#define POLYURN_STATS_HPP

// Inequality and distribution statistics over wealth vectors and traces:
// survival curves, Gini, top shares with the single-winner adjustment,
// Pareto tail fits, Spearman rank correlation, wage-adjusted returns.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "polyurn/engine.hpp"
#include "polyurn/errors.hpp"
#include "polyurn/model.hpp"

namespace polyurn {

// ---- survival curve ----

// Right-continuous step function: survival(w) is the population fraction
// with scaled wealth strictly above w, tabulated at the jump points.
struct SurvivalCurve {
    Vec thresholds; // scaled wealth values, strictly increasing
    Vec survival;   // fraction above each threshold, non-increasing
};

inline SurvivalCurve survival_curve(const Vec& wealth, double unit_scale = 10.0) {
    if (wealth.empty()) raise(errc::all_zero, "empty wealth vector");
    if (!(unit_scale > 0.0)) raise(errc::non_positive_scale, "unit scale must be positive");
    Vec scaled(wealth.size());
    for (std::size_t i = 0; i < wealth.size(); ++i) {
        if (wealth[i] < 0.0) raise(errc::negative_value, "negative wealth");
        scaled[i] = wealth[i] * unit_scale;
    }
    std::sort(scaled.begin(), scaled.end());
    SurvivalCurve curve;
    const double A = static_cast<double>(scaled.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        if (i + 1 < scaled.size() && scaled[i + 1] == scaled[i]) continue; // last of a tie run
        curve.thresholds.push_back(scaled[i]);
        curve.survival.push_back(static_cast<double>(scaled.size() - i - 1) / A);
    }
    return curve;
}

inline double survival_at(const SurvivalCurve& curve, double w) {
    const auto it = std::upper_bound(curve.thresholds.begin(), curve.thresholds.end(), w);
    if (it == curve.thresholds.begin()) return 1.0;
    return curve.survival[static_cast<std::size_t>(it - curve.thresholds.begin()) - 1];
}

// ---- Gini ----

// Sorted-rank form of the mean-absolute-difference definition; O(A log A).
inline double gini(const Vec& values) {
    if (values.empty()) raise(errc::all_zero, "empty vector");
    Vec sorted = values;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() < 0.0) raise(errc::negative_value, "gini needs nonnegative values");
    const double n = static_cast<double>(sorted.size());
    double total = 0.0, weighted = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        total += sorted[k];
        weighted += static_cast<double>(k + 1) * sorted[k];
    }
    if (!(total > 0.0)) raise(errc::all_zero, "gini undefined for an all-zero vector");
    return 2.0 * weighted / (n * total) - (n + 1.0) / n;
}

// ---- top shares ----

struct ShareRow {
    double epsilon = 0.0;
    std::size_t group = 0; // number of richest agents included
    double share = 0.0;
    double adjusted = 0.0; // share with the single richest agent removed
};

// share(eps) = wealth of the richest ceil(eps*A) agents over total wealth;
// adjusted(eps) = (share - top1)/(1 - top1) discounts the one runaway winner
// the model typically produces.
inline std::vector<ShareRow> top_shares(const Vec& wealth,
                                        const std::vector<double>& epsilons = {0.5, 0.1, 0.01,
                                                                               0.001, 0.0001}) {
    if (wealth.empty()) raise(errc::all_zero, "empty wealth vector");
    Vec sorted = wealth;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    if (sorted.back() < 0.0) raise(errc::negative_value, "negative wealth");
    const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
    if (!(total > 0.0)) raise(errc::all_zero, "no wealth to share");
    const double A = static_cast<double>(sorted.size());
    const double top1 = sorted.front() / total;

    Vec prefix(sorted.size() + 1, 0.0);
    for (std::size_t k = 0; k < sorted.size(); ++k) prefix[k + 1] = prefix[k] + sorted[k];

    std::vector<ShareRow> rows;
    rows.reserve(epsilons.size());
    for (double eps : epsilons) {
        if (!(eps > 0.0) || eps * A < 1.0)
            raise(errc::epsilon_too_small,
                  "quantile " + std::to_string(eps) + " selects less than one agent");
        if (eps > 1.0) raise(errc::epsilon_too_small, "quantile above one");
        ShareRow row;
        row.epsilon = eps;
        row.group = std::min(static_cast<std::size_t>(std::ceil(eps * A)), sorted.size());
        row.share = prefix[row.group] / total;
        row.adjusted = top1 < 1.0 ? (row.share - top1) / (1.0 - top1) : 0.0;
        rows.push_back(row);
    }
    return rows;
}

// ---- Pareto tail ----

// Least-squares slope of log-survival against log-wealth over the richest
// tail_fraction of the sample; the k-th largest value sits at survival k/A.
inline double pareto_tail_fit(const Vec& wealth, double tail_fraction) {
    if (!(tail_fraction > 0.0) || tail_fraction > 1.0)
        raise(errc::epsilon_too_small, "tail fraction must be in (0,1]");
    Vec sorted = wealth;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const std::size_t m = static_cast<std::size_t>(
        std::ceil(tail_fraction * static_cast<double>(sorted.size())));
    if (m < 20) raise(errc::tail_too_small, "tail fit needs at least 20 points, got " +
                                                std::to_string(m));
    if (!(sorted[m - 1] > 0.0)) raise(errc::negative_value, "tail values must be positive");
    if (sorted[0] == sorted[m - 1]) raise(errc::all_zero, "degenerate tail (all values equal)");
    const double A = static_cast<double>(sorted.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double x = std::log(sorted[k]);
        const double y = std::log(static_cast<double>(k + 1) / A);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(m);
    const double denom = n * sxx - sx * sx;
    if (!(denom > 0.0)) raise(errc::all_zero, "degenerate tail");
    const double slope = (n * sxy - sx * sy) / denom;
    return -slope;
}

// ---- Spearman rank correlation ----

namespace detail {

inline Vec average_ranks(const Vec& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    Vec ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

} // namespace detail

inline double rank_correlation(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) raise(errc::dimension_mismatch, "vectors must pair up");
    if (a.size() < 2) raise(errc::dimension_mismatch, "need at least two observations");
    const Vec ra = detail::average_ranks(a);
    const Vec rb = detail::average_ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (!(va > 0.0) || !(vb > 0.0))
        raise(errc::all_zero, "rank correlation undefined for constant input");
    return cov / std::sqrt(va * vb);
}

// ---- rate of return ----

struct RoRPoint {
    std::size_t agent = 0;
    double quantile = 0.0; // start-wealth quantile, poorest near 0
    double ror = 0.0;
};

// Relative gain net of wage income: (X_end - X_start - dn*r*gamma_i)/X_start.
// What remains is the return earned through wins.
inline std::vector<RoRPoint> rate_of_return(const SimulationTrace& trace,
                                            std::uint64_t start_step, std::uint64_t end_step,
                                            const ModelParams& params) {
    if (end_step <= start_step) raise(errc::negative_time, "end step must follow start step");
    const Snapshot* start = nullptr;
    const Snapshot* end = nullptr;
    for (const auto& snap : trace.snapshots) {
        if (snap.step == start_step) start = &snap;
        if (snap.step == end_step) end = &snap;
    }
    if (start == nullptr)
        raise(errc::missing_snapshot, "no snapshot at step " + std::to_string(start_step));
    if (end == nullptr)
        raise(errc::missing_snapshot, "no snapshot at step " + std::to_string(end_step));
    const std::size_t A = start->x.size();
    if (A != params.agents || end->x.size() != A)
        raise(errc::dimension_mismatch, "snapshot size does not match params");

    const double dn = static_cast<double>(end_step - start_step);
    std::vector<std::size_t> order(A);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return start->x[a] != start->x[b] ? start->x[a] < start->x[b] : a < b;
    });
    std::vector<RoRPoint> out(A);
    for (std::size_t rank = 0; rank < A; ++rank) {
        const std::size_t i = order[rank];
        if (!(start->x[i] > 0.0)) raise(errc::negative_value, "start wealth must be positive");
        RoRPoint pt;
        pt.agent = i;
        pt.quantile = (static_cast<double>(rank) + 0.5) / static_cast<double>(A);
        pt.ror = (end->x[i] - start->x[i] - dn * params.labor_share * params.gamma[i]) /
                 start->x[i];
        out[i] = pt;
    }
    return out;
}

} // namespace polyurn

#endif // POLYURN_STATS_HPP
