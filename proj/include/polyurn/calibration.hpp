#ifndef POLYURN_CALIBRATION_HPP
#define POLYURN_CALIBRATION_HPP

// Parameter construction from data: wage vectors with rank-based saving
// weights, labor share from macro aggregates, the closed-form optimal r for
// a given beta, and 1-D / 2-D feedback fits against an empirical wealth
// sample.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "polyurn/errors.hpp"
#include "polyurn/model.hpp"
#include "polyurn/rng.hpp"

namespace polyurn {

// ---- wage bins ----

struct WageBin {
    double lower_eur = 0.0;
    double upper_eur = 0.0; // infinity marks the open top bin
    double count = 0.0;
};

struct WageBinTable {
    std::vector<WageBin> bins;
    // mean excess over the open bin's lower bound; <= 0 requests the default
    // (half the lower bound, so the open-bin mean is 1.5x its lower bound)
    double tail_mean_excess = 0.0;
};

inline void validate_bins(const WageBinTable& table) {
    if (table.bins.empty()) raise(errc::empty_table, "no wage bins");
    double prev_upper = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < table.bins.size(); ++k) {
        const auto& b = table.bins[k];
        if (!(b.count > 0.0)) raise(errc::invalid_bins, "bin count must be positive");
        if (!(b.lower_eur >= 0.0)) raise(errc::invalid_bins, "bin lower bound must be nonnegative");
        if (b.lower_eur < prev_upper)
            raise(errc::invalid_bins, "bins must be disjoint and increasing");
        const bool open = std::isinf(b.upper_eur);
        if (open && k + 1 != table.bins.size())
            raise(errc::invalid_bins, "only the top bin may be open");
        if (!open && !(b.upper_eur > b.lower_eur))
            raise(errc::invalid_bins, "bin upper bound must exceed lower bound");
        prev_upper = b.upper_eur;
    }
}

// A independent wage draws: bins by relative count, uniform inside a closed
// bin, exponential excess above the open bin. Exact ties (possible only
// through rounding) get a relative nudge so ranks are unambiguous.
inline Vec sample_raw_wages(const WageBinTable& table, std::size_t A, Rng& rng) {
    validate_bins(table);
    std::vector<double> cum(table.bins.size());
    double total = 0.0;
    for (std::size_t k = 0; k < table.bins.size(); ++k) {
        total += table.bins[k].count;
        cum[k] = total;
    }
    Vec wages(A);
    for (auto& w : wages) {
        const double u = rng.uniform01() * total;
        std::size_t k = static_cast<std::size_t>(
            std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
        if (k >= table.bins.size()) k = table.bins.size() - 1;
        const auto& b = table.bins[k];
        if (std::isinf(b.upper_eur)) {
            const double excess =
                table.tail_mean_excess > 0.0 ? table.tail_mean_excess : 0.5 * b.lower_eur;
            w = b.lower_eur + rng.exponential(excess);
        } else {
            w = b.lower_eur + (b.upper_eur - b.lower_eur) * rng.uniform01();
        }
    }
    std::vector<std::size_t> order(A);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return wages[a] < wages[b]; });
    for (std::size_t k = 1; k < A; ++k)
        if (wages[order[k]] <= wages[order[k - 1]])
            wages[order[k]] = wages[order[k - 1]] * (1.0 + 1e-9);
    return wages;
}

// gamma_i = rank * wage / normalization on the sorted sample; the saving
// fraction rises linearly with rank, so the poorest wage carries weight 1/A
// and the richest weight 1.
inline Vec apply_saving_weights(const Vec& raw_wages) {
    if (raw_wages.empty()) raise(errc::empty_table, "no wages");
    Vec sorted = raw_wages;
    std::sort(sorted.begin(), sorted.end());
    if (!(sorted.front() > 0.0)) raise(errc::non_positive_wage, "wages must be positive");
    double norm = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        sorted[i] *= static_cast<double>(i + 1);
        norm += sorted[i];
    }
    for (auto& g : sorted) g /= norm;
    return sorted;
}

// ---- macro series ----

struct MacroYear {
    int year = 0;
    double avg_net_wage_eur = 0.0;
    double saving_rate = 0.0;
    double avg_wealth_eur = 0.0;
};

using MacroSeries = std::vector<MacroYear>;

inline void validate_macro(const MacroSeries& series) {
    if (series.empty()) raise(errc::empty_table, "empty macro series");
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& y = series[k];
        if (!(y.avg_wealth_eur > 0.0))
            raise(errc::missing_field, "wealth must be positive in " + std::to_string(y.year));
        if (y.saving_rate < 0.0 || y.saving_rate > 1.0)
            raise(errc::missing_field, "saving rate outside [0,1] in " + std::to_string(y.year));
        if (y.avg_net_wage_eur < 0.0)
            raise(errc::missing_field, "negative wage in " + std::to_string(y.year));
        if (k > 0 && series[k].year <= series[k - 1].year)
            raise(errc::missing_field, "years must increase");
    }
}

struct LaborShareEstimate {
    int year = 0;
    double value = 0.0;
    bool flagged = false; // r > 1, typical of crisis years with flat wealth
};

// r(year) = wage * saving rate / wealth increase over the previous year.
inline LaborShareEstimate estimate_labor_share(const MacroSeries& series, int year) {
    validate_macro(series);
    const MacroYear* cur = nullptr;
    const MacroYear* prev = nullptr;
    for (const auto& y : series) {
        if (y.year == year) cur = &y;
        if (y.year == year - 1) prev = &y;
    }
    if (cur == nullptr || prev == nullptr)
        raise(errc::missing_field, "need years " + std::to_string(year - 1) + " and " +
                                       std::to_string(year) + " in the series");
    const double increase = cur->avg_wealth_eur - prev->avg_wealth_eur;
    if (!(increase > 0.0))
        raise(errc::wealth_decrease, "no wealth increase in " + std::to_string(year));
    LaborShareEstimate est;
    est.year = year;
    est.value = cur->avg_net_wage_eur * cur->saving_rate / increase;
    est.flagged = est.value > 1.0;
    return est;
}

inline std::vector<LaborShareEstimate> estimate_labor_share_series(const MacroSeries& series) {
    validate_macro(series);
    std::vector<LaborShareEstimate> out;
    for (std::size_t k = 1; k < series.size(); ++k) {
        if (series[k].year != series[k - 1].year + 1) continue;
        const double increase = series[k].avg_wealth_eur - series[k - 1].avg_wealth_eur;
        if (!(increase > 0.0)) continue; // undefined for that year
        LaborShareEstimate est;
        est.year = series[k].year;
        est.value = series[k].avg_net_wage_eur * series[k].saving_rate / increase;
        est.flagged = est.value > 1.0;
        out.push_back(est);
    }
    return out;
}

// ---- empirical wealth sample ----

struct CdfPoint {
    double wealth_eur = 0.0;
    double cdf = 0.0;
};

inline void validate_cdf(const std::vector<CdfPoint>& curve) {
    if (curve.size() < 2) raise(errc::invalid_cdf, "need at least two cdf points");
    for (std::size_t k = 0; k < curve.size(); ++k) {
        if (!(curve[k].wealth_eur > 0.0)) raise(errc::invalid_cdf, "wealth must be positive");
        if (!(curve[k].cdf > 0.0) || curve[k].cdf > 1.0)
            raise(errc::invalid_cdf, "cdf values must lie in (0,1]");
        if (k > 0 && (curve[k].cdf <= curve[k - 1].cdf ||
                      curve[k].wealth_eur <= curve[k - 1].wealth_eur))
            raise(errc::invalid_cdf, "cdf must be strictly increasing");
    }
}

// Wealth quantiles at levels (k - 1/2)/A, interpolating linearly in
// log-wealth between tabulated cdf points and clamping beyond the table.
inline Vec wealth_quantile_sample(const std::vector<CdfPoint>& curve, std::size_t A) {
    validate_cdf(curve);
    Vec sample(A);
    for (std::size_t k = 0; k < A; ++k) {
        const double q = (static_cast<double>(k) + 0.5) / static_cast<double>(A);
        if (q <= curve.front().cdf) {
            sample[k] = curve.front().wealth_eur;
            continue;
        }
        if (q >= curve.back().cdf) {
            sample[k] = curve.back().wealth_eur;
            continue;
        }
        std::size_t j = 1;
        while (curve[j].cdf < q) ++j;
        const double t = (q - curve[j - 1].cdf) / (curve[j].cdf - curve[j - 1].cdf);
        sample[k] = std::exp((1.0 - t) * std::log(curve[j - 1].wealth_eur) +
                             t * std::log(curve[j].wealth_eur));
    }
    return sample;
}

// ---- calibration target ----

enum class Coupling { correlated, independent };

inline const char* coupling_name(Coupling c) {
    return c == Coupling::correlated ? "correlated" : "independent";
}

// Wealth sample and wage vector, already aligned agent by agent.
struct CalibrationTarget {
    Vec x;     // normalized wealth shares, increasing
    Vec gamma; // wage shares, aligned per the coupling
    Coupling coupling = Coupling::correlated;
};

// Correlated coupling pairs sorted wealth with sorted wages rank by rank;
// independent coupling shuffles the wage side with a seeded permutation.
inline CalibrationTarget make_calibration_target(Vec wealth, Vec gamma, Coupling coupling,
                                                 std::uint64_t seed = 2024) {
    if (wealth.size() != gamma.size() || wealth.size() < 2)
        raise(errc::dimension_mismatch, "wealth and wage samples must pair up");
    std::sort(wealth.begin(), wealth.end());
    std::sort(gamma.begin(), gamma.end());
    double wsum = 0.0, gsum = 0.0;
    for (double w : wealth) {
        if (!(w > 0.0)) raise(errc::all_zero, "wealth sample must be positive");
        wsum += w;
    }
    for (double g : gamma) {
        if (!(g > 0.0)) raise(errc::non_positive_wage, "wage sample must be positive");
        gsum += g;
    }
    CalibrationTarget target;
    target.coupling = coupling;
    target.x = std::move(wealth);
    for (auto& w : target.x) w /= wsum;
    target.gamma = std::move(gamma);
    for (auto& g : target.gamma) g /= gsum;
    if (coupling == Coupling::independent) {
        Rng rng(seed);
        for (std::size_t k = target.gamma.size() - 1; k > 0; --k)
            std::swap(target.gamma[k], target.gamma[rng.uniform_index(k + 1)]);
    }
    return target;
}

inline ModelParams target_params(const CalibrationTarget& target, double r, double beta,
                                 const Vec& alpha) {
    ModelParams p;
    p.agents = target.x.size();
    p.labor_share = r;
    p.gamma = target.gamma;
    p.feedback.beta = beta;
    p.feedback.alpha = alpha;
    validate_params(p);
    return p;
}

// ---- optimal labor share ----

// Minimizes ||(1-r)(p(x)-x) + r(gamma-x)|| over r; the quadratic vertex is
// <p-x, p-gamma> / ||p-gamma||^2, clamped to [0,1].
inline double optimal_r_for_beta(const Vec& x, const Vec& gamma, const FeedbackSpec& feedback) {
    if (x.size() != gamma.size()) raise(errc::dimension_mismatch, "x and gamma sizes differ");
    const Vec prob = choice_probabilities(x, feedback);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = prob[i] - gamma[i];
        num += (prob[i] - x[i]) * d;
        den += d * d;
    }
    if (!(den > 0.0))
        raise(errc::degenerate_direction, "choice probabilities already equal the wage vector");
    return std::clamp(num / den, 0.0, 1.0);
}

inline double field_norm_at(const CalibrationTarget& target, double r, double beta,
                            const Vec& alpha) {
    const auto p = target_params(target, r, beta, alpha);
    const Vec g = field_g(target.x, p);
    double s = 0.0;
    for (double v : g) s += v * v;
    return std::sqrt(s);
}

// ---- r-beta line ----

struct RBPoint {
    double beta = 0.0;
    double r_star = 0.0;
    double g_norm = 0.0;
};

inline std::vector<RBPoint> r_beta_line(const CalibrationTarget& target,
                                        const std::vector<double>& beta_grid) {
    if (beta_grid.empty()) raise(errc::empty_table, "empty beta grid");
    const Vec alpha(target.x.size(), 1.0);
    std::vector<RBPoint> line;
    line.reserve(beta_grid.size());
    for (double beta : beta_grid) {
        RBPoint pt;
        pt.beta = beta;
        pt.r_star = optimal_r_for_beta(target.x, target.gamma, FeedbackSpec{beta, alpha});
        pt.g_norm = field_norm_at(target, pt.r_star, beta, alpha);
        line.push_back(pt);
    }
    return line;
}

// ---- 1-D beta fit ----

struct BetaFit {
    double beta = 0.0;
    double g_norm = 0.0;
};

// Golden-section search for the beta minimizing ||G(x)|| at fixed r. A
// coarse pre-scan locates the basin; a minimum stuck at the bracket edge
// means the objective is monotone there and the fit is meaningless.
inline BetaFit fit_beta(const CalibrationTarget& target, double r, double beta_lo = 0.5,
                        double beta_hi = 3.0, double tol = 1e-6) {
    if (!(beta_hi > beta_lo)) raise(errc::unknown_kind, "empty beta bracket");
    double gap = 0.0;
    for (std::size_t i = 0; i < target.x.size(); ++i)
        gap = std::max(gap, std::abs(target.x[i] - target.gamma[i]));
    if (gap < 1e-14)
        raise(errc::degenerate_target, "wealth target equals the wage vector");

    const Vec alpha(target.x.size(), 1.0);
    auto f = [&](double beta) { return field_norm_at(target, r, beta, alpha); };

    const std::size_t coarse = 64;
    double best = f(beta_lo);
    std::size_t best_k = 0;
    for (std::size_t k = 1; k <= coarse; ++k) {
        const double beta =
            beta_lo + (beta_hi - beta_lo) * static_cast<double>(k) / static_cast<double>(coarse);
        const double v = f(beta);
        if (v < best) {
            best = v;
            best_k = k;
        }
    }
    if (best_k == 0 || best_k == coarse)
        raise(errc::no_interior_minimum, "field norm is monotone over the beta bracket");
    const double h = (beta_hi - beta_lo) / static_cast<double>(coarse);
    double a = beta_lo + h * static_cast<double>(best_k - 1);
    double b = beta_lo + h * static_cast<double>(best_k + 1);

    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    BetaFit fit;
    fit.beta = 0.5 * (a + b);
    fit.g_norm = f(fit.beta);
    return fit;
}

// ---- skill vectors ----

// alpha_i = gamma_i^c; c tunes how strongly skill follows the wage.
inline Vec skill_vector(const Vec& gamma, double c) {
    if (c < 0.0) raise(errc::negative_skill_exponent, "skill exponent must be nonnegative");
    Vec alpha(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        if (gamma[i] <= 0.0 && c > 0.0)
            raise(errc::zero_wage_with_positive_c, "zero wage cannot carry positive skill");
        alpha[i] = c == 0.0 ? 1.0 : std::pow(gamma[i], c);
    }
    return alpha;
}

// ---- 2-D scan ----

struct BetaCScan {
    std::vector<double> beta_grid;
    std::vector<double> c_grid;
    std::vector<double> norms; // row-major: norms[i*beta_grid.size()+j] for (c_i, beta_j)
    double best_beta = 0.0;
    double best_c = 0.0;
    double best_norm = 0.0;
};

inline BetaCScan scan_beta_c(const CalibrationTarget& target, double r,
                             const std::vector<double>& beta_grid,
                             const std::vector<double>& c_grid) {
    if (beta_grid.empty() || c_grid.empty()) raise(errc::empty_table, "empty scan grid");
    BetaCScan scan;
    scan.beta_grid = beta_grid;
    scan.c_grid = c_grid;
    scan.norms.resize(beta_grid.size() * c_grid.size());
    scan.best_norm = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c_grid.size(); ++i) {
        const Vec alpha = skill_vector(target.gamma, c_grid[i]);
        for (std::size_t j = 0; j < beta_grid.size(); ++j) {
            const double v = field_norm_at(target, r, beta_grid[j], alpha);
            scan.norms[i * beta_grid.size() + j] = v;
            if (v < scan.best_norm) {
                scan.best_norm = v;
                scan.best_beta = beta_grid[j];
                scan.best_c = c_grid[i];
            }
        }
    }
    return scan;
}

} // namespace polyurn

#endif // POLYURN_CALIBRATION_HPP
