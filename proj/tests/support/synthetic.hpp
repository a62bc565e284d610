#ifndef POLYURN_TESTS_SYNTHETIC_HPP
#define POLYURN_TESTS_SYNTHETIC_HPP

// The bundled synthetic calibration inputs, constructed in code so tests and
// fixture files share one definition. The wealth sample is a fixed point of
// the model itself (beta 1.3, labor share 0.3) compressed by a power to a
// plausible inequality level; that keeps the optimal-share line smooth over
// the whole beta bracket, which arbitrary hand-drawn curves do not.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "polyurn/calibration.hpp"
#include "polyurn/dynamics.hpp"
#include "polyurn/rng.hpp"

namespace synthetic {

inline polyurn::WageBinTable wage_bins() {
    polyurn::WageBinTable t;
    const double inf = std::numeric_limits<double>::infinity();
    t.bins = {
        {0.0, 10000.0, 352.0},     {10000.0, 20000.0, 611.0}, {20000.0, 30000.0, 489.0},
        {30000.0, 45000.0, 305.0}, {45000.0, 70000.0, 141.0}, {70000.0, inf, 38.0},
    };
    return t;
}

inline polyurn::Vec gamma(std::size_t A = 100) {
    polyurn::Rng rng(555);
    return polyurn::apply_saving_weights(polyurn::sample_raw_wages(wage_bins(), A, rng));
}

inline polyurn::Vec wealth_shares(std::size_t A = 100) {
    polyurn::ModelParams p;
    p.agents = A;
    p.labor_share = 0.3;
    p.gamma = gamma(A);
    p.feedback.beta = 1.3;
    p.feedback.alpha.assign(A, 1.0);
    const auto fp = polyurn::find_fixed_point(
        polyurn::SharePoint{polyurn::Vec(A, 1.0 / static_cast<double>(A))}, p, 1e-12);
    polyurn::Vec x = fp.point;
    double s = 0.0;
    for (auto& v : x) {
        v = std::pow(v, 0.75);
        s += v;
    }
    for (auto& v : x) v /= s;
    return x;
}

constexpr double kMeanWealthEur = 227567.0;

// Empirical cdf of the scaled sample, one row per agent at level (k+1/2)/A,
// so quantile sampling reproduces the shares exactly.
inline std::vector<polyurn::CdfPoint> wealth_curve(std::size_t A = 100) {
    const polyurn::Vec x = wealth_shares(A);
    std::vector<polyurn::CdfPoint> curve(A);
    for (std::size_t k = 0; k < A; ++k) {
        curve[k].wealth_eur = x[k] * kMeanWealthEur * static_cast<double>(A);
        curve[k].cdf = (static_cast<double>(k) + 0.5) / static_cast<double>(A);
    }
    return curve;
}

inline polyurn::CalibrationTarget target(std::size_t A = 100) {
    const auto wealth = polyurn::wealth_quantile_sample(wealth_curve(A), A);
    return polyurn::make_calibration_target(wealth, gamma(A), polyurn::Coupling::correlated);
}

inline polyurn::MacroSeries macro_series() {
    // labor-share estimates land between 0.20 and 0.30 except the flagged
    // crisis year 2020
    return {
        {2012, 29000.0, 0.096, 151000.0}, {2013, 29800.0, 0.095, 162100.0},
        {2014, 30700.0, 0.098, 174000.0}, {2015, 31500.0, 0.101, 186600.0},
        {2016, 32400.0, 0.099, 199500.0}, {2017, 33200.0, 0.102, 212600.0},
        {2018, 34100.0, 0.105, 226000.0}, {2019, 35000.0, 0.108, 240700.0},
        {2020, 35300.0, 0.161, 245800.0}, {2021, 36200.0, 0.150, 264900.0},
    };
}

} // namespace synthetic

#endif
