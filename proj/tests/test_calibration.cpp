#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "polyurn/calibration.hpp"
#include "polyurn/dynamics.hpp"
#include "polyurn/model.hpp"
#include "polyurn/rng.hpp"
#include "support/synthetic.hpp"

using namespace polyurn;

namespace {

auto code_is(errc c) {
    return Catch::Matchers::Predicate<error>([c](const error& e) { return e.code() == c; });
}

const double kInf = std::numeric_limits<double>::infinity();

} // namespace

TEST_CASE("wage bin tables reject malformed input", "[calibration]") {
    Rng rng(1);
    CHECK_THROWS_MATCHES(sample_raw_wages(WageBinTable{}, 5, rng), error,
                         code_is(errc::empty_table));
    CHECK_THROWS_MATCHES(sample_raw_wages({{{0.0, 10.0, 0.0}}, 0.0}, 5, rng), error,
                         code_is(errc::invalid_bins));
    CHECK_THROWS_MATCHES(sample_raw_wages({{{0.0, 10.0, 5.0}, {8.0, 20.0, 5.0}}, 0.0}, 5, rng),
                         error, code_is(errc::invalid_bins));
    CHECK_THROWS_MATCHES(sample_raw_wages({{{0.0, kInf, 5.0}, {10.0, 20.0, 5.0}}, 0.0}, 5, rng),
                         error, code_is(errc::invalid_bins));
    CHECK_THROWS_MATCHES(sample_raw_wages({{{10.0, 10.0, 5.0}}, 0.0}, 5, rng), error,
                         code_is(errc::invalid_bins));
}

TEST_CASE("wage draws respect bin boundaries and weights", "[calibration]") {
    Rng rng(77);

    WageBinTable single;
    single.bins = {{10.0, 20.0, 3.0}};
    const Vec inside = sample_raw_wages(single, 500, rng);
    for (double w : inside) {
        CHECK(w >= 10.0);
        CHECK(w < 20.0);
    }
    Vec sorted = inside;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());

    WageBinTable even;
    even.bins = {{0.0, 1.0, 50.0}, {1.0, 2.0, 50.0}};
    const Vec split = sample_raw_wages(even, 10000, rng);
    const std::size_t low = std::count_if(split.begin(), split.end(),
                                          [](double w) { return w < 1.0; });
    CHECK(low > 4800);
    CHECK(low < 5200);
}

TEST_CASE("open bin draws follow the exponential tail", "[calibration]") {
    Rng rng(99);
    WageBinTable open_only;
    open_only.bins = {{100.0, kInf, 1.0}};

    // default mean excess is half the lower bound
    const Vec w = sample_raw_wages(open_only, 100000, rng);
    double mean = 0.0;
    for (double v : w) {
        CHECK(v >= 100.0);
        mean += v;
    }
    mean /= static_cast<double>(w.size());
    const double se = 50.0 / std::sqrt(static_cast<double>(w.size()));
    CHECK(std::abs(mean - 150.0) < 3.0 * se);

    open_only.tail_mean_excess = 200.0;
    const Vec heavy = sample_raw_wages(open_only, 100000, rng);
    double heavy_mean = 0.0;
    for (double v : heavy) heavy_mean += v;
    heavy_mean /= static_cast<double>(heavy.size());
    CHECK(std::abs(heavy_mean - 300.0) < 3.0 * 200.0 / std::sqrt(100000.0));
}

TEST_CASE("saving weights tilt the wage vector toward the rich", "[calibration]") {
    const Vec two = apply_saving_weights({1.0, 1.0});
    CHECK(std::abs(two[0] - 1.0 / 3.0) < 1e-15);
    CHECK(std::abs(two[1] - 2.0 / 3.0) < 1e-15);

    const Vec three = apply_saving_weights({3.0, 1.0, 2.0}); // sorts first
    CHECK(std::abs(three[0] - 1.0 / 14.0) < 1e-15);
    CHECK(std::abs(three[1] - 4.0 / 14.0) < 1e-15);
    CHECK(std::abs(three[2] - 9.0 / 14.0) < 1e-15);

    // equal raw wages reduce to a pure rank rule
    const std::size_t A = 40;
    const Vec ranks = apply_saving_weights(Vec(A, 7.5));
    for (std::size_t i = 0; i < A; ++i)
        CHECK(std::abs(ranks[i] - 2.0 * static_cast<double>(i + 1) /
                                      (static_cast<double>(A) * static_cast<double>(A + 1))) <
              1e-15);

    Rng rng(4);
    Vec raw(257);
    for (auto& v : raw) v = 0.1 + rng.uniform01() * 9.0;
    const Vec gamma = apply_saving_weights(raw);
    double sum = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        sum += gamma[i];
        if (i > 0) CHECK(gamma[i] > gamma[i - 1]);
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);

    CHECK_THROWS_MATCHES(apply_saving_weights({1.0, 0.0}), error,
                         code_is(errc::non_positive_wage));
    CHECK_THROWS_MATCHES(apply_saving_weights({}), error, code_is(errc::empty_table));
}

TEST_CASE("labor share estimates follow the wealth increase rule", "[calibration]") {
    const MacroSeries series = {
        {2014, 28000.0, 0.12, 150000.0},
        {2015, 30000.0, 0.10, 160000.0},
        {2016, 31000.0, 0.00, 171000.0},
        {2017, 52000.0, 0.50, 181000.0},
        {2018, 30000.0, 0.10, 179000.0},
    };

    const auto est = estimate_labor_share(series, 2015);
    CHECK(std::abs(est.value - 0.30) < 1e-12);
    CHECK_FALSE(est.flagged);

    CHECK(estimate_labor_share(series, 2016).value == 0.0);

    const auto crisis = estimate_labor_share(series, 2017);
    CHECK(std::abs(crisis.value - 2.6) < 1e-12);
    CHECK(crisis.flagged);

    CHECK_THROWS_MATCHES(estimate_labor_share(series, 2018), error,
                         code_is(errc::wealth_decrease));
    CHECK_THROWS_MATCHES(estimate_labor_share(series, 2014), error, code_is(errc::missing_field));
    CHECK_THROWS_MATCHES(estimate_labor_share(series, 2030), error, code_is(errc::missing_field));

    // the series walker reports every defined year and skips the rest
    const auto all = estimate_labor_share_series(series);
    REQUIRE(all.size() == 3);
    CHECK(all[0].year == 2015);
    CHECK(all[2].year == 2017);
    CHECK(all[2].flagged);

    MacroSeries bad = series;
    bad[1].saving_rate = 1.5;
    CHECK_THROWS_MATCHES(estimate_labor_share(bad, 2015), error, code_is(errc::missing_field));
}

TEST_CASE("wealth quantiles interpolate the cdf in log space", "[calibration]") {
    const std::vector<CdfPoint> curve = {{10.0, 0.25}, {1000.0, 1.0}};
    const Vec sample = wealth_quantile_sample(curve, 4);
    CHECK(std::abs(sample[0] - 10.0) < 1e-12);
    CHECK(std::abs(sample[1] - 10.0 * std::pow(10.0, 1.0 / 3.0)) < 1e-9);
    CHECK(std::abs(sample[2] - 100.0) < 1e-9);
    CHECK(std::abs(sample[3] - 10.0 * std::pow(10.0, 5.0 / 3.0)) < 1e-6);

    CHECK_THROWS_MATCHES(wealth_quantile_sample({{10.0, 0.5}}, 4), error,
                         code_is(errc::invalid_cdf));
    CHECK_THROWS_MATCHES(wealth_quantile_sample({{10.0, 0.5}, {20.0, 0.4}}, 4), error,
                         code_is(errc::invalid_cdf));
    CHECK_THROWS_MATCHES(wealth_quantile_sample({{10.0, 0.5}, {20.0, 1.2}}, 4), error,
                         code_is(errc::invalid_cdf));
    CHECK_THROWS_MATCHES(wealth_quantile_sample({{-1.0, 0.5}, {20.0, 1.0}}, 4), error,
                         code_is(errc::invalid_cdf));
}

TEST_CASE("calibration targets align wealth and wages per coupling", "[calibration]") {
    const Vec wealth = {5.0, 1.0, 3.0, 2.0, 4.0, 6.0, 8.0, 7.0};
    const Vec wages = {4.0, 2.0, 1.0, 3.0, 6.0, 5.0, 8.0, 7.0};

    const auto corr = make_calibration_target(wealth, wages, Coupling::correlated);
    CHECK(std::is_sorted(corr.x.begin(), corr.x.end()));
    CHECK(std::is_sorted(corr.gamma.begin(), corr.gamma.end()));
    double sx = 0.0, sg = 0.0;
    for (std::size_t i = 0; i < corr.x.size(); ++i) {
        sx += corr.x[i];
        sg += corr.gamma[i];
    }
    CHECK(std::abs(sx - 1.0) < 1e-12);
    CHECK(std::abs(sg - 1.0) < 1e-12);

    const auto indep = make_calibration_target(wealth, wages, Coupling::independent, 99);
    CHECK(indep.x == corr.x);
    CHECK_FALSE(std::is_sorted(indep.gamma.begin(), indep.gamma.end()));
    Vec shuffled = indep.gamma;
    std::sort(shuffled.begin(), shuffled.end());
    for (std::size_t i = 0; i < shuffled.size(); ++i)
        CHECK(std::abs(shuffled[i] - corr.gamma[i]) < 1e-15);
    // deterministic for a fixed seed
    const auto again = make_calibration_target(wealth, wages, Coupling::independent, 99);
    CHECK(again.gamma == indep.gamma);

    CHECK_THROWS_MATCHES(make_calibration_target({1.0, 2.0}, {1.0}, Coupling::correlated), error,
                         code_is(errc::dimension_mismatch));
}

TEST_CASE("closed-form optimal labor share matches a grid search", "[calibration]") {
    Rng rng(2718);

    // p(x) = x under linear feedback with equal skill, so no wage term helps
    {
        Vec x(6);
        double s = 0.0;
        for (auto& v : x) {
            v = 0.1 + rng.uniform01();
            s += v;
        }
        for (auto& v : x) v /= s;
        Vec gamma = x;
        std::rotate(gamma.begin(), gamma.begin() + 1, gamma.end());
        const double r = optimal_r_for_beta(x, gamma, {1.0, Vec(6, 1.0)});
        CHECK(r < 1e-10);
    }

    // matching the wage vector exactly wants pure wages
    CHECK(std::abs(optimal_r_for_beta({0.3, 0.7}, {0.3, 0.7}, {2.0, {1.0, 1.0}}) - 1.0) < 1e-12);

    // center of a symmetric model: probabilities equal wages, no direction
    CHECK_THROWS_MATCHES(optimal_r_for_beta({0.5, 0.5}, {0.5, 0.5}, {2.0, {1.0, 1.0}}), error,
                         code_is(errc::degenerate_direction));

    std::size_t interior = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t A = 2 + rng.uniform_index(49);
        Vec x(A), gamma(A);
        double sx = 0.0, sg = 0.0;
        for (std::size_t i = 0; i < A; ++i) {
            x[i] = 0.02 + rng.uniform01();
            gamma[i] = 0.02 + rng.uniform01();
            sx += x[i];
            sg += gamma[i];
        }
        for (std::size_t i = 0; i < A; ++i) {
            x[i] /= sx;
            gamma[i] /= sg;
        }
        FeedbackSpec fb;
        fb.beta = 0.5 + 2.5 * rng.uniform01();
        fb.alpha.assign(A, 1.0);
        for (auto& a : fb.alpha) a = 0.5 + rng.uniform01();

        const double closed = optimal_r_for_beta(x, gamma, fb);
        const Vec prob = choice_probabilities(x, fb);
        auto norm_at = [&](double r) {
            double s = 0.0;
            for (std::size_t i = 0; i < A; ++i) {
                const double g = (1.0 - r) * (prob[i] - x[i]) + r * (gamma[i] - x[i]);
                s += g * g;
            }
            return s;
        };
        double best_r = 0.0, best = norm_at(0.0);
        for (int k = 1; k <= 10000; ++k) {
            const double r = static_cast<double>(k) / 10000.0;
            const double v = norm_at(r);
            if (v < best) {
                best = v;
                best_r = r;
            }
        }
        CHECK(std::abs(closed - best_r) <= 1e-4 + 1e-12);
        if (closed > 0.005 && closed < 0.995) {
            ++interior;
            CHECK(norm_at(closed) <= norm_at(closed - 0.01));
            CHECK(norm_at(closed) <= norm_at(closed + 0.01));
        }
    }
    CHECK(interior >= 50);
}

TEST_CASE("the optimal-share line is tame on the synthetic target", "[calibration]") {
    const auto target = synthetic::target();

    std::vector<double> grid;
    for (int k = 0; k <= 250; ++k) grid.push_back(0.5 + 0.01 * static_cast<double>(k));
    const auto line = r_beta_line(target, grid);
    REQUIRE(line.size() == grid.size());

    for (std::size_t k = 0; k < line.size(); ++k) {
        CHECK(line[k].r_star >= 0.0);
        CHECK(line[k].r_star <= 1.0);
        CHECK(std::isfinite(line[k].g_norm));
        if (k > 0) CHECK(std::abs(line[k].r_star - line[k - 1].r_star) < 0.05);
        // pure wage growth is its own optimum under linear feedback
        if (std::abs(line[k].beta - 1.0) < 1e-12) {
            CHECK(line[k].r_star < 1e-8);
            CHECK(line[k].g_norm < 1e-12);
        }
        // heavier feedback needs more wage replenishment to hold the target
        if (line[k].beta >= 1.0 && line[k].beta <= 2.0 && k > 0 && line[k - 1].beta >= 1.0)
            CHECK(line[k].r_star >= line[k - 1].r_star - 1e-12);
    }

    CHECK_THROWS_MATCHES(r_beta_line(target, {}), error, code_is(errc::empty_table));
}

TEST_CASE("beta fitting recovers a planted feedback exponent", "[calibration]") {
    // plant a fixed point of known parameters, then ask the fit to find beta
    Rng rng(31415);
    const std::size_t A = 10;
    Vec gamma(A);
    double s = 0.0;
    for (auto& g : gamma) {
        g = 0.2 + rng.uniform01();
        s += g;
    }
    for (auto& g : gamma) g /= s;
    std::sort(gamma.begin(), gamma.end());

    ModelParams planted;
    planted.agents = A;
    planted.labor_share = 0.3;
    planted.gamma = gamma;
    planted.feedback.beta = 1.4;
    planted.feedback.alpha.assign(A, 1.0);

    const auto fp = find_fixed_point(SharePoint{Vec(A, 1.0 / A)}, planted, 1e-12);
    REQUIRE(fp.converged);

    CalibrationTarget target;
    target.x = fp.point;
    target.gamma = gamma;
    const auto fit = fit_beta(target, 0.3);
    CHECK(std::abs(fit.beta - 1.4) < 1e-3);
    CHECK(fit.g_norm < 1e-6);

    // monotone objective: a target that only ever prefers smaller beta
    CalibrationTarget flat;
    flat.x = Vec(4, 0.25);
    flat.gamma = {0.1, 0.2, 0.3, 0.4};
    CHECK_THROWS_MATCHES(fit_beta(flat, 0.0), error, code_is(errc::no_interior_minimum));

    CalibrationTarget degenerate;
    degenerate.x = {0.1, 0.2, 0.3, 0.4};
    degenerate.gamma = degenerate.x;
    CHECK_THROWS_MATCHES(fit_beta(degenerate, 0.0), error, code_is(errc::degenerate_target));
}

TEST_CASE("skill vectors follow the wage ordering", "[calibration]") {
    const Vec ones = skill_vector({0.25, 0.75}, 0.0);
    CHECK(ones == Vec{1.0, 1.0});
    const Vec identity = skill_vector({0.25, 0.75}, 1.0);
    CHECK(std::abs(identity[0] - 0.25) < 1e-15);
    CHECK(std::abs(identity[1] - 0.75) < 1e-15);
    const Vec roots = skill_vector({0.25, 0.75}, 0.5);
    CHECK(std::abs(roots[0] - 0.5) < 1e-15);
    CHECK(std::abs(roots[1] - std::sqrt(0.75)) < 1e-12);
    CHECK(std::abs(roots[1] - 0.86603) < 1e-5);

    Rng rng(8);
    Vec gamma(30);
    double s = 0.0;
    for (auto& g : gamma) {
        g = 0.05 + rng.uniform01();
        s += g;
    }
    for (auto& g : gamma) g /= s;
    std::sort(gamma.begin(), gamma.end());
    const Vec alpha = skill_vector(gamma, 0.7);
    for (std::size_t i = 1; i < alpha.size(); ++i) CHECK(alpha[i] >= alpha[i - 1]);

    CHECK_THROWS_MATCHES(skill_vector({0.5, 0.5}, -0.1), error,
                         code_is(errc::negative_skill_exponent));
    CHECK_THROWS_MATCHES(skill_vector({0.0, 1.0}, 0.5), error,
                         code_is(errc::zero_wage_with_positive_c));
    CHECK_NOTHROW(skill_vector({0.0, 1.0}, 0.0));
}

TEST_CASE("the beta-c scan surfaces the self-consistent optimum", "[calibration]") {
    // at r=0 and beta=1 with flat skill the field vanishes for any target
    const auto target = synthetic::target(40);
    const std::vector<double> betas = {0.8, 0.9, 1.0, 1.1, 1.2};
    const std::vector<double> cs = {0.0, 0.3, 0.6};
    const auto scan = scan_beta_c(target, 0.0, betas, cs);
    REQUIRE(scan.norms.size() == betas.size() * cs.size());
    CHECK(scan.best_beta == 1.0);
    CHECK(scan.best_c == 0.0);
    CHECK(scan.best_norm < 1e-12);
    CHECK(*std::min_element(scan.norms.begin(), scan.norms.end()) == scan.best_norm);
    for (double v : scan.norms) CHECK(std::isfinite(v));

    CHECK_THROWS_MATCHES(scan_beta_c(target, 0.0, {}, cs), error, code_is(errc::empty_table));
}
