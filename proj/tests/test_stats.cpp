#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "polyurn/rng.hpp"
#include "polyurn/stats.hpp"
#include "support/oracles.hpp"

using namespace polyurn;

namespace {

class code_is : public Catch::Matchers::MatcherBase<error> {
  public:
    explicit code_is(errc c) : code_(c) {}
    bool match(const error& e) const override { return e.code() == code_; }
    std::string describe() const override {
        return std::string("has code ") + errc_name(code_);
    }

  private:
    errc code_;
};

// Area under the right-continuous survival step function from 0 to the top
// threshold; equals the mean of the scaled sample.
double survival_integral(const SurvivalCurve& c) {
    double area = c.thresholds.front(); // survival is 1 below the first drop
    for (std::size_t k = 1; k < c.thresholds.size(); ++k)
        area += (c.thresholds[k] - c.thresholds[k - 1]) * c.survival[k - 1];
    return area;
}

} // namespace

TEST_CASE("survival curve tabulates the fraction strictly above each level", "[stats]") {
    const SurvivalCurve c = survival_curve({1.0, 2.0, 3.0}, 10.0);
    REQUIRE(c.thresholds == Vec{10.0, 20.0, 30.0});
    REQUIRE(c.survival == Vec{2.0 / 3.0, 1.0 / 3.0, 0.0});

    CHECK(survival_at(c, 5.0) == 1.0);
    CHECK(survival_at(c, 10.0) == 2.0 / 3.0); // drop happens at the threshold
    CHECK(survival_at(c, 15.0) == 2.0 / 3.0);
    CHECK(survival_at(c, 25.0) == 1.0 / 3.0);
    CHECK(survival_at(c, 30.0) == 0.0);
    CHECK(survival_at(c, 1e9) == 0.0);
}

TEST_CASE("equal wealth collapses the survival curve to a single drop", "[stats]") {
    const SurvivalCurve c = survival_curve({4.0, 4.0, 4.0, 4.0}, 2.5);
    REQUIRE(c.thresholds == Vec{10.0});
    REQUIRE(c.survival == Vec{0.0});
    CHECK(survival_at(c, 9.999) == 1.0);
    CHECK(survival_at(c, 10.0) == 0.0);
}

TEST_CASE("survival curve area equals the scaled mean", "[stats]") {
    Rng rng(411);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t A = 2 + rng.uniform_index(60);
        Vec x(A);
        for (double& v : x) v = rng.exponential(3.0);
        if (rep % 7 == 0) x[0] = x[A - 1]; // exercise ties
        const double scale = 0.5 + 12.0 * rng.uniform01();
        const SurvivalCurve c = survival_curve(x, scale);
        const double mean =
            std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(A);
        CHECK(survival_integral(c) == Catch::Approx(mean * scale).margin(1e-9));
        for (std::size_t k = 1; k < c.thresholds.size(); ++k) {
            CHECK(c.thresholds[k] > c.thresholds[k - 1]);
            CHECK(c.survival[k] < c.survival[k - 1]);
        }
    }
}

TEST_CASE("survival curve rejects bad input", "[stats]") {
    CHECK_THROWS_MATCHES(survival_curve({}, 10.0), error, code_is(errc::all_zero));
    CHECK_THROWS_MATCHES(survival_curve({1.0, -0.5}, 10.0), error,
                         code_is(errc::negative_value));
    CHECK_THROWS_MATCHES(survival_curve({1.0}, 0.0), error,
                         code_is(errc::non_positive_scale));
    CHECK_THROWS_MATCHES(survival_curve({1.0}, -3.0), error,
                         code_is(errc::non_positive_scale));
}

TEST_CASE("gini matches hand values", "[stats]") {
    CHECK(gini({5.0, 5.0, 5.0, 5.0}) == Catch::Approx(0.0).margin(1e-15));
    CHECK(gini({0.0, 1.0}) == Catch::Approx(0.5).margin(1e-15));
    CHECK(gini({1.0}) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("gini sorted-rank form agrees with the pairwise oracle", "[stats]") {
    Rng rng(412);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t A = 2 + rng.uniform_index(499);
        Vec x(A);
        for (double& v : x)
            v = rep % 3 == 0 ? rng.pareto(1.6) : rng.exponential(2.0);
        if (rep % 5 == 0) x[rng.uniform_index(A)] = 0.0;
        const double fast = gini(x);
        CHECK(fast == Catch::Approx(oracle::gini_pairwise(x)).margin(1e-12));
        CHECK(fast >= 0.0);
        CHECK(fast < 1.0);
    }
}

TEST_CASE("gini rejects degenerate input", "[stats]") {
    CHECK_THROWS_MATCHES(gini({}), error, code_is(errc::all_zero));
    CHECK_THROWS_MATCHES(gini({0.0, 0.0}), error, code_is(errc::all_zero));
    CHECK_THROWS_MATCHES(gini({2.0, -1.0}), error, code_is(errc::negative_value));
}

TEST_CASE("top shares and the single-winner adjustment", "[stats]") {
    const auto rows = top_shares({1.0, 1.0, 2.0}, {1.0 / 3.0, 2.0 / 3.0, 1.0});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].group == 1);
    CHECK(rows[0].share == Catch::Approx(0.5));
    CHECK(rows[0].adjusted == Catch::Approx(0.0).margin(1e-15)); // group is the top agent
    CHECK(rows[1].group == 2);
    CHECK(rows[1].share == Catch::Approx(0.75));
    CHECK(rows[1].adjusted == Catch::Approx(0.5));
    CHECK(rows[2].group == 3);
    CHECK(rows[2].share == Catch::Approx(1.0));
    CHECK(rows[2].adjusted == Catch::Approx(1.0));
}

TEST_CASE("top shares telescope over the default quantiles", "[stats]") {
    Rng rng(413);
    Vec x(20000);
    for (double& v : x) v = rng.pareto(1.3);
    const auto rows = top_shares(x);
    REQUIRE(rows.size() == 5);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(rows[k].share > 0.0);
        CHECK(rows[k].share <= 1.0);
        CHECK(rows[k].adjusted >= 0.0);
        CHECK(rows[k].adjusted <= rows[k].share);
        if (k > 0) {
            CHECK(rows[k - 1].group > rows[k].group);
            CHECK(rows[k - 1].share >= rows[k].share);
            CHECK(rows[k - 1].adjusted >= rows[k].adjusted);
        }
    }
}

TEST_CASE("top shares reject quantiles that select no agent", "[stats]") {
    const Vec x{1.0, 2.0, 3.0};
    CHECK_THROWS_MATCHES(top_shares(x, {0.1}), error, code_is(errc::epsilon_too_small));
    CHECK_THROWS_MATCHES(top_shares(x, {0.0}), error, code_is(errc::epsilon_too_small));
    CHECK_THROWS_MATCHES(top_shares(x, {1.5}), error, code_is(errc::epsilon_too_small));
    CHECK_THROWS_MATCHES(top_shares({}, {0.5}), error, code_is(errc::all_zero));
    CHECK_THROWS_MATCHES(top_shares({0.0, 0.0}, {0.5}), error, code_is(errc::all_zero));
    CHECK_THROWS_MATCHES(top_shares({-1.0, 2.0}, {0.5}), error,
                         code_is(errc::negative_value));
}

TEST_CASE("tail fit recovers the exponent of an exact power-law grid", "[stats]") {
    const std::size_t A = 2000;
    const double a = 1.44;
    Vec x(A);
    for (std::size_t k = 0; k < A; ++k)
        x[k] = std::pow(static_cast<double>(k + 1) / static_cast<double>(A), -1.0 / a);
    std::shuffle(x.begin(), x.end(), std::mt19937{7});
    CHECK(pareto_tail_fit(x, 0.25) == Catch::Approx(a).margin(1e-6));
    CHECK(pareto_tail_fit(x, 1.0) == Catch::Approx(a).margin(1e-6));
}

TEST_CASE("tail fit recovers the exponent of sampled heavy tails", "[stats]") {
    Rng rng(414);
    Vec x(100000);
    for (double& v : x) v = rng.pareto(1.5);
    CHECK(pareto_tail_fit(x, 0.05) == Catch::Approx(1.5).margin(0.1));
}

TEST_CASE("tail fit rejects thin or invalid tails", "[stats]") {
    Vec x(100, 1.0);
    std::iota(x.begin(), x.end(), 1.0);
    CHECK_THROWS_MATCHES(pareto_tail_fit(x, 0.1), error, code_is(errc::tail_too_small));
    CHECK_THROWS_MATCHES(pareto_tail_fit(x, 0.0), error, code_is(errc::epsilon_too_small));
    CHECK_THROWS_MATCHES(pareto_tail_fit(x, 1.5), error, code_is(errc::epsilon_too_small));
    Vec flat(50, 3.0);
    CHECK_THROWS_MATCHES(pareto_tail_fit(flat, 1.0), error, code_is(errc::all_zero));
    Vec with_zero = x;
    with_zero[0] = 0.0; // zero lands in the tail only when the whole vector is used
    CHECK_THROWS_MATCHES(pareto_tail_fit(with_zero, 1.0), error,
                         code_is(errc::negative_value));
}

TEST_CASE("rank correlation matches the classical formula", "[stats]") {
    const Vec a{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(rank_correlation(a, {1.0, 3.0, 2.0, 5.0, 4.0}) == Catch::Approx(0.8));
    CHECK(rank_correlation(a, a) == Catch::Approx(1.0));
    const Vec rev{5.0, 4.0, 3.0, 2.0, 1.0};
    CHECK(rank_correlation(a, rev) == Catch::Approx(-1.0));
    // ties use average ranks: ranks (1.5, 1.5, 3) against (1, 2, 3)
    CHECK(rank_correlation({1.0, 1.0, 2.0}, {1.0, 2.0, 3.0}) ==
          Catch::Approx(1.5 / std::sqrt(3.0)));
}

TEST_CASE("rank correlation is invariant under monotone rescaling", "[stats]") {
    Rng rng(415);
    Vec a(200), b(200);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.normal();
        b[i] = rng.normal();
    }
    const double rho = rank_correlation(a, b);
    CHECK(rho > -1.0);
    CHECK(rho < 1.0);
    Vec a_scaled(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) a_scaled[i] = std::exp(3.0 * a[i]);
    CHECK(rank_correlation(a_scaled, b) == Catch::Approx(rho).margin(1e-12));
}

TEST_CASE("rank correlation rejects unusable input", "[stats]") {
    CHECK_THROWS_MATCHES(rank_correlation({1.0, 2.0}, {1.0}), error,
                         code_is(errc::dimension_mismatch));
    CHECK_THROWS_MATCHES(rank_correlation({1.0}, {1.0}), error,
                         code_is(errc::dimension_mismatch));
    CHECK_THROWS_MATCHES(rank_correlation({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}), error,
                         code_is(errc::all_zero));
}

TEST_CASE("rate of return subtracts wage inflow before dividing", "[stats]") {
    ModelParams params;
    params.agents = 2;
    params.labor_share = 0.3;
    params.gamma = {0.0004, 0.9996};
    params.feedback = {1.0, {1.0, 1.0}};

    SimulationTrace trace;
    trace.snapshots.push_back({1000, {100.0, 50.0}, {}});
    trace.snapshots.push_back({1100, {112.0, 79.988}, {}});

    const auto ror = rate_of_return(trace, 1000, 1100, params);
    REQUIRE(ror.size() == 2);
    CHECK(ror[0].agent == 0);
    CHECK(ror[0].ror == Catch::Approx(0.11988).margin(1e-12));
    CHECK(ror[0].quantile == Catch::Approx(0.75)); // richer at the start
    CHECK(ror[1].ror == Catch::Approx(0.0).margin(1e-12)); // gain is pure wage
    CHECK(ror[1].quantile == Catch::Approx(0.25));

    CHECK_THROWS_MATCHES(rate_of_return(trace, 1100, 1000, params), error,
                         code_is(errc::negative_time));
    CHECK_THROWS_MATCHES(rate_of_return(trace, 1000, 1000, params), error,
                         code_is(errc::negative_time));
    CHECK_THROWS_MATCHES(rate_of_return(trace, 999, 1100, params), error,
                         code_is(errc::missing_snapshot));
    CHECK_THROWS_MATCHES(rate_of_return(trace, 1000, 1101, params), error,
                         code_is(errc::missing_snapshot));
}

TEST_CASE("rate of return quantiles rank agents by starting wealth", "[stats]") {
    const std::size_t A = 8;
    ModelParams params;
    params.agents = A;
    params.labor_share = 0.0;
    params.gamma = Vec(A, 1.0 / static_cast<double>(A));
    params.feedback = {1.0, Vec(A, 1.0)};

    Rng rng(416);
    Vec start(A), end(A);
    for (std::size_t i = 0; i < A; ++i) {
        start[i] = 1.0 + rng.uniform01();
        end[i] = start[i] * (1.0 + rng.uniform01());
    }
    SimulationTrace trace;
    trace.snapshots.push_back({0, start, {}});
    trace.snapshots.push_back({64, end, {}});

    const auto ror = rate_of_return(trace, 0, 64, params);
    Vec quantiles;
    for (const auto& pt : ror) {
        CHECK(pt.ror == Catch::Approx((end[pt.agent] - start[pt.agent]) / start[pt.agent]));
        quantiles.push_back(pt.quantile);
    }
    std::sort(quantiles.begin(), quantiles.end());
    for (std::size_t k = 0; k < A; ++k)
        CHECK(quantiles[k] ==
              Catch::Approx((static_cast<double>(k) + 0.5) / static_cast<double>(A)));
}
