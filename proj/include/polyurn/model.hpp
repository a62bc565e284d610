#ifndef POLYURN_MODEL_HPP
#define POLYURN_MODEL_HPP

// Core quantities of the wage/feedback urn. An urn step pays total mass 1:
// a share r is split over all agents as wages (vector gamma on the simplex),
// the rest goes to one winner drawn with probability proportional to
// alpha_i * X_i^beta. Everything else in the library is built from the
// probabilities p(x), the drift field G(x) and the Lyapunov function below.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "polyurn/errors.hpp"

namespace polyurn {

using Vec = std::vector<double>;

constexpr double simplex_tol = 1e-12;

struct FeedbackSpec {
    double beta = 1.0;
    Vec alpha; // one positive multiplier per agent
};

struct ModelParams {
    std::size_t agents = 0;
    double labor_share = 0.0; // r in [0,1]
    Vec gamma;                // wage simplex vector, length agents
    FeedbackSpec feedback;
};

// Absolute wealth in model units. Mass grows by exactly one unit per step,
// so sum(x) == initial_mass + step up to accumulation error.
struct WealthState {
    Vec x;
    std::uint64_t step = 0;
    double initial_mass = 0.0;
};

// A point on the simplex (relative wealth chi, or any share vector).
struct SharePoint {
    Vec x;
};

namespace detail {

// std::pow dominates hot loops at scale; integer/half exponents cover the
// parameter values used throughout and are exact.
inline double pow_beta(double x, double beta) {
    if (beta == 1.0) return x;
    if (beta == 2.0) return x * x;
    if (beta == 0.0) return 1.0;
    if (beta == 0.5) return std::sqrt(x);
    if (beta == 3.0) return x * x * x;
    if (beta == 1.5) return x * std::sqrt(x);
    return std::pow(x, beta);
}

inline double sum(const Vec& v) {
    double s = 0.0;
    for (double a : v) s += a;
    return s;
}

} // namespace detail

inline double simplex_gap(const Vec& x) {
    return std::abs(detail::sum(x) - 1.0);
}

inline Vec normalized(Vec x) {
    const double s = detail::sum(x);
    if (!(s > 0.0)) raise(errc::all_zero, "cannot normalize a zero vector");
    for (double& a : x) a /= s;
    return x;
}

inline Vec uniform_simplex(std::size_t n) {
    return Vec(n, 1.0 / static_cast<double>(n));
}

inline SharePoint make_share_point(Vec x, double tol = simplex_tol) {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < -tol)
            raise(errc::gamma_not_simplex,
                  "share component " + std::to_string(i) + " is negative");
    if (simplex_gap(x) > tol)
        raise(errc::gamma_not_simplex, "shares do not sum to 1");
    return SharePoint{std::move(x)};
}

inline SharePoint shares_of(const WealthState& state) {
    return SharePoint{normalized(state.x)};
}

inline void validate_params(const ModelParams& p) {
    if (p.agents < 2)
        raise(errc::dimension_mismatch, "agents must be at least 2");
    if (p.gamma.size() != p.agents)
        raise(errc::dimension_mismatch, "gamma has length " +
                                            std::to_string(p.gamma.size()) + ", expected " +
                                            std::to_string(p.agents));
    if (p.feedback.alpha.size() != p.agents)
        raise(errc::dimension_mismatch, "alpha has length " +
                                            std::to_string(p.feedback.alpha.size()) +
                                            ", expected " + std::to_string(p.agents));
    if (!(p.labor_share >= 0.0 && p.labor_share <= 1.0))
        raise(errc::labor_share_out_of_range,
              "labor_share = " + std::to_string(p.labor_share));
    for (std::size_t i = 0; i < p.agents; ++i) {
        if (!(p.feedback.alpha[i] > 0.0))
            raise(errc::non_positive_alpha,
                  "alpha[" + std::to_string(i) + "] = " + std::to_string(p.feedback.alpha[i]));
        if (p.gamma[i] < 0.0)
            raise(errc::gamma_not_simplex,
                  "gamma[" + std::to_string(i) + "] is negative");
    }
    if (simplex_gap(p.gamma) > simplex_tol)
        raise(errc::gamma_not_simplex, "gamma sums to " + std::to_string(detail::sum(p.gamma)));
    if (!std::isfinite(p.feedback.beta))
        raise(errc::non_positive_alpha, "beta is not finite");
}

inline void validate_state(const WealthState& s, const ModelParams& p) {
    if (s.x.size() != p.agents)
        raise(errc::dimension_mismatch, "state has " + std::to_string(s.x.size()) +
                                            " agents, params expect " + std::to_string(p.agents));
    for (std::size_t i = 0; i < s.x.size(); ++i)
        if (!(s.x[i] > 0.0))
            raise(errc::boundary_point,
                  "wealth[" + std::to_string(i) + "] must be positive");
}

// ---- weights and probabilities ----

inline void feedback_weights_into(const Vec& x, const FeedbackSpec& f, Vec& out) {
    if (x.size() != f.alpha.size())
        raise(errc::dimension_mismatch, "x and alpha lengths differ");
    out.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0 && f.beta <= 0.0)
            raise(errc::zero_base_non_positive_exponent,
                  "x[" + std::to_string(i) + "] = 0 with beta <= 0");
        out[i] = x[i] == 0.0 ? 0.0 : f.alpha[i] * detail::pow_beta(x[i], f.beta);
    }
}

inline Vec feedback_weights(const Vec& x, const FeedbackSpec& f) {
    Vec w;
    feedback_weights_into(x, f, w);
    return w;
}

inline Vec choice_probabilities(const Vec& x, const FeedbackSpec& f) {
    Vec w = feedback_weights(x, f);
    const double total = detail::sum(w);
    if (!(total > 0.0))
        raise(errc::all_weights_zero, "total feedback weight is zero");
    for (double& v : w) v /= total;
    return w;
}

// Expected payout to each agent when agent i wins: (1-r) e_i + r gamma.
inline Vec increment_vector(std::size_t i, double r, const Vec& gamma) {
    if (i >= gamma.size())
        raise(errc::index_out_of_range,
              "winner index " + std::to_string(i) + " of " + std::to_string(gamma.size()));
    Vec v(gamma.size());
    for (std::size_t j = 0; j < gamma.size(); ++j) v[j] = r * gamma[j];
    v[i] += 1.0 - r;
    return v;
}

// ---- drift field ----

// G(x) = (1-r) p(x) + r gamma - x. Zeros are the candidate limits of the
// share process; sums to 0 on the simplex.
inline Vec field_g(const Vec& x, const ModelParams& p) {
    Vec g = choice_probabilities(x, p.feedback);
    for (std::size_t i = 0; i < x.size(); ++i)
        g[i] = (1.0 - p.labor_share) * g[i] + p.labor_share * p.gamma[i] - x[i];
    return g;
}

// Wage-free part G0(x) = p(x) - x.
inline Vec field_g0(const Vec& x, const FeedbackSpec& f) {
    Vec g = choice_probabilities(x, f);
    for (std::size_t i = 0; i < x.size(); ++i) g[i] -= x[i];
    return g;
}

// Two-agent diagnostic line: x is a fixed point of G iff G0_1(x) crosses
// g(x) = r/(1-r) (x - gamma_1).
inline double line_g(double x, double r, double gamma1) {
    if (r == 1.0)
        raise(errc::degenerate_labor_share_one, "line g undefined at r = 1");
    return r / (1.0 - r) * (x - gamma1);
}

// ---- Lyapunov function ----

// L(x) = -(1-r)/beta log(sum alpha_i x_i^beta) - r sum gamma_i log x_i + sum x_i.
// The 1/beta factor makes dL/dx_i = -G_i(x)/x_i exact, which is what the
// descent argument needs. At beta = 0 the log-sum term degenerates to the
// analytic continuation -(1-r) sum p_i log x_i up to an additive constant.
inline double lyapunov(const Vec& x, const ModelParams& p) {
    const double r = p.labor_share;
    const double beta = p.feedback.beta;
    double logsum = 0.0, wage = 0.0, mass = 0.0, S = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0)
            raise(errc::boundary_point,
                  "lyapunov needs x[" + std::to_string(i) + "] > 0");
        S += p.feedback.alpha[i] * detail::pow_beta(x[i], beta);
        wage += p.gamma[i] * std::log(x[i]);
        mass += x[i];
    }
    if (beta != 0.0) {
        logsum = std::log(S) / beta;
    } else {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            acc += p.feedback.alpha[i] / S * std::log(x[i]);
        logsum = acc;
    }
    return -(1.0 - r) * logsum - r * wage + mass;
}

inline Vec lyapunov_gradient(const Vec& x, const ModelParams& p) {
    const double r = p.labor_share;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] <= 0.0)
            raise(errc::boundary_point,
                  "lyapunov gradient needs x[" + std::to_string(i) + "] > 0");
    Vec prob = choice_probabilities(x, p.feedback);
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        g[i] = -(1.0 - r) * prob[i] / x[i] - r * p.gamma[i] / x[i] + 1.0;
    return g;
}

// ---- sublinear fixed point ----

// For beta < 1 and r = 0 the share process has the deterministic limit
// x_i proportional to alpha_i^{1/(1-beta)}.
inline Vec sublinear_limit(const FeedbackSpec& f) {
    if (!(f.beta < 1.0))
        raise(errc::exponent_not_sublinear,
              "beta = " + std::to_string(f.beta) + ", need beta < 1");
    Vec x(f.alpha.size());
    const double e = 1.0 / (1.0 - f.beta);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(f.alpha[i] > 0.0))
            raise(errc::non_positive_alpha, "alpha[" + std::to_string(i) + "] <= 0");
        x[i] = std::pow(f.alpha[i], e);
    }
    return normalized(std::move(x));
}

} // namespace polyurn

#endif // POLYURN_MODEL_HPP
