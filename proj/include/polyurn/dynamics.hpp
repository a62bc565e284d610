#ifndef POLYURN_DYNAMICS_HPP
#define POLYURN_DYNAMICS_HPP

// Deterministic share dynamics: the flow dz/ds = G(z) on the simplex, its
// fixed points and their stability. Long-run simulation behaviour follows
// this flow, so regime questions (who can end up rich) reduce to which
// attractor a corner start reaches.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "polyurn/errors.hpp"
#include "polyurn/model.hpp"

namespace polyurn {

enum class Stability { stable, saddle_or_unstable, undetermined };
enum class StabilityMethod { heuristic, eigenvalue };

inline const char* stability_name(Stability s) {
    switch (s) {
    case Stability::stable: return "stable";
    case Stability::saddle_or_unstable: return "saddle_or_unstable";
    default: return "undetermined";
    }
}

inline const char* stability_method_name(StabilityMethod m) {
    return m == StabilityMethod::heuristic ? "heuristic" : "eigenvalue";
}

namespace detail {

// L(x) extended with +inf at the boundary, for step control in the flow
// integrator (corner starts are legal there).
inline double lyapunov_unchecked(const Vec& x, const ModelParams& p) {
    const double r = p.labor_share;
    const double beta = p.feedback.beta;
    double S = 0.0, wage = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0) {
            if (p.gamma[i] > 0.0 && r > 0.0) return std::numeric_limits<double>::infinity();
            if (beta <= 0.0) return std::numeric_limits<double>::infinity();
            continue;
        }
        S += p.feedback.alpha[i] * pow_beta(x[i], beta);
        if (p.gamma[i] > 0.0) wage += p.gamma[i] * std::log(x[i]);
        mass += x[i];
    }
    if (!(S > 0.0)) return std::numeric_limits<double>::infinity();
    const double logsum = beta != 0.0 ? std::log(S) / beta : 0.0;
    return -(1.0 - r) * logsum - r * wage + mass;
}

} // namespace detail

// ---- stability heuristic ----

// Exchange criterion: x resists any infinitesimal transfer from j to i iff
// dG_i/dx_i - dG_i/dx_j < 0 for all pairs. With k_i = p_i/x_i the difference
// is (1-r) beta (k_i (1-p_i) + p_i k_j) - 1, monotone in k_j, so only the
// extreme k_j matters and the check is O(A). Returns the worst (largest)
// value over all pairs; membership in the stable region means margin < 0.
inline double stability_margin(const Vec& x, const ModelParams& p) {
    const double r = p.labor_share;
    const double beta = p.feedback.beta;
    const std::size_t A = x.size();
    if (A != p.agents) raise(errc::dimension_mismatch, "x does not match params");

    double S = 0.0;
    for (std::size_t i = 0; i < A; ++i)
        if (x[i] > 0.0) S += p.feedback.alpha[i] * detail::pow_beta(x[i], beta);
    if (!(S > 0.0)) raise(errc::all_weights_zero, "no positive feedback weight");

    // k_i = p_i / x_i = alpha_i x_i^{beta-1} / S, with boundary limits
    Vec k(A), prob(A);
    for (std::size_t i = 0; i < A; ++i) {
        if (x[i] > 0.0) {
            prob[i] = p.feedback.alpha[i] * detail::pow_beta(x[i], beta) / S;
            k[i] = prob[i] / x[i];
        } else {
            prob[i] = 0.0;
            if (beta > 1.0)
                k[i] = 0.0;
            else if (beta == 1.0)
                k[i] = p.feedback.alpha[i] / S;
            else
                return std::numeric_limits<double>::infinity(); // no stable boundary below beta=1
        }
    }

    // extreme k over j != i via the two best candidates
    std::size_t hi1 = 0, hi2 = 1, lo1 = 0, lo2 = 1;
    if (k[1] > k[0]) std::swap(hi1, hi2);
    if (k[1] < k[0]) std::swap(lo1, lo2);
    for (std::size_t j = 2; j < A; ++j) {
        if (k[j] > k[hi1]) {
            hi2 = hi1;
            hi1 = j;
        } else if (k[j] > k[hi2]) {
            hi2 = j;
        }
        if (k[j] < k[lo1]) {
            lo2 = lo1;
            lo1 = j;
        } else if (k[j] < k[lo2]) {
            lo2 = j;
        }
    }

    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < A; ++i) {
        const double kj = beta >= 0.0 ? (i == hi1 ? k[hi2] : k[hi1])
                                      : (i == lo1 ? k[lo2] : k[lo1]);
        const double diff = (1.0 - r) * beta * (k[i] * (1.0 - prob[i]) + prob[i] * kj) - 1.0;
        worst = std::max(worst, diff);
    }
    return worst;
}

inline Stability stability_heuristic(const Vec& x, const ModelParams& p) {
    const double m = stability_margin(x, p);
    return m < 0.0 ? Stability::stable : Stability::saddle_or_unstable;
}

inline bool region_p_membership(const Vec& x, const ModelParams& p) {
    return stability_margin(x, p) < 0.0;
}

// ---- Jacobian and eigenvalue check ----

// J_ij = (1-r) dp_i/dx_j - delta_ij at an interior point.
inline std::vector<Vec> jacobian_g(const Vec& x, const ModelParams& p) {
    const std::size_t A = x.size();
    if (A != p.agents) raise(errc::dimension_mismatch, "x does not match params");
    const double r = p.labor_share;
    const double beta = p.feedback.beta;
    for (double v : x)
        if (!(v > 0.0)) raise(errc::boundary_point, "jacobian needs an interior point");

    double S = 0.0;
    for (std::size_t i = 0; i < A; ++i) S += p.feedback.alpha[i] * detail::pow_beta(x[i], beta);
    Vec prob(A), k(A);
    for (std::size_t i = 0; i < A; ++i) {
        prob[i] = p.feedback.alpha[i] * detail::pow_beta(x[i], beta) / S;
        k[i] = prob[i] / x[i];
    }
    std::vector<Vec> J(A, Vec(A));
    for (std::size_t i = 0; i < A; ++i)
        for (std::size_t j = 0; j < A; ++j) {
            if (i == j)
                J[i][j] = (1.0 - r) * beta * k[i] * (1.0 - prob[i]) - 1.0;
            else
                J[i][j] = -(1.0 - r) * beta * prob[i] * k[j];
        }
    return J;
}

struct EigenVerdict {
    Stability verdict = Stability::undetermined;
    double max_real = 0.0; // largest real part on the simplex tangent space
};

// Stability by the sign of the spectral abscissa of J restricted to the
// tangent space {sum v = 0} (G preserves total mass, so J maps it to itself).
// Dense eigensolve; guarded to small systems.
inline EigenVerdict eigen_stability(const Vec& x, const ModelParams& p, double margin = 1e-9) {
    const std::size_t A = x.size();
    if (A > 50) raise(errc::dimension_mismatch, "eigenvalue check limited to 50 agents");
    const auto Jv = jacobian_g(x, p);

    Eigen::MatrixXd J(A, A);
    for (std::size_t i = 0; i < A; ++i)
        for (std::size_t j = 0; j < A; ++j) J(i, j) = Jv[i][j];

    // Householder frame whose first column is the normalized ones vector;
    // the remaining columns are an orthonormal basis of the tangent space.
    Eigen::VectorXd u = Eigen::VectorXd::Constant(A, 1.0 / std::sqrt(static_cast<double>(A)));
    u(0) -= 1.0;
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(A, A);
    if (u.squaredNorm() > 1e-30) H -= 2.0 / u.squaredNorm() * (u * u.transpose());
    const Eigen::MatrixXd B = H.rightCols(A - 1);

    const Eigen::MatrixXd T = B.transpose() * J * B;
    Eigen::EigenSolver<Eigen::MatrixXd> es(T, false);
    double max_real = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        max_real = std::max(max_real, es.eigenvalues()[i].real());

    EigenVerdict v;
    v.max_real = max_real;
    if (max_real < -margin)
        v.verdict = Stability::stable;
    else if (max_real > margin)
        v.verdict = Stability::saddle_or_unstable;
    return v;
}

// ---- share ODE ----

struct OdeClock {
    enum class Kind { lln, annual };
    Kind kind = Kind::lln;
    double mu = 0.03; // annual clock rate parameter
};

struct OdeOptions {
    double step = 1e-3;
    std::size_t max_records = 1024;
};

struct OdePath {
    std::vector<double> times;
    std::vector<Vec> points;
    double terminal_grad_norm = 0.0;
};

namespace detail {

inline double norm2(const Vec& v) {
    double s = 0.0;
    for (double a : v) s += a * a;
    return std::sqrt(s);
}

inline void clamp_renormalize(Vec& z) {
    double s = 0.0;
    for (double& v : z) {
        if (v < 0.0) v = 0.0;
        s += v;
    }
    for (double& v : z) v /= s;
}

} // namespace detail

// Explicit Euler on dz/dt = G(z) * rate(t) where rate is 1/(1+t) on the
// simulation clock (t in units of the initial mass) or log(1+mu) on the
// calendar clock (t in years). Steps that would push a component below
// -1e-9 are retried with a halved step.
inline OdePath integrate_share_ode(const SharePoint& x0, const ModelParams& p, double horizon,
                                   OdeClock clock = {}, OdeOptions opts = {}) {
    validate_params(p);
    if (!(opts.step > 0.0)) raise(errc::step_size_non_positive, "ode step must be positive");
    if (horizon < 0.0) raise(errc::negative_time, "horizon must be nonnegative");

    const double annual_rate = std::log1p(clock.mu);
    Vec z = x0.x;
    double t = 0.0;
    OdePath path;
    const double record_dt =
        opts.max_records > 1 ? horizon / static_cast<double>(opts.max_records - 1) : horizon;
    double next_record = 0.0;

    auto record = [&](double time, const Vec& zz) {
        path.times.push_back(time);
        path.points.push_back(zz);
    };

    Vec g;
    while (true) {
        g = field_g(z, p);
        if (t >= next_record - 1e-15) {
            record(t, z);
            next_record += record_dt;
        }
        if (t >= horizon) break;
        const double rate =
            clock.kind == OdeClock::Kind::lln ? 1.0 / (1.0 + t) : annual_rate;
        double h = std::min(opts.step, horizon - t);
        for (;;) {
            bool ok = true;
            for (std::size_t i = 0; i < z.size(); ++i)
                if (z[i] + h * rate * g[i] < -1e-9) {
                    ok = false;
                    break;
                }
            if (ok) break;
            h *= 0.5;
            if (h < 1e-15) raise(errc::left_simplex, "step underflow at t=" + std::to_string(t));
        }
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += h * rate * g[i];
        detail::clamp_renormalize(z);
        t += h;
    }
    if (path.times.empty() || path.times.back() < horizon) record(t, z);
    path.terminal_grad_norm = detail::norm2(field_g(z, p));
    return path;
}

// ---- fixed points ----

struct FixedPointReport {
    Vec point;
    double grad_norm = 0.0;
    bool converged = false;
    Stability stability = Stability::undetermined;
    StabilityMethod method = StabilityMethod::heuristic;
    double margin = 0.0;    // stability heuristic value at the point
    double flow_time = 0.0; // autonomous time spent to get there
};

// Follow dz/ds = G(z) until ||G|| <= tol. Explicit Euler with step control:
// the Lyapunov function must not increase (it is strictly decreasing along
// the exact flow), and the step may grow after successes because the plain
// 1e-3 step needs astronomically many iterations at tight tolerances.
inline FixedPointReport find_fixed_point(const SharePoint& start, const ModelParams& p,
                                         double tol = 1e-8, double max_flow_time = 2000.0) {
    validate_params(p);
    Vec z = start.x;
    double h = 1e-3;
    double s = 0.0;
    double L = detail::lyapunov_unchecked(z, p);

    FixedPointReport rep;
    Vec g;
    while (s < max_flow_time) {
        g = field_g(z, p);
        const double gn = detail::norm2(g);
        if (gn <= tol) {
            rep.converged = true;
            break;
        }
        for (;;) {
            Vec znew = z;
            bool positive_ok = true;
            for (std::size_t i = 0; i < z.size(); ++i) {
                znew[i] += h * g[i];
                if (znew[i] < -1e-9) positive_ok = false;
            }
            if (positive_ok) {
                detail::clamp_renormalize(znew);
                const double Lnew = detail::lyapunov_unchecked(znew, p);
                if (Lnew <= L + 1e-12 * std::max(1.0, std::abs(L)) || !std::isfinite(L)) {
                    z = std::move(znew);
                    L = Lnew;
                    s += h;
                    h = std::min(h * 1.3, 0.9);
                    break;
                }
            }
            h *= 0.5;
            if (h < 1e-14) {
                // cannot descend further; report where we are
                s = max_flow_time;
                break;
            }
        }
    }
    rep.point = z;
    rep.grad_norm = detail::norm2(field_g(z, p));
    rep.flow_time = s;
    if (rep.converged) {
        rep.margin = stability_margin(z, p);
        rep.stability = rep.margin < 0.0 ? Stability::stable : Stability::saddle_or_unstable;
    }
    return rep;
}

// ---- two-agent scan ----

struct TwoAgentFixedPoint {
    double x1 = 0.0;
    Stability stability = Stability::undetermined;
};

// All fixed points for A=2 by a sign scan of G_1(x, 1-x) over a dense grid
// plus bisection refinement. Downcrossings of G_1 are stable, upcrossings
// unstable; boundary points count when the field vanishes there.
inline std::vector<TwoAgentFixedPoint> fixed_points_two_agents(const ModelParams& p,
                                                               std::size_t grid = 20000) {
    validate_params(p);
    if (p.agents != 2) raise(errc::dimension_mismatch, "two-agent scan needs A=2");
    const double eps = 1e-12;

    auto g1 = [&](double x) { return field_g({x, 1.0 - x}, p)[0]; };

    std::vector<TwoAgentFixedPoint> out;
    auto push = [&](double root, Stability st) {
        for (const auto& fp : out)
            if (std::abs(fp.x1 - root) < 1e-9) return;
        out.push_back({root, st});
    };

    // interior sign changes
    double prev_x = eps, prev_v = g1(prev_x);
    for (std::size_t k = 1; k <= grid; ++k) {
        const double x = static_cast<double>(k) / static_cast<double>(grid);
        const double xe = std::min(1.0 - eps, std::max(eps, x));
        const double v = g1(xe);
        if (prev_v == 0.0) {
            // zero on a grid node; tangencies (no sign flip) count as unstable
            const double before = g1(std::max(eps, prev_x - 0.5 / static_cast<double>(grid)));
            push(prev_x, before > 0.0 && v < 0.0 ? Stability::stable
                                                 : Stability::saddle_or_unstable);
        } else if (prev_v * v < 0.0) {
            double lo = prev_x, hi = xe, flo = prev_v;
            for (int it = 0; it < 100 && hi - lo > 1e-13; ++it) {
                const double m = 0.5 * (lo + hi);
                const double fm = g1(m);
                if (fm == 0.0) {
                    lo = hi = m;
                    break;
                }
                if (flo * fm < 0.0)
                    hi = m;
                else {
                    lo = m;
                    flo = fm;
                }
            }
            push(0.5 * (lo + hi),
                 prev_v > 0.0 ? Stability::stable : Stability::saddle_or_unstable);
        }
        prev_x = xe;
        prev_v = v;
    }

    // simplex endpoints: fixed iff the one-sided field vanishes; stable iff
    // the interior field points at them
    if (p.feedback.beta > 0.0) {
        if (std::abs(p.labor_share * p.gamma[0]) < 1e-15)
            push(0.0, g1(1e-9) < 0.0 ? Stability::stable : Stability::saddle_or_unstable);
        if (std::abs(p.labor_share * (p.gamma[0] - 1.0)) < 1e-15)
            push(1.0, g1(1.0 - 1e-9) > 0.0 ? Stability::stable : Stability::saddle_or_unstable);
    }
    std::sort(out.begin(), out.end(),
              [](const TwoAgentFixedPoint& a, const TwoAgentFixedPoint& b) { return a.x1 < b.x1; });
    return out;
}

// ---- multistart enumeration (small A) ----

// Damped Newton on the tangent space from a lattice of interior starts plus
// corners and edge midpoints. Finds saddles too, which corner-start flows
// cannot. Intended for A <= 6 (plots, CLI reports).
inline std::vector<FixedPointReport> find_fixed_points_multistart(const ModelParams& p,
                                                                  std::size_t lattice = 14,
                                                                  double tol = 1e-11) {
    validate_params(p);
    const std::size_t A = p.agents;
    if (A > 8) raise(errc::dimension_mismatch, "multistart enumeration limited to 8 agents");
    if (A > 3) lattice = std::min<std::size_t>(lattice, A == 4 ? 8 : 4); // keep start count modest

    std::vector<Vec> starts;
    // interior lattice by recursive composition of lattice cells
    Vec cur(A, 0.0);
    auto emit = [&](auto&& self, std::size_t i, std::size_t left) -> void {
        if (i == A - 1) {
            cur[i] = static_cast<double>(left);
            Vec s(A);
            bool interior = true;
            for (std::size_t j = 0; j < A; ++j) {
                s[j] = (cur[j] + 0.5) / (static_cast<double>(lattice) + 0.5 * A);
                if (s[j] <= 0.0) interior = false;
            }
            if (interior) {
                double t = 0.0;
                for (double v : s) t += v;
                for (double& v : s) v /= t;
                starts.push_back(std::move(s));
            }
            return;
        }
        for (std::size_t v = 0; v <= left; ++v) {
            cur[i] = static_cast<double>(v);
            self(self, i + 1, left - v);
        }
    };
    emit(emit, 0, lattice);

    Eigen::VectorXd u = Eigen::VectorXd::Constant(A, 1.0 / std::sqrt(static_cast<double>(A)));
    u(0) -= 1.0;
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(A, A);
    if (u.squaredNorm() > 1e-30) H -= 2.0 / u.squaredNorm() * (u * u.transpose());
    const Eigen::MatrixXd B = H.rightCols(A - 1);

    std::vector<FixedPointReport> found;
    auto consider = [&](const Vec& pt, double gn) {
        for (const auto& f : found) {
            double d = 0.0;
            for (std::size_t i = 0; i < A; ++i) d = std::max(d, std::abs(f.point[i] - pt[i]));
            if (d < 1e-7) return;
        }
        FixedPointReport rep;
        rep.point = pt;
        rep.grad_norm = gn;
        rep.converged = true;
        rep.margin = stability_margin(pt, p);
        rep.stability = rep.margin < 0.0 ? Stability::stable : Stability::saddle_or_unstable;
        found.push_back(std::move(rep));
    };

    for (const auto& s0 : starts) {
        Vec z = s0;
        bool ok = false;
        for (int it = 0; it < 80; ++it) {
            const Vec g = field_g(z, p);
            const double gn = detail::norm2(g);
            if (gn <= tol) {
                ok = true;
                break;
            }
            bool interior = true;
            for (double v : z)
                if (!(v > 0.0)) interior = false;
            if (!interior) break;
            const auto Jv = jacobian_g(z, p);
            Eigen::MatrixXd J(A, A);
            Eigen::VectorXd gv(A);
            for (std::size_t i = 0; i < A; ++i) {
                gv(static_cast<Eigen::Index>(i)) = g[i];
                for (std::size_t j = 0; j < A; ++j) J(i, j) = Jv[i][j];
            }
            const Eigen::MatrixXd T = B.transpose() * J * B;
            const Eigen::VectorXd gt = B.transpose() * gv;
            const Eigen::VectorXd dy = T.fullPivLu().solve(-gt);
            const Eigen::VectorXd d = B * dy;
            double lambda = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 30; ++ls) {
                Vec znew(A);
                bool pos = true;
                for (std::size_t i = 0; i < A; ++i) {
                    znew[i] = z[i] + lambda * d(static_cast<Eigen::Index>(i));
                    if (znew[i] < 1e-14) pos = false;
                }
                if (pos) {
                    const double gnew = detail::norm2(field_g(znew, p));
                    if (gnew < gn * (1.0 - 1e-4 * lambda)) {
                        z = std::move(znew);
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if (!accepted) break;
        }
        if (ok) consider(z, detail::norm2(field_g(z, p)));
    }

    // corner attractors are invisible to interior Newton when beta > 1
    if (p.feedback.beta > 0.0) {
        for (std::size_t c = 0; c < A; ++c) {
            Vec corner(A, 0.0);
            corner[c] = 1.0;
            const Vec g = field_g(corner, p);
            if (detail::norm2(g) <= tol) consider(corner, detail::norm2(g));
        }
    }
    std::sort(found.begin(), found.end(), [](const FixedPointReport& a, const FixedPointReport& b) {
        return a.point[0] > b.point[0];
    });
    return found;
}

// ---- regime classification ----

enum class Regime { random_winner, intermediate, deterministic };

inline const char* regime_name(Regime r) {
    switch (r) {
    case Regime::random_winner: return "random-winner";
    case Regime::intermediate: return "intermediate";
    default: return "deterministic";
    }
}

struct RegimeReport {
    Regime regime = Regime::deterministic;
    std::vector<std::size_t> corners;
    std::vector<FixedPointReport> limits;
};

// Run the flow from wealth-concentrated corner starts. If every start ends
// at the same point the long-run outcome is deterministic; if even the
// poorest-wage agent keeps its lead when started on top, any agent can win.
inline RegimeReport classify_regime(const ModelParams& p, std::vector<std::size_t> corners = {},
                                    double tol = 1e-8, double max_flow_time = 2000.0) {
    validate_params(p);
    const std::size_t A = p.agents;
    if (corners.empty()) {
        if (A <= 12) {
            corners.resize(A);
            for (std::size_t i = 0; i < A; ++i) corners[i] = i;
        } else {
            const std::size_t poorest =
                std::min_element(p.gamma.begin(), p.gamma.end()) - p.gamma.begin();
            const std::size_t richest =
                std::max_element(p.gamma.begin(), p.gamma.end()) - p.gamma.begin();
            corners = {poorest, richest};
            if (A >= 2) corners.push_back(A / 2);
            std::sort(corners.begin(), corners.end());
            corners.erase(std::unique(corners.begin(), corners.end()), corners.end());
        }
    }
    RegimeReport rep;
    rep.corners = corners;
    for (std::size_t c : corners) {
        if (c >= A) raise(errc::index_out_of_range, "corner " + std::to_string(c));
        Vec start(A, 0.0);
        start[c] = 1.0;
        if (p.feedback.beta <= 0.0) {
            // corners are singular for beta <= 0; nudge inward
            for (std::size_t i = 0; i < A; ++i) start[i] = 1e-9;
            start[c] = 1.0 - 1e-9 * static_cast<double>(A - 1);
        }
        rep.limits.push_back(find_fixed_point(SharePoint{start}, p, tol, max_flow_time));
    }

    bool all_same = true;
    for (std::size_t k = 1; k < rep.limits.size(); ++k)
        for (std::size_t i = 0; i < A; ++i)
            if (std::abs(rep.limits[k].point[i] - rep.limits[0].point[i]) > 1e-6) all_same = false;
    if (all_same) {
        rep.regime = Regime::deterministic;
        return rep;
    }
    const std::size_t poorest = std::min_element(p.gamma.begin(), p.gamma.end()) - p.gamma.begin();
    const auto it = std::find(corners.begin(), corners.end(), poorest);
    if (it != corners.end()) {
        const auto& lim = rep.limits[it - corners.begin()].point;
        const std::size_t dominant = std::max_element(lim.begin(), lim.end()) - lim.begin();
        rep.regime = dominant == poorest ? Regime::random_winner : Regime::intermediate;
    } else {
        rep.regime = Regime::intermediate;
    }
    return rep;
}

// ---- indicators ----

struct Indicators {
    std::size_t winners = 0;        // agents with x_i > gamma_i
    std::size_t positive_field = 0; // agents with G_i(x) > 0
    double grad_norm = 0.0;
};

inline Indicators indicators(const Vec& x, const ModelParams& p) {
    Indicators ind;
    const Vec g = field_g(x, p);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > p.gamma[i]) ++ind.winners;
        if (g[i] > 0.0) ++ind.positive_field;
    }
    ind.grad_norm = detail::norm2(g);
    return ind;
}

} // namespace polyurn

#endif // POLYURN_DYNAMICS_HPP
