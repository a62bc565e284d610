#ifndef POLYURN_ENGINE_HPP
#define POLYURN_ENGINE_HPP

// Simulation of the urn process. Two interchangeable engines sample the
// winner of each step from p_i = alpha_i X_i^beta / sum_j alpha_j X_j^beta:
//
//  - exact: recomputes all A weights every step; the O(A) reference.
//  - fast:  rejection sampling against per-agent envelope weights held in a
//           prefix-sum tree. Envelopes upper-bound the true weight for a
//           whole epoch of K steps, so a step touches O(log A) tree nodes;
//           the O(A) refresh is amortized over the epoch. Wealth itself is
//           maintained lazily: X_i = Xhat_i + (n - nhat) r gamma_i
//           + (1-r) wins_i, folded into Xhat at each refresh.
//
// Both engines draw from the identical distribution; the fast one is exact
// because acceptance uses the stored envelope leaf it was selected with.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "polyurn/errors.hpp"
#include "polyurn/model.hpp"
#include "polyurn/prefix_tree.hpp"
#include "polyurn/rng.hpp"

namespace polyurn {

enum class Engine { exact, fast };

inline const char* engine_name(Engine e) { return e == Engine::exact ? "exact" : "fast"; }

// ---- exact stepper ----

// One urn step: draw the winner, pay r gamma to everyone and 1-r extra to
// the winner. Returns the winner index. `weights` is caller-provided scratch
// so tight loops do not allocate.
inline std::size_t step_exact(WealthState& s, const ModelParams& p, Rng& rng, Vec& weights) {
    const std::size_t A = s.x.size();
    const double beta = p.feedback.beta;
    weights.resize(A);
    double total = 0.0;
    for (std::size_t i = 0; i < A; ++i) {
        const double w = p.feedback.alpha[i] * detail::pow_beta(s.x[i], beta);
        weights[i] = w;
        total += w;
    }
    if (!(total > 0.0) || !std::isfinite(total))
        raise(errc::all_weights_zero, "total feedback weight " + std::to_string(total) +
                                          " at step " + std::to_string(s.step));
    const double u = rng.uniform01() * total;
    std::size_t winner = A - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < A; ++i) {
        acc += weights[i];
        if (u < acc) {
            winner = i;
            break;
        }
    }
    const double r = p.labor_share;
    if (r != 0.0)
        for (std::size_t i = 0; i < A; ++i) s.x[i] += r * p.gamma[i];
    s.x[winner] += 1.0 - r;
    ++s.step;
    return winner;
}

inline std::size_t step_exact(WealthState& s, const ModelParams& p, Rng& rng) {
    Vec scratch;
    return step_exact(s, p, rng, scratch);
}

// ---- fast sampler ----

struct SamplerStats {
    std::uint64_t steps = 0;
    std::uint64_t draws = 0;
    std::uint64_t refreshes = 0;
    double draws_per_step() const { return steps ? static_cast<double>(draws) / steps : 0.0; }
};

class FastSampler {
  public:
    // epoch_hint <= 0 picks the default max(1, A/8)
    FastSampler(const WealthState& s, const ModelParams& p, std::int64_t epoch_hint = 0)
        : params_(p), xhat_(s.x), wins_(s.x.size(), 0), step_(s.step) {
        validate_state(s, p);
        const std::size_t A = s.x.size();
        drift_.resize(A);
        for (std::size_t i = 0; i < A; ++i)
            drift_[i] = p.labor_share * p.gamma[i] + (1.0 - p.labor_share);
        epoch_ = epoch_hint > 0 ? static_cast<std::uint64_t>(epoch_hint)
                                : std::max<std::uint64_t>(1, A / 8);
        epoch_cap_ = std::max<std::uint64_t>(64, 8 * A);
        scratch_.resize(A);
        refresh();
    }

    std::uint64_t step() const { return step_; }
    const SamplerStats& stats() const { return stats_; }
    std::uint64_t epoch_length() const { return epoch_; }

    // Rejection draw from p_i = w_i / sum w_i without advancing the process.
    // Selection is proportional to the stored envelopes; accepting with
    // probability w_i / env_i leaves exactly the target distribution.
    std::size_t draw_winner(Rng& rng) const {
        const double beta = params_.feedback.beta;
        for (std::uint64_t guard = 0;; ++guard) {
            ++stats_.draws;
            const std::size_t i = tree_.find(rng.uniform01() * tree_.total());
            const double env = tree_.get(i);
            if (env <= 0.0) continue;
            const double w = params_.feedback.alpha[i] * detail::pow_beta(current_wealth(i), beta);
            if (w > env * (1.0 + 1e-9))
                raise(errc::envelope_violated,
                      "weight " + std::to_string(w) + " exceeds envelope " +
                          std::to_string(env) + " for agent " + std::to_string(i));
            if (rng.uniform01() * env < w) return i;
            if (guard > (epoch_ + 8) * 100000ULL)
                raise(errc::envelope_violated, "rejection loop failed to terminate");
        }
    }

    // Draw one winner and advance the process one step.
    std::size_t sample_winner(Rng& rng) {
        if (since_refresh_ == epoch_) refresh();
        const std::size_t winner = draw_winner(rng);
        wins_[winner] += 1;
        ++since_refresh_;
        ++step_;
        ++stats_.steps;
        // tighten the winner's envelope to the remaining epoch horizon
        const std::uint64_t remaining = epoch_ - since_refresh_;
        tree_.set(winner, envelope(current_wealth(winner), winner, remaining));
        return winner;
    }

    double current_wealth(std::size_t i) const {
        return xhat_[i] + static_cast<double>(step_ - stephat_) * params_.labor_share * params_.gamma[i] +
               (1.0 - params_.labor_share) * static_cast<double>(wins_[i]);
    }

    WealthState materialize(double initial_mass) const {
        WealthState s;
        s.step = step_;
        s.initial_mass = initial_mass;
        s.x.resize(xhat_.size());
        for (std::size_t i = 0; i < xhat_.size(); ++i) s.x[i] = current_wealth(i);
        return s;
    }

    const std::vector<std::uint64_t>& wins_since_refresh() const { return wins_; }

    // Fold lazy increments into Xhat and rebuild envelopes. The epoch length
    // adapts so the predicted acceptance sum(w)/sum(env) stays >= 0.8.
    void refresh() {
        const std::size_t A = xhat_.size();
        for (std::size_t i = 0; i < A; ++i) xhat_[i] = current_wealth(i);
        std::fill(wins_.begin(), wins_.end(), 0);
        stephat_ = step_;
        since_refresh_ = 0;
        ++stats_.refreshes;

        if (grow_next_ && epoch_ < epoch_cap_) epoch_ = std::min(epoch_cap_, epoch_ * 2);
        grow_next_ = false;

        const double beta = params_.feedback.beta;
        double weight_sum = 0.0;
        for (std::size_t i = 0; i < A; ++i)
            weight_sum += params_.feedback.alpha[i] * detail::pow_beta(xhat_[i], beta);
        if (!(weight_sum > 0.0) || !std::isfinite(weight_sum))
            raise(errc::all_weights_zero, "total feedback weight at step " + std::to_string(step_));

        for (;;) {
            double env_sum = 0.0;
            for (std::size_t i = 0; i < A; ++i) {
                scratch_[i] = envelope(xhat_[i], i, epoch_);
                env_sum += scratch_[i];
            }
            const double predicted = weight_sum / env_sum;
            if (predicted >= 0.8 || epoch_ == 1) {
                if (predicted > 0.93) grow_next_ = true;
                break;
            }
            epoch_ = std::max<std::uint64_t>(1, epoch_ / 2);
        }
        tree_.assign(scratch_);
    }

  private:
    // Upper bound on alpha_i X_i^beta over the next `steps` steps: wealth can
    // grow by at most steps*(r gamma_i + 1-r) and never shrinks, so growing
    // beta uses the top of the range and beta <= 0 the bottom.
    double envelope(double x, std::size_t i, std::uint64_t steps) const {
        const double beta = params_.feedback.beta;
        const double top = x + static_cast<double>(steps) * drift_[i];
        return params_.feedback.alpha[i] * detail::pow_beta(beta > 0.0 ? top : x, beta);
    }

    ModelParams params_;
    Vec xhat_;
    Vec drift_;
    Vec scratch_;
    std::vector<std::uint64_t> wins_;
    PrefixSumTree tree_;
    std::uint64_t step_ = 0;
    std::uint64_t stephat_ = 0;
    std::uint64_t since_refresh_ = 0;
    std::uint64_t epoch_ = 1;
    std::uint64_t epoch_cap_ = 64;
    bool grow_next_ = false;
    mutable SamplerStats stats_;
};

// ---- schedules and traces ----

struct SimulationSchedule {
    std::uint64_t total_steps = 0;
    std::vector<std::uint64_t> snapshot_steps; // absolute step counts, strictly increasing
    bool record_win_counts = true;
};

inline void validate_schedule(const SimulationSchedule& sched, std::uint64_t start_step) {
    std::uint64_t prev = 0;
    bool first = true;
    for (std::uint64_t s : sched.snapshot_steps) {
        if (s < start_step || s > start_step + sched.total_steps)
            raise(errc::index_out_of_range,
                  "snapshot step " + std::to_string(s) + " outside run range");
        if (!first && s <= prev)
            raise(errc::index_out_of_range, "snapshot steps must be strictly increasing");
        prev = s;
        first = false;
    }
}

struct Snapshot {
    std::uint64_t step = 0;
    Vec x;
    std::vector<std::uint64_t> wins; // cumulative since run start; empty if not recorded
};

struct SimulationTrace {
    std::vector<Snapshot> snapshots;
    std::vector<std::uint64_t> win_counts; // cumulative over the whole run
    std::uint64_t seed = 0;
    std::uint64_t total_steps = 0;
    Engine engine = Engine::exact;
    std::uint64_t params_hash = 0;
    double draws_per_step = 1.0; // fast engine redraw diagnostic
};

inline std::uint64_t hash_params(const ModelParams& p) {
    // FNV-1a over the canonical parameter bytes; identifies a trace's model
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xff;
            h *= 1099511628211ULL;
        }
    };
    auto mixd = [&](double d) {
        std::uint64_t v;
        static_assert(sizeof(v) == sizeof(d));
        __builtin_memcpy(&v, &d, sizeof(v));
        mix(v);
    };
    mix(p.agents);
    mixd(p.labor_share);
    mixd(p.feedback.beta);
    for (double a : p.feedback.alpha) mixd(a);
    for (double g : p.gamma) mixd(g);
    return h;
}

// Run `sched.total_steps` steps from `state`, recording scheduled snapshots.
inline SimulationTrace run(WealthState state, const ModelParams& p,
                           const SimulationSchedule& sched, std::uint64_t seed,
                           Engine engine = Engine::exact) {
    validate_params(p);
    validate_state(state, p);
    validate_schedule(sched, state.step);

    SimulationTrace trace;
    trace.seed = seed;
    trace.engine = engine;
    trace.total_steps = sched.total_steps;
    trace.params_hash = hash_params(p);
    trace.win_counts.assign(p.agents, 0);

    Rng rng(seed);
    const std::uint64_t end_step = state.step + sched.total_steps;
    std::size_t snap_idx = 0;

    auto record = [&](const WealthState& s) {
        Snapshot snap;
        snap.step = s.step;
        snap.x = s.x;
        if (sched.record_win_counts) snap.wins = trace.win_counts;
        trace.snapshots.push_back(std::move(snap));
    };

    if (engine == Engine::exact) {
        Vec scratch;
        while (true) {
            while (snap_idx < sched.snapshot_steps.size() &&
                   sched.snapshot_steps[snap_idx] == state.step) {
                record(state);
                ++snap_idx;
            }
            if (state.step >= end_step) break;
            const std::size_t w = step_exact(state, p, rng, scratch);
            trace.win_counts[w] += 1;
        }
    } else {
        FastSampler sampler(state, p, 0);
        const double n0 = state.initial_mass;
        while (true) {
            while (snap_idx < sched.snapshot_steps.size() &&
                   sched.snapshot_steps[snap_idx] == sampler.step()) {
                record(sampler.materialize(n0));
                ++snap_idx;
            }
            if (sampler.step() >= end_step) break;
            const std::size_t w = sampler.sample_winner(rng);
            trace.win_counts[w] += 1;
        }
        trace.draws_per_step = sampler.stats().draws_per_step();
    }
    return trace;
}

// Independent replicas over distinct seeds, sharded across threads. Results
// are ordered like `seeds` and bit-identical regardless of thread count.
inline std::vector<SimulationTrace> ensemble_run(const WealthState& state, const ModelParams& p,
                                                 const SimulationSchedule& sched,
                                                 const std::vector<std::uint64_t>& seeds,
                                                 Engine engine = Engine::exact,
                                                 unsigned threads = 0) {
    {
        std::vector<std::uint64_t> sorted = seeds;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            raise(errc::duplicate_seeds, "ensemble seeds must be distinct");
    }
    std::vector<SimulationTrace> out(seeds.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(seeds.size()));
    if (threads <= 1) {
        for (std::size_t k = 0; k < seeds.size(); ++k)
            out[k] = run(state, p, sched, seeds[k], engine);
        return out;
    }
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex mtx;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t k;
                {
                    std::lock_guard<std::mutex> lock(mtx);
                    if (next >= seeds.size()) return;
                    k = next++;
                }
                out[k] = run(state, p, sched, seeds[k], engine);
            }
        });
    for (auto& th : pool) th.join();
    return out;
}

// ---- model time ----

// Mapping between years and urn steps. In constant-growth mode average
// wealth grows by a factor (1+mu) per year, so t years from the start
// correspond to n = floor(((1+mu)^t - 1) N) steps. In empirical mode a
// year -> average-wealth series anchors calendar years to total mass.
struct TimeScale {
    enum class Mode { constant_growth, empirical_series };
    Mode mode = Mode::constant_growth;
    double mu = 0.03;
    std::vector<std::pair<double, double>> series; // (year, avg wealth EUR), increasing
    double unit_eur = 10.0;                        // EUR per model unit
    std::size_t agents = 0;                        // used by empirical mode
};

inline std::uint64_t year_to_step(double t, double initial_mass, const TimeScale& ts) {
    if (ts.mode == TimeScale::Mode::constant_growth) {
        if (t < 0.0) raise(errc::negative_time, "t = " + std::to_string(t));
        if (!(ts.mu > -1.0)) raise(errc::negative_time, "mu must exceed -1");
        const double n = (std::pow(1.0 + ts.mu, t) - 1.0) * initial_mass;
        return static_cast<std::uint64_t>(n);
    }
    if (ts.series.size() < 2 || ts.agents == 0 || !(ts.unit_eur > 0.0))
        raise(errc::empty_table, "empirical time scale needs a series, agents and unit_eur");
    if (t < ts.series.front().first || t > ts.series.back().first)
        raise(errc::index_out_of_range, "year " + std::to_string(t) + " outside series span");
    double wealth = ts.series.back().second;
    for (std::size_t k = 1; k < ts.series.size(); ++k) {
        if (t <= ts.series[k].first) {
            const auto& [y0, w0] = ts.series[k - 1];
            const auto& [y1, w1] = ts.series[k];
            wealth = w0 + (w1 - w0) * (t - y0) / (y1 - y0);
            break;
        }
    }
    const double mass = static_cast<double>(ts.agents) * wealth / ts.unit_eur;
    if (mass <= initial_mass) return 0;
    return static_cast<std::uint64_t>(mass - initial_mass + 0.5);
}

inline double step_to_year(std::uint64_t n, double initial_mass, const TimeScale& ts) {
    if (ts.mode == TimeScale::Mode::constant_growth) {
        if (!(ts.mu > -1.0) || ts.mu == 0.0)
            raise(errc::negative_time, "mu must exceed -1 and be nonzero");
        return std::log1p(static_cast<double>(n) / initial_mass) / std::log1p(ts.mu);
    }
    if (ts.series.size() < 2 || ts.agents == 0 || !(ts.unit_eur > 0.0))
        raise(errc::empty_table, "empirical time scale needs a series, agents and unit_eur");
    const double wealth =
        (initial_mass + static_cast<double>(n)) * ts.unit_eur / static_cast<double>(ts.agents);
    const auto& first = ts.series.front();
    const auto& last = ts.series.back();
    if (wealth < first.second || wealth > last.second)
        raise(errc::index_out_of_range, "wealth " + std::to_string(wealth) + " outside series span");
    for (std::size_t k = 1; k < ts.series.size(); ++k) {
        const auto& [y0, w0] = ts.series[k - 1];
        const auto& [y1, w1] = ts.series[k];
        if (!(w1 > w0))
            raise(errc::malformed_csv, "time-scale series must have increasing wealth");
        if (wealth <= w1) return y0 + (y1 - y0) * (wealth - w0) / (w1 - w0);
    }
    return last.first;
}

// Steps needed to bring average wealth to a target (EUR), given the unit.
inline std::uint64_t calibrated_step_count(double target_avg_wealth_eur, double unit_eur,
                                           std::size_t agents, double initial_mass) {
    const double mass = static_cast<double>(agents) * target_avg_wealth_eur / unit_eur;
    if (mass <= initial_mass) return 0;
    return static_cast<std::uint64_t>(mass - initial_mass + 0.5);
}

} // namespace polyurn

#endif // POLYURN_ENGINE_HPP
