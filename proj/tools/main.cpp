// Command-line front end over the urn library: simulation, calibration,
// fixed-point and regime analysis, ODE prediction, trace statistics, and
// SVG plots. Flag values override config-file values which override the
// built-in defaults. Exit codes: 0 success, 2 config error, 3 data error,
// 4 runtime error.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyurn/calibration.hpp"
#include "polyurn/dynamics.hpp"
#include "polyurn/engine.hpp"
#include "polyurn/errors.hpp"
#include "polyurn/io.hpp"
#include "polyurn/model.hpp"
#include "polyurn/rng.hpp"
#include "polyurn/stats.hpp"
#include "polyurn/svg.hpp"

namespace fs = std::filesystem;
using namespace polyurn;
using io::json;

namespace {

// ---- config document ----

json load_json_file(const fs::path& path, errc bad_code = errc::malformed_json) {
    const std::string text = io::read_text_file(path);
    try {
        return json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(bad_code, path.filename().string() + ": " + e.what());
    }
}

// Fills option values from the config document unless the flag was given on
// the command line; flag > config > default.
struct ConfigDoc {
    json doc = json::object();
    const CLI::App* cmd = nullptr;

    void load(const CLI::App* owner, const std::string& path) {
        cmd = owner;
        if (path.empty()) return;
        if (!fs::exists(path)) raise(errc::missing_file, "config file not found: " + path);
        doc = load_json_file(path);
    }

    const json* find(std::initializer_list<const char*> path) const {
        const json* node = &doc;
        for (const char* key : path) {
            if (!node->is_object() || !node->contains(key)) return nullptr;
            node = &(*node)[key];
        }
        return node;
    }

    template <class T>
    void fill(const std::string& flag, T& target, std::initializer_list<const char*> path,
              bool* present = nullptr) const {
        if (cmd != nullptr && cmd->count(flag) > 0) {
            if (present != nullptr) *present = true;
            return;
        }
        const json* node = find(path);
        if (node == nullptr) return;
        try {
            target = node->get<T>();
        } catch (const nlohmann::json::exception&) {
            std::string joined;
            for (const char* key : path) joined += joined.empty() ? key : std::string(".") + key;
            raise(errc::malformed_json, "config field " + joined + " has the wrong type");
        }
        if (present != nullptr) *present = true;
    }
};

void require_file(const std::string& path, const std::string& field) {
    if (path.empty()) raise(errc::missing_field, field + " is required");
    if (!fs::exists(path)) raise(errc::missing_file, field + " not found: " + path);
}

fs::path resolve_outdir(const std::string& flag_value) {
    std::string dir = flag_value;
    if (dir.empty())
        if (const char* env = std::getenv("POLYURN_OUTDIR")) dir = env;
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    return dir;
}

// Distinct deterministic streams per purpose so initial wealth draws never
// replay inside the winner sequence.
Rng sub_rng(std::uint64_t seed, std::uint64_t salt) {
    return Rng(seed ^ (0x9E3779B97F4A7C15ULL * (salt + 1)));
}

double vec_sum(const Vec& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

Vec normalized_shares(Vec x) {
    const double s = vec_sum(x);
    if (!(s > 0.0)) raise(errc::all_zero, "state has no mass");
    for (double& v : x) v /= s;
    return x;
}

// ---- shared option blocks ----

struct ModelOpts {
    std::size_t agents = 100;
    bool agents_set = false;
    double labor_share = 0.3;
    double beta = 1.0;
    double c = 0.0;
    bool c_set = false;
    std::uint64_t seed = 42;
    std::string wage_bins;
    std::string gamma_file;
    std::string config;
    std::string outdir;
};

void add_model_flags(CLI::App* cmd, ModelOpts& o) {
    cmd->add_option("--config", o.config, "JSON config file; flags override its fields");
    cmd->add_option("-A,--agents", o.agents, "number of agents");
    cmd->add_option("-r,--labor-share", o.labor_share, "labor share r in [0,1]");
    cmd->add_option("-b,--beta", o.beta, "feedback exponent beta");
    cmd->add_option("-c,--skill-exponent", o.c, "skill exponent c: alpha_i = gamma_i^c");
    cmd->add_option("--seed", o.seed, "seed for every random draw in this command");
    cmd->add_option("--wage-bins", o.wage_bins, "wage histogram CSV; gamma sampled from it");
    cmd->add_option("--gamma-file", o.gamma_file, "single-column gamma CSV (normalized)");
    cmd->add_option("-o,--outdir", o.outdir, "output directory (default $POLYURN_OUTDIR or .)");
}

void apply_model_config(const ConfigDoc& cfg, ModelOpts& o) {
    cfg.fill("--agents", o.agents, {"params", "agents"}, &o.agents_set);
    cfg.fill("--labor-share", o.labor_share, {"params", "labor_share"});
    cfg.fill("--beta", o.beta, {"params", "beta"});
    cfg.fill("--skill-exponent", o.c, {"params", "c"}, &o.c_set);
    cfg.fill("--seed", o.seed, {"params", "seed"});
    cfg.fill("--wage-bins", o.wage_bins, {"data", "wage_bins"});
    cfg.fill("--gamma-file", o.gamma_file, {"data", "gamma"});
    cfg.fill("--outdir", o.outdir, {"output_dir"});
}

// Wage shares from the configured source: sampled from a wage histogram,
// loaded from a column file, or uniform.
Vec resolve_gamma(const ModelOpts& o) {
    if (!o.wage_bins.empty()) {
        require_file(o.wage_bins, "wage_bins");
        const WageBinTable table = io::read_wage_bins(o.wage_bins);
        Rng rng = sub_rng(o.seed, 1);
        return apply_saving_weights(sample_raw_wages(table, o.agents, rng));
    }
    if (!o.gamma_file.empty()) {
        require_file(o.gamma_file, "gamma_file");
        Vec g = io::read_gamma_column(o.gamma_file);
        const double s = vec_sum(g);
        for (double v : g)
            if (v < 0.0) raise(errc::negative_value, "gamma_file entries must be nonnegative");
        if (!(s > 0.0)) raise(errc::all_zero, "gamma_file sums to zero");
        for (double& v : g) v /= s;
        return g;
    }
    return Vec(o.agents, 1.0 / static_cast<double>(o.agents));
}

ModelParams build_params(const ModelOpts& o) {
    ModelParams p;
    p.gamma = resolve_gamma(o);
    p.agents = p.gamma.size();
    if (o.agents_set && !o.gamma_file.empty() && p.agents != o.agents)
        raise(errc::dimension_mismatch, "agents=" + std::to_string(o.agents) + " but " +
                                            o.gamma_file + " has " + std::to_string(p.agents) +
                                            " rows");
    p.labor_share = o.labor_share;
    p.feedback.beta = o.beta;
    p.feedback.alpha = o.c_set ? skill_vector(p.gamma, o.c) : Vec(p.agents, 1.0);
    validate_params(p);
    return p;
}

Engine parse_engine(const std::string& name) {
    if (name == "exact") return Engine::exact;
    if (name == "fast") return Engine::fast;
    raise(errc::unknown_kind, "params.engine must be exact or fast, got '" + name + "'");
}

// ---- simulate ----

struct SimulateOpts {
    ModelOpts model;
    std::string init_kind = "symmetric";
    double pareto_exponent = 1.5;
    std::uint64_t steps = 10000;
    std::size_t snapshots = 11;
    std::string engine = "exact";
    std::size_t ensemble = 1;
    double tail_fraction = 0.05;
};

Vec initial_wealth(const SimulateOpts& o, const Vec& gamma, Rng& rng) {
    const std::size_t A = gamma.size();
    if (o.init_kind == "symmetric") return Vec(A, 1.0);
    if (o.init_kind == "exponential") {
        Vec x(A);
        for (double& v : x) v = rng.exponential(1.0);
        return x;
    }
    if (o.init_kind == "pareto") {
        if (!(o.pareto_exponent > 1.0))
            raise(errc::non_positive_scale,
                  "init.pareto_exponent must exceed 1 to normalize mean wealth to 1");
        const double x_min = (o.pareto_exponent - 1.0) / o.pareto_exponent; // unit mean
        Vec x(A);
        for (double& v : x) v = rng.pareto(o.pareto_exponent, x_min);
        return x;
    }
    if (o.init_kind == "gamma-proportional") {
        Vec x(A);
        for (std::size_t i = 0; i < A; ++i) x[i] = static_cast<double>(A) * gamma[i];
        return x;
    }
    raise(errc::unknown_kind,
          "init.kind must be symmetric, exponential, pareto or gamma-proportional, got '" +
              o.init_kind + "'");
}

std::vector<std::uint64_t> snapshot_schedule(std::uint64_t steps, std::size_t count) {
    std::vector<std::uint64_t> at;
    if (count <= 1) {
        at.push_back(steps);
        return at;
    }
    for (std::size_t k = 0; k < count; ++k) {
        const std::uint64_t s = static_cast<std::uint64_t>(
            std::llround(static_cast<double>(steps) * static_cast<double>(k) /
                         static_cast<double>(count - 1)));
        if (at.empty() || s > at.back()) at.push_back(s);
    }
    return at;
}

void cmd_simulate(const CLI::App* cmd, SimulateOpts& o) {
    ConfigDoc cfg;
    cfg.load(cmd, o.model.config);
    apply_model_config(cfg, o.model);
    cfg.fill("--init", o.init_kind, {"init", "kind"});
    cfg.fill("--pareto-exponent", o.pareto_exponent, {"init", "pareto_exponent"});
    cfg.fill("--steps", o.steps, {"schedule", "steps"});
    cfg.fill("--snapshots", o.snapshots, {"schedule", "snapshots"});
    cfg.fill("--engine", o.engine, {"params", "engine"});
    cfg.fill("--ensemble", o.ensemble, {"schedule", "ensemble"});
    cfg.fill("--tail-fraction", o.tail_fraction, {"tail_fraction"});

    const fs::path outdir = resolve_outdir(o.model.outdir);
    const ModelParams params = build_params(o.model);
    const Engine engine = parse_engine(o.engine);

    Rng init_rng = sub_rng(o.model.seed, 2);
    WealthState state;
    state.x = initial_wealth(o, params.gamma, init_rng);
    state.initial_mass = vec_sum(state.x);

    SimulationSchedule sched;
    sched.total_steps = o.steps;
    sched.snapshot_steps = snapshot_schedule(o.steps, o.snapshots);

    if (o.ensemble > 1) {
        std::vector<std::uint64_t> seeds(o.ensemble);
        std::iota(seeds.begin(), seeds.end(), o.model.seed);
        const auto traces = ensemble_run(state, params, sched, seeds, engine);
        json reports = json::array();
        for (const SimulationTrace& trace : traces) {
            io::write_snapshot_csv(outdir / ("snapshot_" + std::to_string(trace.seed) + ".csv"),
                                   trace);
            reports.push_back(io::stats_report_json(trace, params, o.tail_fraction));
        }
        io::write_json(outdir / "ensemble_stats.json", reports);
        std::cout << "wrote " << o.ensemble << " traces and ensemble_stats.json to "
                  << outdir.string() << "\n";
        return;
    }

    const auto t0 = std::chrono::steady_clock::now();
    const SimulationTrace trace = run(state, params, sched, o.model.seed, engine);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count();
    io::write_snapshot_csv(outdir / "snapshot.csv", trace);
    io::write_json(outdir / "stats.json", io::stats_report_json(trace, params, o.tail_fraction));
    io::write_json(outdir / "metadata.json",
                   io::run_metadata_json(trace, params, wall, state.initial_mass));
    std::cout << "wrote snapshot.csv, stats.json, metadata.json to " << outdir.string() << " ("
              << o.steps << " steps, engine " << engine_name(engine) << ", "
              << io::format_double(wall) << " s)\n";
}

// ---- fixed-points ----

struct FixedPointOpts {
    ModelOpts model;
    std::string method = "heuristic";
    double tol = 1e-9;
    std::size_t start_corner = 0;
    bool from_center = false;
};

void cmd_fixed_points(const CLI::App* cmd, FixedPointOpts& o) {
    ConfigDoc cfg;
    cfg.load(cmd, o.model.config);
    apply_model_config(cfg, o.model);
    const fs::path outdir = resolve_outdir(o.model.outdir);
    const ModelParams params = build_params(o.model);

    std::vector<FixedPointReport> reports;
    if (params.agents == 2) {
        for (const TwoAgentFixedPoint& fp : fixed_points_two_agents(params)) {
            FixedPointReport rep;
            rep.point = {fp.x1, 1.0 - fp.x1};
            rep.grad_norm = detail::norm2(field_g(rep.point, params));
            rep.converged = true;
            rep.stability = fp.stability;
            rep.method = StabilityMethod::heuristic;
            rep.margin = stability_margin(rep.point, params);
            reports.push_back(std::move(rep));
        }
    } else if (params.agents <= 8 && !o.from_center && cmd->count("--start-corner") == 0) {
        reports = find_fixed_points_multistart(params, 14, o.tol);
    } else {
        SharePoint start;
        if (o.from_center || o.start_corner >= params.agents) {
            start.x = Vec(params.agents, 1.0 / static_cast<double>(params.agents));
        } else {
            // wealth concentrated on one agent, a sliver spread on the rest
            start.x = Vec(params.agents, 0.01 / static_cast<double>(params.agents - 1));
            start.x[o.start_corner] = 0.99;
        }
        reports.push_back(find_fixed_point(start, params, o.tol));
    }

    if (o.method == "eigenvalue") {
        for (FixedPointReport& rep : reports) {
            const EigenVerdict v = eigen_stability(rep.point, params);
            rep.stability = v.verdict;
            rep.method = StabilityMethod::eigenvalue;
            rep.margin = v.max_real;
        }
    } else if (o.method != "heuristic") {
        raise(errc::unknown_kind, "method must be heuristic or eigenvalue, got '" + o.method +
                                      "'");
    }

    json out = json::array();
    for (const FixedPointReport& rep : reports) {
        out.push_back(io::fixed_point_json(rep));
        std::cout << stability_name(rep.stability) << "  margin " << io::format_double(rep.margin)
                  << "  |G| " << io::format_double(rep.grad_norm) << "  x = [";
        for (std::size_t i = 0; i < rep.point.size(); ++i)
            std::cout << (i > 0 ? ", " : "") << io::format_double(rep.point[i]);
        std::cout << "]\n";
    }
    io::write_json(outdir / "fixed_points.json", out);
    std::cout << "wrote fixed_points.json to " << outdir.string() << "\n";
}

// ---- classify-regime ----

void cmd_classify_regime(const CLI::App* cmd, FixedPointOpts& o) {
    ConfigDoc cfg;
    cfg.load(cmd, o.model.config);
    apply_model_config(cfg, o.model);
    const fs::path outdir = resolve_outdir(o.model.outdir);
    const ModelParams params = build_params(o.model);

    const RegimeReport report = classify_regime(params, {}, o.tol);
    json j;
    j["regime"] = regime_name(report.regime);
    j["corners"] = report.corners;
    json limits = json::array();
    for (const FixedPointReport& rep : report.limits) limits.push_back(io::fixed_point_json(rep));
    j["limits"] = std::move(limits);
    io::write_json(outdir / "regime.json", j);
    std::cout << "regime: " << regime_name(report.regime) << " (report regime.json in "
              << outdir.string() << ")\n";
}

// ---- calibrate / fit-beta ----

struct CalibrateOpts {
    ModelOpts model;
    std::string wealth_cdf;
    std::string macro;
    std::string coupling = "correlated";
    bool fit_r = false;
    int year = 0;
    double beta_min = 0.5;
    double beta_max = 3.0;
    double beta_step = 0.025;
    bool scan_c = false;
    double c_min = 0.0;
    double c_max = 1.0;
    std::size_t c_steps = 11;
};

Coupling parse_coupling(const std::string& name) {
    if (name == "correlated") return Coupling::correlated;
    if (name == "independent") return Coupling::independent;
    raise(errc::unknown_kind, "coupling must be correlated or independent, got '" + name + "'");
}

CalibrationTarget build_target(const CalibrateOpts& o, const ModelParams& params) {
    require_file(o.wealth_cdf, "wealth_cdf");
    const auto curve = io::read_wealth_cdf(o.wealth_cdf);
    Vec wealth = wealth_quantile_sample(curve, params.agents);
    return make_calibration_target(std::move(wealth), params.gamma, parse_coupling(o.coupling),
                                   o.model.seed);
}

std::vector<double> beta_grid(const CalibrateOpts& o) {
    std::vector<double> grid;
    for (double b = o.beta_min; b <= o.beta_max + 1e-12; b += o.beta_step) grid.push_back(b);
    return grid;
}

// Labor share from the macro table: a single year when requested, otherwise
// the mean over years with usable (unflagged) estimates.
double resolve_labor_share(const CalibrateOpts& o, const MacroSeries& series, json& report) {
    const auto estimates = estimate_labor_share_series(series);
    json rows = json::array();
    for (const LaborShareEstimate& est : estimates) {
        json row;
        row["year"] = est.year;
        row["value"] = est.value;
        row["flagged"] = est.flagged;
        rows.push_back(std::move(row));
    }
    report["labor_share_estimates"] = std::move(rows);
    if (o.year != 0) {
        const LaborShareEstimate est = estimate_labor_share(series, o.year);
        if (est.flagged)
            std::cerr << "note: labor share estimate for " << o.year << " is flagged ("
                      << io::format_double(est.value) << ")\n";
        return est.value;
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (const LaborShareEstimate& est : estimates)
        if (!est.flagged) {
            sum += est.value;
            ++n;
        }
    if (n == 0) raise(errc::wealth_decrease, "macro series has no usable labor share estimate");
    return sum / static_cast<double>(n);
}

void cmd_calibrate(const CLI::App* cmd, CalibrateOpts& o) {
    ConfigDoc cfg;
    cfg.load(cmd, o.model.config);
    apply_model_config(cfg, o.model);
    cfg.fill("--wealth-cdf", o.wealth_cdf, {"data", "wealth_cdf"});
    cfg.fill("--macro", o.macro, {"data", "macro"});
    const fs::path outdir = resolve_outdir(o.model.outdir);

    if (o.model.wage_bins.empty() && o.model.gamma_file.empty())
        raise(errc::missing_field, "calibration needs --wage-bins or --gamma-file");
    ModelParams params = build_params(o.model);

    json report;
    report["agents"] = params.agents;
    report["seed"] = o.model.seed;
    report["coupling"] = o.coupling;
    report["quantile_scheme"] =
        "per-agent levels (k-0.5)/A with monotone linear interpolation in log wealth";

    double r = o.model.labor_share;
    std::string r_source = "flag";
    if (o.fit_r || !o.macro.empty()) {
        require_file(o.macro, "macro");
        const MacroSeries series = io::read_macro(o.macro);
        const double estimated = resolve_labor_share(o, series, report);
        if (o.fit_r) {
            r = estimated;
            r_source = o.year != 0 ? "macro year " + std::to_string(o.year) : "macro mean";
        }
    }
    report["labor_share"] = r;
    report["labor_share_source"] = r_source;

    const CalibrationTarget target = build_target(o, params);
    report["target_gini"] = gini(target.x);

    const BetaFit fit = fit_beta(target, r, o.beta_min, o.beta_max);
    report["beta_fit"] = {{"beta", fit.beta}, {"g_norm", fit.g_norm}, {"r", r}};

    const auto line = r_beta_line(target, beta_grid(o));
    io::write_rbline_csv(outdir / "rbline.csv", line);
    report["rbline"] = "rbline.csv";

    if (o.scan_c) {
        std::vector<double> c_grid;
        for (std::size_t k = 0; k < o.c_steps; ++k)
            c_grid.push_back(o.c_min + (o.c_max - o.c_min) * static_cast<double>(k) /
                                           static_cast<double>(o.c_steps - 1));
        const BetaCScan scan = scan_beta_c(target, r, beta_grid(o), c_grid);
        io::write_contour_csv(outdir / "contour.csv", scan);
        report["contour"] = "contour.csv";
        report["scan_best"] = {{"beta", scan.best_beta}, {"c", scan.best_c},
                               {"norm", scan.best_norm}};
    }

    io::write_json(outdir / "calibration.json", report);
    std::cout << "beta fit " << io::format_double(fit.beta) << " (|G| = "
              << io::format_double(fit.g_norm) << ") at r = " << io::format_double(r)
              << "; wrote calibration.json, rbline.csv to " << outdir.string() << "\n";
}

void cmd_fit_beta(const CLI::App* cmd, CalibrateOpts& o) {
    ConfigDoc cfg;
    cfg.load(cmd, o.model.config);
    apply_model_config(cfg, o.model);
    cfg.fill("--wealth-cdf", o.wealth_cdf, {"data", "wealth_cdf"});
    const fs::path outdir = resolve_outdir(o.model.outdir);

    if (o.model.wage_bins.empty() && o.model.gamma_file.empty())
        raise(errc::missing_field, "beta fitting needs --wage-bins or --gamma-file");
    const ModelParams params = build_params(o.model);
    const CalibrationTarget target = build_target(o, params);

    const BetaFit fit = fit_beta(target, o.model.labor_share, o.beta_min, o.beta_max);
    json j;
    j["beta"] = fit.beta;
    j["g_norm"] = fit.g_norm;
    j["r"] = o.model.labor_share;
    io::write_json(outdir / "fit_beta.json", j);
    std::cout << "beta = " << io::format_double(fit.beta)
              << ", residual |G| = " << io::format_double(fit.g_norm) << "\n";
}

// ---- predict ----

struct PredictOpts {
    ModelOpts model;
    std::string state;
    std::string metadata;
    std::string wealth_cdf;
    double years = 10.0;
    double mu = 0.03;
    double ode_step = 1e-3;
    std::size_t records = 256;
};

void cmd_predict(const CLI::App* cmd, PredictOpts& o) {
    ConfigDoc cfg;
    cfg.load(cmd, o.model.config);
    apply_model_config(cfg, o.model);
    cfg.fill("--state", o.state, {"data", "state"});
    cfg.fill("--metadata", o.metadata, {"data", "metadata"});
    cfg.fill("--wealth-cdf", o.wealth_cdf, {"data", "wealth_cdf"});
    cfg.fill("--mu", o.mu, {"timescale", "mu"});
    const fs::path outdir = resolve_outdir(o.model.outdir);

    ModelParams params;
    if (!o.metadata.empty()) {
        require_file(o.metadata, "metadata");
        const json meta = load_json_file(o.metadata);
        if (!meta.contains("params"))
            raise(errc::missing_field, o.metadata + " has no params block");
        params = io::params_from_json(meta["params"]);
        validate_params(params);
    }

    SharePoint x0;
    if (!o.state.empty()) {
        require_file(o.state, "state");
        const auto snaps = io::read_snapshot_csv(o.state);
        x0.x = normalized_shares(snaps.back().x);
    } else if (!o.wealth_cdf.empty()) {
        require_file(o.wealth_cdf, "wealth_cdf");
        const std::size_t A = params.gamma.empty() ? o.model.agents : params.agents;
        x0.x = normalized_shares(wealth_quantile_sample(io::read_wealth_cdf(o.wealth_cdf), A));
    } else {
        raise(errc::missing_field, "predict needs --state or --wealth-cdf");
    }
    if (params.gamma.empty()) {
        ModelOpts m = o.model;
        m.agents = x0.x.size();
        params = build_params(m);
    }
    if (params.agents != x0.x.size())
        raise(errc::dimension_mismatch, "initial state has " + std::to_string(x0.x.size()) +
                                            " agents, params expect " +
                                            std::to_string(params.agents));

    OdeClock clock;
    clock.kind = OdeClock::Kind::annual;
    clock.mu = o.mu;
    OdeOptions opts;
    opts.step = o.ode_step;
    opts.max_records = o.records;
    const OdePath path = integrate_share_ode(x0, params, o.years, clock, opts);

    std::vector<io::IndicatorRow> timeline;
    timeline.reserve(path.times.size());
    for (std::size_t k = 0; k < path.times.size(); ++k) {
        const Indicators ind = indicators(path.points[k], params);
        timeline.push_back({path.times[k], ind.winners, ind.positive_field, ind.grad_norm});
    }
    io::write_path_csv(outdir / "path.csv", path);
    io::write_indicator_csv(outdir / "indicators.csv", timeline);
    const io::IndicatorRow& last = timeline.back();
    std::cout << "t = " << io::format_double(last.t) << " y: winners " << last.winners
              << ", positive field " << last.positive_field << ", |G| "
              << io::format_double(last.grad_norm) << "; wrote path.csv, indicators.csv to "
              << outdir.string() << "\n";
}

// ---- analyze ----

struct AnalyzeOpts {
    std::string run_dir;
    std::string snapshot;
    std::string metadata;
    std::string outdir;
    std::string config;
    std::string series; // macro CSV switching year windows to the empirical clock
    double unit_eur = 10.0;
    double tail_fraction = 0.05;
    std::uint64_t start_step = 0;
    std::uint64_t end_step = 0;
    double start_year = -1.0;
    double end_year = -1.0;
    double mu = 0.03;
};

void cmd_analyze(const CLI::App* cmd, AnalyzeOpts& o) {
    ConfigDoc cfg;
    cfg.load(cmd, o.config);
    cfg.fill("--tail-fraction", o.tail_fraction, {"tail_fraction"});
    cfg.fill("--mu", o.mu, {"timescale", "mu"});
    cfg.fill("--timescale-series", o.series, {"timescale", "series"});
    cfg.fill("--unit", o.unit_eur, {"unit_eur"});
    cfg.fill("--outdir", o.outdir, {"output_dir"});
    if (!o.run_dir.empty()) {
        if (o.snapshot.empty()) o.snapshot = (fs::path(o.run_dir) / "snapshot.csv").string();
        if (o.metadata.empty()) o.metadata = (fs::path(o.run_dir) / "metadata.json").string();
    }
    require_file(o.snapshot, "snapshot");
    require_file(o.metadata, "metadata");
    const fs::path outdir = resolve_outdir(o.outdir);

    const json meta = load_json_file(o.metadata);
    if (!meta.contains("params")) raise(errc::missing_field, o.metadata + " has no params block");
    const ModelParams params = io::params_from_json(meta["params"]);
    validate_params(params);

    SimulationTrace trace;
    trace.snapshots = io::read_snapshot_csv(o.snapshot);
    trace.seed = meta.value("seed", std::uint64_t{0});
    trace.total_steps = meta.value("total_steps", std::uint64_t{0});
    trace.engine = meta.value("engine", std::string("exact")) == "fast" ? Engine::fast
                                                                        : Engine::exact;

    io::write_json(outdir / "stats.json",
                   io::stats_report_json(trace, params, o.tail_fraction));
    std::cout << "stats.json over " << trace.snapshots.size() << " snapshots written to "
              << outdir.string() << "\n";

    const bool step_window = cmd->count("--start-step") > 0 || cmd->count("--end-step") > 0;
    const bool year_window = o.start_year >= 0.0 || o.end_year >= 0.0;
    if (!step_window && !year_window) return;

    std::uint64_t start = o.start_step, end = o.end_step;
    if (year_window) {
        const double initial_mass = meta.value("initial_mass", 0.0);
        if (!(initial_mass > 0.0))
            raise(errc::missing_field,
                  "metadata lacks initial_mass; year windows need it to map years to steps");
        TimeScale scale;
        scale.mu = o.mu;
        if (!o.series.empty()) {
            require_file(o.series, "timescale_series");
            scale.mode = TimeScale::Mode::empirical_series;
            for (const MacroYear& y : io::read_macro(o.series))
                scale.series.push_back({static_cast<double>(y.year), y.avg_wealth_eur});
            scale.unit_eur = o.unit_eur;
            scale.agents = params.agents;
        }
        start = year_to_step(o.start_year, initial_mass, scale);
        end = year_to_step(o.end_year, initial_mass, scale);
        // snap to the nearest recorded snapshots; exact steps rarely align
        auto nearest = [&](std::uint64_t want) {
            std::uint64_t best = trace.snapshots.front().step;
            for (const Snapshot& s : trace.snapshots)
                if ((s.step > want ? s.step - want : want - s.step) >
                    (best > want ? best - want : want - best))
                    continue;
                else
                    best = s.step;
            return best;
        };
        const std::uint64_t want_start = start, want_end = end;
        start = nearest(start);
        end = nearest(end);
        if (start == end)
            raise(errc::missing_snapshot,
                  "year window maps to steps " + std::to_string(want_start) + ".." +
                      std::to_string(want_end) + " but both snap to snapshot step " +
                      std::to_string(start) + "; the run needs denser snapshots");
    }
    const auto ror = rate_of_return(trace, start, end, params);
    io::write_ror_csv(outdir / "ror.csv", ror);
    std::cout << "ror.csv for steps " << start << " to " << end << " written to "
              << outdir.string() << "\n";
}

// ---- plot ----

struct PlotOpts {
    std::string kind;
    std::string input;
    std::string output;
    std::string outdir;
    std::string config;
    double unit_eur = 10.0;
    std::uint64_t step = 0;
    double labor_share = 0.3;
    double beta = 2.0;
    std::vector<double> gamma;
};

void cmd_plot(const CLI::App* cmd, PlotOpts& o) {
    ConfigDoc cfg;
    cfg.load(cmd, o.config);
    cfg.fill("--unit", o.unit_eur, {"unit_eur"});
    cfg.fill("--outdir", o.outdir, {"output_dir"});
    const fs::path outdir = resolve_outdir(o.outdir);
    const fs::path output = o.output.empty() ? outdir / (o.kind + ".svg") : fs::path(o.output);

    std::string svg_text;
    if (o.kind == "survival") {
        require_file(o.input, "input");
        const auto snaps = io::read_snapshot_csv(o.input);
        const Snapshot* snap = &snaps.back();
        if (cmd->count("--step") > 0) {
            snap = nullptr;
            for (const Snapshot& s : snaps)
                if (s.step == o.step) snap = &s;
            if (snap == nullptr)
                raise(errc::missing_snapshot, "no snapshot at step " + std::to_string(o.step));
        }
        svg_text = svg::render_survival(survival_curve(snap->x, o.unit_eur));
    } else if (o.kind == "rbline") {
        require_file(o.input, "input");
        svg_text = svg::render_rbline(io::read_rbline_csv(o.input));
    } else if (o.kind == "timeline") {
        require_file(o.input, "input");
        svg_text = svg::render_timeline(io::read_indicator_csv(o.input));
    } else if (o.kind == "field3") {
        ModelParams p;
        p.agents = 3;
        p.labor_share = o.labor_share;
        p.gamma = o.gamma.empty() ? Vec(3, 1.0 / 3.0) : Vec(o.gamma.begin(), o.gamma.end());
        p.feedback = {o.beta, Vec(3, 1.0)};
        svg_text = svg::render_field3(p);
    } else {
        raise(errc::unknown_kind,
              "kind must be survival, rbline, timeline or field3, got '" + o.kind + "'");
    }
    io::write_file_atomic(output, svg_text);
    std::cout << "wrote " << output.string() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalized Polya urn wealth model: simulate, calibrate, analyze, plot"};
    app.require_subcommand(1);
    std::function<void()> action;

    // simulate
    SimulateOpts sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "run the urn process and report statistics");
    add_model_flags(c_sim, sim.model);
    c_sim->add_option("--init", sim.init_kind,
                      "initial wealth: symmetric|exponential|pareto|gamma-proportional");
    c_sim->add_option("--pareto-exponent", sim.pareto_exponent, "tail exponent for --init pareto");
    c_sim->add_option("-n,--steps", sim.steps, "number of urn steps");
    c_sim->add_option("--snapshots", sim.snapshots, "number of snapshots (includes start, end)");
    c_sim->add_option("--engine", sim.engine, "exact | fast");
    c_sim->add_option("--ensemble", sim.ensemble, "run this many seeds (seed, seed+1, ...)");
    c_sim->add_option("--tail-fraction", sim.tail_fraction, "tail share used for the Pareto fit");
    c_sim->callback([&] { action = [&] { cmd_simulate(c_sim, sim); }; });

    // fixed-points
    FixedPointOpts fpo;
    CLI::App* c_fp = app.add_subcommand("fixed-points", "locate zeros of the share field");
    add_model_flags(c_fp, fpo.model);
    c_fp->add_option("--method", fpo.method, "stability check: heuristic | eigenvalue");
    c_fp->add_option("--tol", fpo.tol, "field norm tolerance");
    c_fp->add_option("--start-corner", fpo.start_corner, "flow start: wealth on this agent");
    c_fp->add_flag("--from-center", fpo.from_center, "flow start: symmetric shares");
    c_fp->callback([&] { action = [&] { cmd_fixed_points(c_fp, fpo); }; });

    // classify-regime
    FixedPointOpts reg;
    CLI::App* c_reg = app.add_subcommand("classify-regime",
                                         "deterministic, intermediate or random-winner");
    add_model_flags(c_reg, reg.model);
    c_reg->add_option("--tol", reg.tol, "field norm tolerance");
    c_reg->callback([&] { action = [&] { cmd_classify_regime(c_reg, reg); }; });

    // calibrate
    CalibrateOpts cal;
    CLI::App* c_cal = app.add_subcommand("calibrate",
                                         "fit beta and the optimal labor share line to data");
    add_model_flags(c_cal, cal.model);
    c_cal->add_option("--wealth-cdf", cal.wealth_cdf, "wealth CDF CSV defining the target");
    c_cal->add_option("--macro", cal.macro, "macro series CSV for labor share estimates");
    c_cal->add_option("--coupling", cal.coupling, "wealth-wage pairing: correlated | independent");
    c_cal->add_flag("--fit-r", cal.fit_r, "take r from the macro series instead of --labor-share");
    c_cal->add_option("--year", cal.year, "use this year's labor share estimate with --fit-r");
    c_cal->add_option("--beta-min", cal.beta_min, "lower edge of the beta bracket");
    c_cal->add_option("--beta-max", cal.beta_max, "upper edge of the beta bracket");
    c_cal->add_option("--beta-step", cal.beta_step, "grid step for rbline.csv");
    c_cal->add_flag("--scan-c", cal.scan_c, "also scan the skill exponent, writing contour.csv");
    c_cal->add_option("--c-min", cal.c_min, "skill exponent scan start");
    c_cal->add_option("--c-max", cal.c_max, "skill exponent scan end");
    c_cal->add_option("--c-steps", cal.c_steps, "skill exponent scan points");
    c_cal->callback([&] { action = [&] { cmd_calibrate(c_cal, cal); }; });

    // fit-beta
    CalibrateOpts fit;
    CLI::App* c_fit = app.add_subcommand("fit-beta",
                                         "minimize the field norm over beta at fixed r");
    add_model_flags(c_fit, fit.model);
    c_fit->add_option("--wealth-cdf", fit.wealth_cdf, "wealth CDF CSV defining the target");
    c_fit->add_option("--beta-min", fit.beta_min, "lower edge of the beta bracket");
    c_fit->add_option("--beta-max", fit.beta_max, "upper edge of the beta bracket");
    c_fit->callback([&] { action = [&] { cmd_fit_beta(c_fit, fit); }; });

    // predict
    PredictOpts pre;
    CLI::App* c_pre = app.add_subcommand("predict", "integrate the share flow from a state");
    add_model_flags(c_pre, pre.model);
    c_pre->add_option("--state", pre.state, "snapshot CSV; the last snapshot seeds the flow");
    c_pre->add_option("--metadata", pre.metadata, "run metadata JSON supplying the parameters");
    c_pre->add_option("--wealth-cdf", pre.wealth_cdf, "wealth CDF CSV seeding the flow");
    c_pre->add_option("--years", pre.years, "horizon in years");
    c_pre->add_option("--mu", pre.mu, "annual growth rate of the calendar clock");
    c_pre->add_option("--ode-step", pre.ode_step, "Euler step");
    c_pre->add_option("--records", pre.records, "points recorded along the path");
    c_pre->callback([&] { action = [&] { cmd_predict(c_pre, pre); }; });

    // analyze
    AnalyzeOpts ana;
    CLI::App* c_ana = app.add_subcommand("analyze", "statistics and returns for a stored run");
    c_ana->add_option("--config", ana.config, "JSON config file; flags override its fields");
    c_ana->add_option("--run", ana.run_dir, "run directory with snapshot.csv and metadata.json");
    c_ana->add_option("--snapshot", ana.snapshot, "snapshot CSV (overrides --run)");
    c_ana->add_option("--metadata", ana.metadata, "metadata JSON (overrides --run)");
    c_ana->add_option("-o,--outdir", ana.outdir, "output directory");
    c_ana->add_option("--tail-fraction", ana.tail_fraction, "tail share used for the Pareto fit");
    c_ana->add_option("--start-step", ana.start_step, "rate-of-return window start");
    c_ana->add_option("--end-step", ana.end_step, "rate-of-return window end");
    c_ana->add_option("--start-year", ana.start_year, "window start in years (needs metadata)");
    c_ana->add_option("--end-year", ana.end_year, "window end in years (needs metadata)");
    c_ana->add_option("--mu", ana.mu, "annual growth rate for year windows");
    c_ana->add_option("--timescale-series", ana.series,
                      "macro CSV mapping calendar years to steps via average wealth");
    c_ana->add_option("--unit", ana.unit_eur, "EUR per model unit for the empirical clock");
    c_ana->callback([&] { action = [&] { cmd_analyze(c_ana, ana); }; });

    // plot
    PlotOpts plot;
    CLI::App* c_plot = app.add_subcommand("plot", "render an SVG from stored tables");
    c_plot->add_option("--config", plot.config, "JSON config file; flags override its fields");
    c_plot->add_option("--kind", plot.kind, "survival | rbline | timeline | field3")->required();
    c_plot->add_option("--input", plot.input, "input CSV (snapshot, rbline or indicator table)");
    c_plot->add_option("--output", plot.output, "output SVG path (default <outdir>/<kind>.svg)");
    c_plot->add_option("-o,--outdir", plot.outdir, "output directory");
    c_plot->add_option("--unit", plot.unit_eur, "EUR per model unit for survival plots");
    c_plot->add_option("--step", plot.step, "snapshot step for survival plots (default: last)");
    c_plot->add_option("--labor-share", plot.labor_share, "labor share for field3");
    c_plot->add_option("--beta", plot.beta, "feedback exponent for field3");
    c_plot->add_option("--gamma", plot.gamma, "three wage shares for field3")->expected(3);
    c_plot->callback([&] { action = [&] { cmd_plot(c_plot, plot); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // anything the flag parser rejects is a config problem
    }

    try {
        action();
        return 0;
    } catch (const error& e) {
        std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
        switch (category(e.code())) {
        case error_category::config: return 2;
        case error_category::data: return 3;
        case error_category::runtime: return 4;
        }
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
