#ifndef POLYURN_IO_HPP
#define POLYURN_IO_HPP

// CSV and JSON persistence: simulation traces, ODE paths, calibration
// tables, statistics reports. Writers go through an atomic temp-then-rename
// step so a crash never leaves a half-written file, and numbers are written
// in shortest round-trip form so reading back reproduces the exact double.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "polyurn/calibration.hpp"
#include "polyurn/dynamics.hpp"
#include "polyurn/engine.hpp"
#include "polyurn/errors.hpp"
#include "polyurn/model.hpp"
#include "polyurn/stats.hpp"

namespace polyurn::io {

using json = nlohmann::ordered_json;

// ---- number formatting ----

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_u64(std::uint64_t v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// ---- file primitives ----

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::io_failure, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) raise(errc::io_failure, "read failed on " + path.string());
    return std::move(buf).str();
}

inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(errc::io_failure, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out.good()) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            raise(errc::io_failure, "write failed on " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        raise(errc::io_failure, "cannot replace " + path.string() + ": " + ec.message());
    }
}

// ---- CSV core ----

// Plain numeric tables: comma cells, no quoting, first non-blank line is the
// header. Cell text is kept raw so error messages can echo it.
struct CsvTable {
    std::string source; // file name for error messages
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines; // 1-based source line per row
};

namespace detail {

inline std::vector<std::string> split_cells(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.emplace_back(line.substr(start));
            return cells;
        }
        cells.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline std::string join_cells(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) out += ',';
        out += cells[i];
    }
    return out;
}

} // namespace detail

inline CsvTable parse_csv(std::string_view text, std::string source) {
    CsvTable t;
    t.source = std::move(source);
    std::size_t pos = 0, lineno = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                              : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        auto cells = detail::split_cells(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
        } else {
            if (cells.size() != t.header.size())
                raise(errc::malformed_csv, t.source + " line " + std::to_string(lineno) +
                                               ": expected " + std::to_string(t.header.size()) +
                                               " fields, got " + std::to_string(cells.size()));
            t.rows.push_back(std::move(cells));
            t.lines.push_back(lineno);
        }
    }
    if (t.header.empty()) raise(errc::malformed_csv, t.source + ": empty file");
    return t;
}

inline void expect_header(const CsvTable& t, const std::vector<std::string>& expected) {
    if (t.header != expected)
        raise(errc::malformed_csv, t.source + ": expected header '" +
                                       detail::join_cells(expected) + "', got '" +
                                       detail::join_cells(t.header) + "'");
}

inline double cell_double(const CsvTable& t, std::size_t row, std::size_t col) {
    const std::string& cell = t.rows[row][col];
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
        raise(errc::malformed_csv, t.source + " line " + std::to_string(t.lines[row]) + ": '" +
                                       cell + "' is not a number (column '" + t.header[col] +
                                       "')");
    return v;
}

inline std::uint64_t cell_u64(const CsvTable& t, std::size_t row, std::size_t col) {
    const std::string& cell = t.rows[row][col];
    std::uint64_t v = 0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
        raise(errc::malformed_csv, t.source + " line " + std::to_string(t.lines[row]) + ": '" +
                                       cell + "' is not a nonnegative integer (column '" +
                                       t.header[col] + "')");
    return v;
}

inline void require_rows(const CsvTable& t) {
    if (t.rows.empty()) raise(errc::empty_table, t.source + ": no data rows");
}

// ---- calibration inputs ----

inline WageBinTable read_wage_bins(const std::filesystem::path& path) {
    const CsvTable t = parse_csv(read_text_file(path), path.filename().string());
    expect_header(t, {"lower_eur", "upper_eur", "count"});
    require_rows(t);
    WageBinTable table;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        WageBin bin;
        bin.lower_eur = cell_double(t, r, 0);
        bin.upper_eur = t.rows[r][1].empty() ? std::numeric_limits<double>::infinity()
                                             : cell_double(t, r, 1);
        bin.count = cell_double(t, r, 2);
        table.bins.push_back(bin);
    }
    validate_bins(table);
    return table;
}

inline MacroSeries read_macro(const std::filesystem::path& path) {
    const CsvTable t = parse_csv(read_text_file(path), path.filename().string());
    expect_header(t, {"year", "avg_net_wage_eur", "saving_rate", "avg_wealth_eur"});
    require_rows(t);
    MacroSeries series;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        MacroYear y;
        y.year = static_cast<int>(cell_u64(t, r, 0));
        y.avg_net_wage_eur = cell_double(t, r, 1);
        y.saving_rate = cell_double(t, r, 2);
        y.avg_wealth_eur = cell_double(t, r, 3);
        series.push_back(y);
    }
    return series;
}

inline std::vector<CdfPoint> read_wealth_cdf(const std::filesystem::path& path) {
    const CsvTable t = parse_csv(read_text_file(path), path.filename().string());
    expect_header(t, {"wealth_eur", "cdf"});
    require_rows(t);
    std::vector<CdfPoint> curve;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        CdfPoint pt{cell_double(t, r, 0), cell_double(t, r, 1)};
        if (!(pt.wealth_eur > 0.0))
            raise(errc::invalid_cdf, t.source + " line " + std::to_string(t.lines[r]) +
                                         ": wealth must be positive");
        if (!(pt.cdf > 0.0) || pt.cdf > 1.0)
            raise(errc::invalid_cdf, t.source + " line " + std::to_string(t.lines[r]) +
                                         ": cdf must lie in (0,1]");
        if (!curve.empty() &&
            (pt.cdf <= curve.back().cdf || pt.wealth_eur <= curve.back().wealth_eur))
            raise(errc::invalid_cdf, t.source + " line " + std::to_string(t.lines[r]) +
                                         ": cdf and wealth must be strictly increasing");
        curve.push_back(pt);
    }
    return curve;
}

// Single-column wage weights, one agent per row; callers normalize.
inline Vec read_gamma_column(const std::filesystem::path& path) {
    const CsvTable t = parse_csv(read_text_file(path), path.filename().string());
    expect_header(t, {"gamma"});
    require_rows(t);
    Vec gamma(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) gamma[r] = cell_double(t, r, 0);
    return gamma;
}

// ---- trace and path tables ----

inline std::string snapshot_csv(const SimulationTrace& trace) {
    std::string out = "step,agent_id,wealth\n";
    for (const Snapshot& snap : trace.snapshots)
        for (std::size_t i = 0; i < snap.x.size(); ++i)
            out += format_u64(snap.step) + ',' + format_u64(i) + ',' + format_double(snap.x[i]) +
                   '\n';
    return out;
}

inline void write_snapshot_csv(const std::filesystem::path& path, const SimulationTrace& trace) {
    write_file_atomic(path, snapshot_csv(trace));
}

// Accepts rows in any order; each step must cover agents 0..A-1 exactly once
// with the same A throughout.
inline std::vector<Snapshot> read_snapshot_csv(const std::filesystem::path& path) {
    const CsvTable t = parse_csv(read_text_file(path), path.filename().string());
    expect_header(t, {"step", "agent_id", "wealth"});
    require_rows(t);
    std::map<std::uint64_t, std::vector<std::pair<std::uint64_t, double>>> groups;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        groups[cell_u64(t, r, 0)].push_back({cell_u64(t, r, 1), cell_double(t, r, 2)});
    std::vector<Snapshot> snaps;
    std::size_t agents = groups.begin()->second.size();
    for (auto& [step, rows] : groups) {
        std::sort(rows.begin(), rows.end());
        if (rows.size() != agents)
            raise(errc::malformed_csv,
                  t.source + ": step " + format_u64(step) + " has " +
                      std::to_string(rows.size()) + " agents, expected " +
                      std::to_string(agents));
        Snapshot snap;
        snap.step = step;
        snap.x.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].first != i)
                raise(errc::malformed_csv, t.source + ": step " + format_u64(step) +
                                               " does not cover agents 0.." +
                                               std::to_string(rows.size() - 1) + " exactly once");
            snap.x[i] = rows[i].second;
        }
        snaps.push_back(std::move(snap));
    }
    return snaps;
}

inline std::string path_csv(const OdePath& path) {
    std::string out = "t,agent_id,share\n";
    for (std::size_t k = 0; k < path.times.size(); ++k)
        for (std::size_t i = 0; i < path.points[k].size(); ++i)
            out += format_double(path.times[k]) + ',' + format_u64(i) + ',' +
                   format_double(path.points[k][i]) + '\n';
    return out;
}

inline void write_path_csv(const std::filesystem::path& path, const OdePath& p) {
    write_file_atomic(path, path_csv(p));
}

// ---- indicator timeline ----

struct IndicatorRow {
    double t = 0.0;
    std::size_t winners = 0;
    std::size_t positive_field = 0;
    double grad_norm = 0.0;
};

inline std::string indicator_csv(const std::vector<IndicatorRow>& rows) {
    std::string out = "t,winners,positive_field,g_norm\n";
    for (const IndicatorRow& row : rows)
        out += format_double(row.t) + ',' + format_u64(row.winners) + ',' +
               format_u64(row.positive_field) + ',' + format_double(row.grad_norm) + '\n';
    return out;
}

inline void write_indicator_csv(const std::filesystem::path& path,
                                const std::vector<IndicatorRow>& rows) {
    write_file_atomic(path, indicator_csv(rows));
}

inline std::vector<IndicatorRow> read_indicator_csv(const std::filesystem::path& path) {
    const CsvTable t = parse_csv(read_text_file(path), path.filename().string());
    expect_header(t, {"t", "winners", "positive_field", "g_norm"});
    require_rows(t);
    std::vector<IndicatorRow> rows(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        rows[r].t = cell_double(t, r, 0);
        rows[r].winners = cell_u64(t, r, 1);
        rows[r].positive_field = cell_u64(t, r, 2);
        rows[r].grad_norm = cell_double(t, r, 3);
    }
    return rows;
}

// ---- calibration outputs ----

inline std::string rbline_csv(const std::vector<RBPoint>& line) {
    std::string out = "beta,r_star,g_norm\n";
    for (const RBPoint& pt : line)
        out += format_double(pt.beta) + ',' + format_double(pt.r_star) + ',' +
               format_double(pt.g_norm) + '\n';
    return out;
}

inline void write_rbline_csv(const std::filesystem::path& path,
                             const std::vector<RBPoint>& line) {
    write_file_atomic(path, rbline_csv(line));
}

inline std::vector<RBPoint> read_rbline_csv(const std::filesystem::path& path) {
    const CsvTable t = parse_csv(read_text_file(path), path.filename().string());
    expect_header(t, {"beta", "r_star", "g_norm"});
    require_rows(t);
    std::vector<RBPoint> line(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        line[r].beta = cell_double(t, r, 0);
        line[r].r_star = cell_double(t, r, 1);
        line[r].g_norm = cell_double(t, r, 2);
    }
    return line;
}

inline std::string contour_csv(const BetaCScan& scan) {
    std::string out = "beta,c,norm\n";
    for (std::size_t ci = 0; ci < scan.c_grid.size(); ++ci)
        for (std::size_t bi = 0; bi < scan.beta_grid.size(); ++bi)
            out += format_double(scan.beta_grid[bi]) + ',' + format_double(scan.c_grid[ci]) +
                   ',' + format_double(scan.norms[ci * scan.beta_grid.size() + bi]) + '\n';
    return out;
}

inline void write_contour_csv(const std::filesystem::path& path, const BetaCScan& scan) {
    write_file_atomic(path, contour_csv(scan));
}

// ---- statistics outputs ----

inline std::string ror_csv(const std::vector<RoRPoint>& points) {
    std::string out = "agent_id,quantile,ror\n";
    for (const RoRPoint& pt : points)
        out += format_u64(pt.agent) + ',' + format_double(pt.quantile) + ',' +
               format_double(pt.ror) + '\n';
    return out;
}

inline void write_ror_csv(const std::filesystem::path& path,
                          const std::vector<RoRPoint>& points) {
    write_file_atomic(path, ror_csv(points));
}

// ---- JSON reports ----

inline json params_json(const ModelParams& p) {
    json j;
    j["agents"] = p.agents;
    j["labor_share"] = p.labor_share;
    j["beta"] = p.feedback.beta;
    j["alpha"] = p.feedback.alpha;
    j["gamma"] = p.gamma;
    return j;
}

inline json run_metadata_json(const SimulationTrace& trace, const ModelParams& params,
                              double wall_seconds, double initial_mass = 0.0) {
    json j;
    j["seed"] = trace.seed;
    j["engine"] = engine_name(trace.engine);
    j["total_steps"] = trace.total_steps;
    j["snapshots"] = trace.snapshots.size();
    j["draws_per_step"] = trace.draws_per_step;
    j["params_hash"] = trace.params_hash;
    j["initial_mass"] = initial_mass;
    j["wall_seconds"] = wall_seconds;
    j["params"] = params_json(params);
    return j;
}

inline ModelParams params_from_json(const json& j) {
    ModelParams p;
    if (!j.contains("agents") || !j.contains("labor_share") || !j.contains("beta") ||
        !j.contains("alpha") || !j.contains("gamma"))
        raise(errc::missing_field, "params need agents, labor_share, beta, alpha, gamma");
    p.agents = j["agents"].get<std::size_t>();
    p.labor_share = j["labor_share"].get<double>();
    p.feedback.beta = j["beta"].get<double>();
    p.feedback.alpha = j["alpha"].get<Vec>();
    p.gamma = j["gamma"].get<Vec>();
    return p;
}

// Per-snapshot inequality report. Quantile rows that would select less than
// one agent are dropped; tail exponent and rank correlation fall back to
// null when the snapshot cannot support them (thin tail, constant input).
inline json snapshot_stats_json(const Snapshot& snap, const ModelParams& params,
                                double tail_fraction = 0.05) {
    json j;
    j["step"] = snap.step;
    j["gini"] = gini(snap.x);
    std::vector<double> feasible;
    for (double eps : {0.5, 0.1, 0.01, 0.001, 0.0001})
        if (eps * static_cast<double>(snap.x.size()) >= 1.0) feasible.push_back(eps);
    json shares = json::array();
    for (const ShareRow& row : top_shares(snap.x, feasible)) {
        json s;
        s["epsilon"] = row.epsilon;
        s["group"] = row.group;
        s["share"] = row.share;
        s["adjusted"] = row.adjusted;
        shares.push_back(std::move(s));
    }
    j["top_shares"] = std::move(shares);
    try {
        j["tail_exponent"] = pareto_tail_fit(snap.x, tail_fraction);
    } catch (const error&) {
        j["tail_exponent"] = nullptr;
    }
    try {
        j["rank_correlation_wages"] = rank_correlation(snap.x, params.gamma);
    } catch (const error&) {
        j["rank_correlation_wages"] = nullptr;
    }
    return j;
}

inline json stats_report_json(const SimulationTrace& trace, const ModelParams& params,
                              double tail_fraction = 0.05) {
    json j;
    j["seed"] = trace.seed;
    j["engine"] = engine_name(trace.engine);
    j["total_steps"] = trace.total_steps;
    j["tail_fraction"] = tail_fraction;
    json snaps = json::array();
    for (const Snapshot& snap : trace.snapshots)
        snaps.push_back(snapshot_stats_json(snap, params, tail_fraction));
    j["snapshots"] = std::move(snaps);
    return j;
}

inline json fixed_point_json(const FixedPointReport& report) {
    json j;
    j["point"] = report.point;
    j["grad_norm"] = report.grad_norm;
    j["converged"] = report.converged;
    j["stability"] = stability_name(report.stability);
    j["method"] = stability_method_name(report.method);
    j["margin"] = report.margin;
    j["flow_time"] = report.flow_time;
    return j;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

} // namespace polyurn::io

#endif // POLYURN_IO_HPP
