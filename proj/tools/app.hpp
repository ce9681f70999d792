// Command-line application layer: configuration resolution, experiment
// dispatch and CSV/JSON serialization. Exit statuses: 0 success, 1 failed
// verification checks, 2 invalid configuration, 3 convergence failure
// (output still written, rows flagged), 4 resource limit.
#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tworabi/experiments.hpp"
#include "tworabi/verification.hpp"

#ifndef TWORABI_VERSION
#define TWORABI_VERSION "0.0.0"
#endif

namespace tworabi::app {

using ojson = nlohmann::ordered_json;

enum Status { kOk = 0, kChecksFailed = 1, kInvalidConfig = 2, kNotConverged = 3, kResourceLimit = 4 };

inline constexpr std::size_t kMaxGridPoints = 250000;
inline constexpr std::size_t kMaxSteps = 1000000;

struct RunConfig {
    std::string command;
    std::string model = "h1";
    double omega0 = 1.0;
    double omega1 = 1.0;
    double omega2 = 1.0;
    std::vector<double> g1{0.0};
    std::vector<double> g2{0.0};
    std::optional<int> nmax;  // empty: automatic truncation
    double tol = 1e-6;
    int nmax_cap = 40;
    std::size_t k = 12;
    bool labels = false;
    double tmax = 30.0;
    std::size_t steps = 600;
    double eps = 0.1;
    double step = 0.01;
    double gmax = 2.0;
    std::array<double, 2> direction{1.0, 0.0};
    std::string format = "csv";
    std::string out = "-";
    unsigned workers = 0;

    ModelParams params(double a = 0.0, double b = 0.0) const { return {omega0, omega1, omega2, a, b}; }
};

inline const std::set<std::string>& commands() {
    static const std::set<std::string> c{"phase-scan", "spectrum", "evolve", "verify", "critical"};
    return c;
}

inline const std::set<std::string>& config_keys() {
    static const std::set<std::string> k{"command", "model", "omega0", "omega", "omega1", "omega2", "g1",
                                         "g2", "nmax", "tol", "nmax-cap", "k", "labels", "tmax",
                                         "steps", "eps", "step", "gmax", "direction", "format", "out",
                                         "workers"};
    return k;
}

// ---------------------------------------------------------------------------
// Value parsing. Every key accepts either its JSON-native type or a string,
// so flags (always strings) and config files go through the same path.

namespace detail {

inline double parse_double(const std::string& s, const std::string& key) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || s.empty())
        throw InvalidArgument("'" + key + "': cannot parse '" + s + "' as a number");
    return v;
}

inline long long parse_int(const std::string& s, const std::string& key) {
    long long v = 0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || s.empty())
        throw InvalidArgument("'" + key + "': cannot parse '" + s + "' as an integer");
    return v;
}

inline double as_double(const ojson& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_double(v.get<std::string>(), key);
    throw InvalidArgument("'" + key + "' must be a number");
}

inline long long as_int(const ojson& v, const std::string& key) {
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_string()) return parse_int(v.get<std::string>(), key);
    throw InvalidArgument("'" + key + "' must be an integer");
}

inline std::size_t as_count(const ojson& v, const std::string& key) {
    const long long n = as_int(v, key);
    if (n < 0) throw InvalidArgument("'" + key + "' must be non-negative");
    return std::size_t(n);
}

inline bool as_bool(const ojson& v, const std::string& key) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "true" || s == "1" || s == "on") return true;
        if (s == "false" || s == "0" || s == "off") return false;
    }
    throw InvalidArgument("'" + key + "' must be a boolean");
}

inline std::string as_string(const ojson& v, const std::string& key) {
    if (!v.is_string()) throw InvalidArgument("'" + key + "' must be a string");
    return v.get<std::string>();
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

// "start:stop:count", "a,b,c", a scalar, or a JSON array of numbers.
inline std::vector<double> as_grid(const ojson& v, const std::string& key) {
    std::vector<double> out;
    if (v.is_array()) {
        for (const ojson& x : v) out.push_back(as_double(x, key));
    } else if (v.is_number()) {
        out.push_back(v.get<double>());
    } else if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s.find(':') != std::string::npos) {
            const auto parts = split(s, ':');
            if (parts.size() != 3) throw InvalidArgument("'" + key + "': range must be start:stop:count");
            const long long count = parse_int(parts[2], key);
            if (count < 1) throw InvalidArgument("'" + key + "': range count must be >= 1");
            if (std::size_t(count) > kMaxGridPoints) throw ResourceLimit("'" + key + "': range count exceeds cap");
            out = linspace(parse_double(parts[0], key), parse_double(parts[1], key), std::size_t(count));
        } else {
            for (const std::string& part : split(s, ',')) out.push_back(parse_double(part, key));
        }
    } else {
        throw InvalidArgument("'" + key + "' must be a number, list or start:stop:count range");
    }
    if (out.empty()) throw InvalidArgument("'" + key + "' is empty");
    for (double x : out)
        if (!std::isfinite(x)) throw InvalidArgument("'" + key + "' contains a non-finite value");
    return out;
}

}  // namespace detail

// Builds a validated RunConfig from a JSON object of option values. Keys not
// in config_keys() are rejected.
inline RunConfig resolve_config(const ojson& src) {
    using namespace detail;
    if (!src.is_object()) throw InvalidArgument("configuration must be a JSON object");
    for (const auto& [key, value] : src.items())
        if (!config_keys().count(key)) throw InvalidArgument("unknown configuration key '" + key + "'");

    RunConfig c;
    if (!src.contains("command")) throw InvalidArgument("no command given");
    c.command = as_string(src.at("command"), "command");
    if (!commands().count(c.command)) throw InvalidArgument("unknown command '" + c.command + "'");
    if (src.contains("model")) c.model = as_string(src.at("model"), "model");
    if (c.model != "h1" && c.model != "h2" && c.model != "rabi")
        throw InvalidArgument("model must be h1, h2 or rabi");

    if (src.contains("omega0")) c.omega0 = as_double(src.at("omega0"), "omega0");
    if (src.contains("omega")) {
        if (src.contains("omega1") || src.contains("omega2"))
            throw InvalidArgument("'omega' cannot be combined with 'omega1'/'omega2'");
        c.omega1 = c.omega2 = as_double(src.at("omega"), "omega");
    }
    if (src.contains("omega1")) c.omega1 = as_double(src.at("omega1"), "omega1");
    if (src.contains("omega2")) c.omega2 = as_double(src.at("omega2"), "omega2");
    if (src.contains("g1")) c.g1 = as_grid(src.at("g1"), "g1");
    if (src.contains("g2")) c.g2 = as_grid(src.at("g2"), "g2");

    // per-command defaults
    if (c.command == "spectrum") c.nmax = 24;
    if (c.command == "critical") c.tol = 1e-10;
    if (src.contains("nmax")) {
        const ojson& v = src.at("nmax");
        if (v.is_string() && v.get<std::string>() == "auto") {
            c.nmax.reset();
        } else {
            const long long n = as_int(v, "nmax");
            if (n < 1) throw InvalidArgument("'nmax' must be >= 1 or \"auto\"");
            c.nmax = int(std::min<long long>(n, 1 << 20));
        }
    }
    if (src.contains("tol")) c.tol = as_double(src.at("tol"), "tol");
    if (src.contains("nmax-cap")) c.nmax_cap = int(std::min<long long>(as_int(src.at("nmax-cap"), "nmax-cap"), 1 << 20));
    if (src.contains("k")) c.k = as_count(src.at("k"), "k");
    if (src.contains("labels")) c.labels = as_bool(src.at("labels"), "labels");
    if (src.contains("tmax")) c.tmax = as_double(src.at("tmax"), "tmax");
    if (src.contains("steps")) c.steps = as_count(src.at("steps"), "steps");
    if (src.contains("eps")) c.eps = as_double(src.at("eps"), "eps");
    if (src.contains("step")) c.step = as_double(src.at("step"), "step");
    if (src.contains("gmax")) c.gmax = as_double(src.at("gmax"), "gmax");
    if (src.contains("direction")) {
        const std::vector<double> d = as_grid(src.at("direction"), "direction");
        if (d.size() != 2) throw InvalidArgument("'direction' needs two components");
        c.direction = {d[0], d[1]};
    }
    if (src.contains("format")) c.format = as_string(src.at("format"), "format");
    if (c.format != "csv" && c.format != "json") throw InvalidArgument("format must be csv or json");
    if (src.contains("out")) c.out = as_string(src.at("out"), "out");
    if (src.contains("workers")) c.workers = unsigned(std::min<std::size_t>(as_count(src.at("workers"), "workers"), 1024));

    if (!(c.tol > 0.0)) throw InvalidArgument("'tol' must be > 0");
    if (c.nmax_cap < 1) throw InvalidArgument("'nmax-cap' must be >= 1");
    if (c.k < 1) throw InvalidArgument("'k' must be >= 1");
    if (!(c.tmax > 0.0) || !std::isfinite(c.tmax)) throw InvalidArgument("'tmax' must be > 0");
    if (c.steps < 1) throw InvalidArgument("'steps' must be >= 1");
    if (c.steps > kMaxSteps) throw ResourceLimit("'steps' exceeds cap");
    if (c.g1.size() * c.g2.size() > kMaxGridPoints) throw ResourceLimit("grid exceeds the point cap");
    c.params().validate();
    for (double g : c.g1)
        if (g < 0.0) throw InvalidArgument("couplings must be >= 0");
    for (double g : c.g2)
        if (g < 0.0) throw InvalidArgument("couplings must be >= 0");
    return c;
}

// Canonical echo of a resolved configuration for the metadata block. Output
// routing (out, workers) is left out because it does not affect results.
inline ojson to_json(const RunConfig& c) {
    ojson j;
    j["command"] = c.command;
    j["model"] = c.model;
    j["omega0"] = c.omega0;
    j["omega1"] = c.omega1;
    j["omega2"] = c.omega2;
    j["g1"] = c.g1;
    j["g2"] = c.g2;
    if (c.nmax) j["nmax"] = *c.nmax;
    else j["nmax"] = "auto";
    j["tol"] = c.tol;
    j["nmax-cap"] = c.nmax_cap;
    j["k"] = c.k;
    j["labels"] = c.labels;
    j["tmax"] = c.tmax;
    j["steps"] = c.steps;
    j["eps"] = c.eps;
    j["step"] = c.step;
    j["gmax"] = c.gmax;
    j["direction"] = c.direction;
    j["format"] = c.format;
    return j;
}

// ---------------------------------------------------------------------------
// Tables

using Cell = std::variant<std::monostate, double, long long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    ojson meta = ojson::object();
};

// Shortest string that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::string format_cell(const Cell& c) {
    if (std::holds_alternative<double>(c)) return format_double(std::get<double>(c));
    if (std::holds_alternative<long long>(c)) return std::to_string(std::get<long long>(c));
    if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
    return "";
}

inline ojson cell_json(const Cell& c) {
    if (std::holds_alternative<double>(c)) return std::get<double>(c);
    if (std::holds_alternative<long long>(c)) return std::get<long long>(c);
    if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
    return nullptr;
}

inline void write_csv(std::ostream& os, const Table& t) {
    for (const auto& [key, value] : t.meta.items())
        os << "# " << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
        os << '\n';
    }
}

inline void write_json(std::ostream& os, const Table& t) {
    ojson doc;
    doc["meta"] = t.meta;
    ojson rows = ojson::array();
    for (const auto& row : t.rows) {
        ojson r;
        for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = cell_json(row[i]);
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    os << doc.dump(1) << '\n';
}

// ---------------------------------------------------------------------------
// Commands

struct Outcome {
    Table table;
    int status = kOk;
};

inline BeamSplitterModel bs_model(const RunConfig& c) {
    if (c.model == "h1") return BeamSplitterModel::H1;
    if (c.model == "h2") return BeamSplitterModel::H2;
    throw InvalidArgument("command '" + c.command + "' supports the h1 and h2 models");
}

inline double scalar(const std::vector<double>& grid, const char* key) {
    if (grid.size() != 1) throw InvalidArgument(std::string("'") + key + "' must be a single value for this command");
    return grid.front();
}

inline Outcome run_phase_scan(const RunConfig& c) {
    ScanOptions opts;
    opts.convergence = {c.tol, 4, 2, c.nmax_cap};
    opts.fixed_n_max = c.nmax;
    opts.workers = c.workers;
    if (c.nmax) make_space(*c.nmax, *c.nmax);
    else make_space(c.nmax_cap, c.nmax_cap);
    const ScanTable t = phase_scan(bs_model(c), c.params(), c.g1, c.g2, opts);
    Outcome o;
    o.table.columns = {"g1", "g2", "sz", "n1", "n2", "jx", "chi", "E0", "n_max"};
    for (const ScanRow& r : t.rows)
        o.table.rows.push_back({r.g1, r.g2, r.op.sz, r.op.n1, r.op.n2, r.op.jx, r.op.chi, r.e0, (long long)r.n_max});
    const auto flagged = t.flagged();
    o.table.meta["flagged_rows"] = flagged;
    if (!flagged.empty()) o.status = kNotConverged;
    return o;
}

inline std::vector<std::pair<double, double>> coupling_path(const RunConfig& c) {
    const std::size_t n = std::max(c.g1.size(), c.g2.size());
    if ((c.g1.size() != 1 && c.g1.size() != n) || (c.g2.size() != 1 && c.g2.size() != n))
        throw InvalidArgument("'g1' and 'g2' must have equal lengths or be scalars");
    std::vector<std::pair<double, double>> path;
    for (std::size_t i = 0; i < n; ++i)
        path.push_back({c.g1[c.g1.size() == 1 ? 0 : i], c.g2[c.g2.size() == 1 ? 0 : i]});
    return path;
}

inline Outcome run_spectrum(const RunConfig& c) {
    const ModelKind kind = parse_model_kind(c.model);
    const auto path = coupling_path(c);
    if (kind == ModelKind::Rabi)
        for (const auto& pt : path)
            if (pt.second != 0.0) throw InvalidArgument("the rabi model takes g1 only");
    SpectrumOptions opts;
    opts.workers = c.workers;
    auto trace_at = [&](int n) {
        opts.n_max = n;
        return spectrum_trace(kind, c.params(), path, c.k, c.labels, opts);
    };
    SpectrumTrace trace;
    int used = 0;
    bool converged = true;
    if (c.nmax) {
        used = *c.nmax;
        trace = trace_at(used);
    } else {
        // grow the cutoff until every reported energy moves by less than tol
        used = std::max(4, int((c.k + 1) / 2));
        trace = trace_at(used);
        converged = false;
        while (used + 2 <= c.nmax_cap) {
            SpectrumTrace next = trace_at(used + 2);
            double diff = 0.0;
            for (std::size_t i = 0; i < next.rows.size(); ++i)
                diff = std::max(diff, std::abs(next.rows[i].energy - trace.rows[i].energy));
            used += 2;
            trace = std::move(next);
            if (diff < c.tol) {
                converged = true;
                break;
            }
        }
    }
    Outcome o;
    o.table.columns = {"coupling", "k", "energy", "parity", "secondary", "j"};
    for (const SpectrumRow& r : trace.rows) {
        const double coupling = kind == ModelKind::Rabi ? r.g1 : r.coupling;
        o.table.rows.push_back({coupling, (long long)r.level, r.energy, (long long)r.parity,
                                r.secondary ? Cell((long long)*r.secondary) : Cell{}, (long long)r.j});
    }
    const auto crossings = detect_crossings(trace);
    std::size_t same = 0;
    for (const Crossing& x : crossings) same += x.same_sector;
    o.table.meta["n_max"] = used;
    o.table.meta["converged"] = converged;
    o.table.meta["crossings"] = crossings.size();
    o.table.meta["same_sector_crossings"] = same;
    if (!converged) o.status = kNotConverged;
    return o;
}

inline Outcome run_evolve(const RunConfig& c) {
    const ModelKind kind = parse_model_kind(c.model);
    const ModelParams p = c.params(scalar(c.g1, "g1"), scalar(c.g2, "g2"));
    if (kind == ModelKind::Rabi && p.g2 != 0.0) throw InvalidArgument("the rabi model takes g1 only");
    const std::vector<double> times = linspace(0.0, c.tmax, c.steps + 1);
    EvolveOptions opts;
    if (kind != ModelKind::Rabi && p.fully_resonant())
        opts.reference = WeakReference{kind == ModelKind::H1 ? BeamSplitterModel::H1 : BeamSplitterModel::H2, p};
    auto run_at = [&](int n) {
        // the Rabi model leaves mode 2 in vacuum; cutoff 2 keeps it out of the leakage window
        const HilbertSpace sp = kind == ModelKind::Rabi ? make_space(n, 2) : make_space(n, n);
        return evolve(build_hamiltonian(kind, p, sp), QuantumState::basis(sp, Level::e, 0, 0), times, opts);
    };
    int used = 0;
    EvolutionTrace trace;
    if (c.nmax) {
        used = *c.nmax;
        trace = run_at(used);
    } else {
        for (used = 4;; used += 2) {
            trace = run_at(used);
            if (!trace.leakage_flag || used + 2 > c.nmax_cap) break;
        }
    }
    Outcome o;
    o.table.columns = {"t", "sz", "n1", "n2", "fidelity"};
    for (const EvolutionRow& r : trace.rows)
        o.table.rows.push_back({r.t, r.sz, r.n1, r.n2, r.fidelity ? Cell(*r.fidelity) : Cell{}});
    o.table.meta["n_max"] = used;
    o.table.meta["max_leakage"] = trace.max_leakage;
    o.table.meta["leakage_flag"] = trace.leakage_flag;
    o.table.meta["reference"] = opts.reference ? "weak-coupling" : "none";
    if (trace.leakage_flag) o.status = kNotConverged;
    return o;
}

inline Outcome run_critical(const RunConfig& c) {
    CriticalOptions opts;
    opts.eps = c.eps;
    opts.step = c.step;
    opts.g_max = c.gmax;
    opts.convergence = {c.tol, 4, 2, c.nmax_cap};
    make_space(c.nmax_cap, c.nmax_cap);
    const double len = std::hypot(c.direction[0], c.direction[1]);
    const CriticalEstimate e = critical_coupling_estimate(bs_model(c), c.params(), c.direction[0], c.direction[1], opts);
    Outcome o;
    o.table.columns = {"u1", "u2", "eps", "g_star", "g_below", "g_above", "photons_below", "photons_above", "n_max",
                       "evaluations"};
    o.table.rows.push_back({c.direction[0] / len, c.direction[1] / len, c.eps, e.g_star, e.g_below, e.g_above,
                            e.photons_below, e.photons_above, (long long)e.n_max, (long long)e.evaluations});
    return o;
}

inline Outcome run_verify(const RunConfig&) {
    Outcome o;
    o.table.columns = {"check", "result", "value", "threshold"};
    const std::vector<CheckResult> checks = invariant_suite();
    for (const CheckResult& r : checks)
        o.table.rows.push_back({r.name, std::string(r.pass ? "pass" : "fail"), r.value,
                                std::string(r.relation == Relation::less ? "<" : ">") + format_double(r.threshold)});
    if (!all_pass(checks)) o.status = kChecksFailed;
    return o;
}

// ---------------------------------------------------------------------------
// Entry points

inline ojson error_record(int status, const char* kind, const std::string& message) {
    ojson e;
    e["error"] = {{"status", status}, {"kind", kind}, {"message", message}};
    return e;
}

inline int status_for(const Error& e) {
    if (dynamic_cast<const ConvergenceError*>(&e)) return kNotConverged;
    if (dynamic_cast<const ResourceLimit*>(&e)) return kResourceLimit;
    return kInvalidConfig;
}

// Runs a resolved configuration and writes the table to `os`.
inline int run(const RunConfig& c, std::ostream& os) {
    Outcome o;
    if (c.command == "phase-scan") o = run_phase_scan(c);
    else if (c.command == "spectrum") o = run_spectrum(c);
    else if (c.command == "evolve") o = run_evolve(c);
    else if (c.command == "critical") o = run_critical(c);
    else o = run_verify(c);

    ojson meta;
    meta["tworabi"] = TWORABI_VERSION;
    meta["command"] = c.command;
    meta["config"] = to_json(c);
    for (const auto& [key, value] : o.table.meta.items()) meta[key] = value;
    o.table.meta = std::move(meta);
    if (c.format == "json") write_json(os, o.table);
    else write_csv(os, o.table);
    return o.status;
}

// Resolves, runs and routes output; errors go to `err` as one JSON line.
inline int run_safely(const ojson& options, std::ostream& stdout_stream, std::ostream& err) {
    try {
        const RunConfig c = resolve_config(options);
        if (c.out == "-") return run(c, stdout_stream);
        std::ostringstream buffer;
        const int status = run(c, buffer);
        std::ofstream file(c.out, std::ios::binary);
        if (!file) throw InvalidArgument("cannot open output file '" + c.out + "'");
        file << buffer.str();
        return status;
    } catch (const Error& e) {
        const int status = status_for(e);
        err << error_record(status, e.kind(), e.what()).dump() << '\n';
        return status;
    } catch (const nlohmann::json::exception& e) {
        err << error_record(kInvalidConfig, "invalid_argument", e.what()).dump() << '\n';
        return kInvalidConfig;
    } catch (const std::bad_alloc&) {
        err << error_record(kResourceLimit, "resource_limit", "out of memory").dump() << '\n';
        return kResourceLimit;
    }
}

// Merges a config-file document with explicitly given flags (flags win).
inline ojson merge_options(const ojson& file, const ojson& flags) {
    ojson merged = file.is_null() ? ojson::object() : file;
    if (!merged.is_object()) throw InvalidArgument("configuration file must hold a JSON object");
    for (const auto& [key, value] : flags.items()) merged[key] = value;
    return merged;
}

}  // namespace tworabi::app
