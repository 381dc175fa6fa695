#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gaussdyn/core.hpp"
#include "gaussdyn/dynamics.hpp"
#include "gaussdyn/entanglement.hpp"
#include "gaussdyn/events.hpp"

namespace gaussdyn {

// Exit codes for the CLI front end.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
    static constexpr int exit_code = 2;
};
struct EnvironmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
    static constexpr int exit_code = 3;
};
struct UnphysicalStateError : std::runtime_error {
    using std::runtime_error::runtime_error;
    static constexpr int exit_code = 4;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
    static constexpr int exit_code = 5;
};

/// 12 significant digits; the fixed wire format for all CSV output.
inline std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

enum class EnvMode { general, symmetric, gibbs };

struct SweepAxis {
    std::string param;
    double lo = 0.0, hi = 0.0;
    int n = 0;
};

struct RunConfig {
    double osc_m = 1.0, osc_omega = 1.0;
    EnvMode env_mode = EnvMode::general;
    double lambda = 0.0;
    std::map<std::string, double> coeffs;  // d_xx ... d_pxpy, absent -> 0

    std::optional<std::array<double, 10>> initial_upper;
    std::string initial_preset;  // vacuum | fig2 | fig3 | empty

    std::optional<double> t_max;
    std::optional<int> n_samples;

    std::vector<SweepAxis> sweep;  // 0, 1 or 2 axes
    std::string out_path;
    bool allow_unphysical = false;
};

namespace detail {

inline const std::set<std::string>& coeff_names() {
    static const std::set<std::string> names = {
        "d_xx", "d_xpx", "d_pxpx", "d_yy", "d_ypy", "d_pypy",
        "d_xy", "d_xpy", "d_ypx", "d_pxpy"};
    return names;
}

inline const std::set<std::string>& sweep_whitelist() {
    static const std::set<std::string> names = [] {
        std::set<std::string> s = {"environment.lambda", "oscillator.m",
                                   "oscillator.omega"};
        for (const auto& c : coeff_names()) s.insert("environment." + c);
        return s;
    }();
    return names;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config: bad boolean value for " + key + ": '" + v + "'");
}

}  // namespace detail

/// Flat key = value format with dotted section prefixes; '#' comments.
inline RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (!kv.emplace(key, val).second)
            throw ConfigError("config: duplicate key " + key);
    }

    static const char* initial_keys[10] = {"xx",  "xpx",  "xy",  "xpy", "pxpx",
                                           "ypx", "pxpy", "yy",  "ypy", "pypy"};
    std::array<double, 10> upper{};
    bool any_initial = false;

    for (const auto& [key, val] : kv) {
        if (key == "oscillator.m") cfg.osc_m = detail::parse_double(key, val);
        else if (key == "oscillator.omega") cfg.osc_omega = detail::parse_double(key, val);
        else if (key == "environment.lambda") cfg.lambda = detail::parse_double(key, val);
        else if (key == "environment.mode") {
            if (val == "general") cfg.env_mode = EnvMode::general;
            else if (val == "symmetric") cfg.env_mode = EnvMode::symmetric;
            else if (val == "gibbs") cfg.env_mode = EnvMode::gibbs;
            else throw ConfigError("config: environment.mode must be general|symmetric|gibbs");
        } else if (key.rfind("environment.d_", 0) == 0) {
            const std::string name = key.substr(std::string("environment.").size());
            if (!detail::coeff_names().count(name))
                throw ConfigError("config: unknown coefficient " + key);
            cfg.coeffs[name] = detail::parse_double(key, val);
        } else if (key == "initial.preset") {
            if (val != "vacuum" && val != "fig2" && val != "fig3")
                throw ConfigError("config: unknown initial.preset '" + val + "'");
            cfg.initial_preset = val;
        } else if (key.rfind("initial.", 0) == 0) {
            const std::string name = key.substr(std::string("initial.").size());
            bool found = false;
            for (int i = 0; i < 10; ++i) {
                if (name == initial_keys[i]) {
                    upper[i] = detail::parse_double(key, val);
                    any_initial = found = true;
                    break;
                }
            }
            if (!found) throw ConfigError("config: unknown key " + key);
        } else if (key == "time.t_max") {
            cfg.t_max = detail::parse_double(key, val);
        } else if (key == "time.n_samples") {
            cfg.n_samples = static_cast<int>(detail::parse_double(key, val));
        } else if (key == "output.path") {
            cfg.out_path = val;
        } else if (key == "output.format") {
            if (val != "csv") throw ConfigError("config: only csv output is supported");
        } else if (key == "run.allow_unphysical") {
            cfg.allow_unphysical = detail::parse_bool(key, val);
        } else if (key.rfind("sweep.", 0) == 0) {
            // handled below
        } else {
            throw ConfigError("config: unknown key " + key);
        }
    }
    if (any_initial && !cfg.initial_preset.empty())
        throw ConfigError("config: give either initial.preset or explicit entries, not both");
    if (any_initial) cfg.initial_upper = upper;

    for (const std::string suffix : {"", "2"}) {
        const auto it = kv.find("sweep.param" + suffix);
        if (it == kv.end()) continue;
        SweepAxis ax;
        ax.param = it->second;
        if (!detail::sweep_whitelist().count(ax.param))
            throw ConfigError("config: sweep parameter '" + ax.param +
                              "' is not in the whitelist");
        auto need = [&](const std::string& k) {
            const auto f = kv.find(k + suffix);
            if (f == kv.end()) throw ConfigError("config: missing " + k + suffix);
            return detail::parse_double(k + suffix, f->second);
        };
        ax.lo = need("sweep.lo");
        ax.hi = need("sweep.hi");
        ax.n = static_cast<int>(need("sweep.n"));
        if (ax.n < 0) throw ConfigError("config: sweep.n" + suffix + " must be >= 0");
        cfg.sweep.push_back(ax);
    }
    if (cfg.sweep.size() == 2 && cfg.sweep[0].param == cfg.sweep[1].param)
        throw ConfigError("config: the two sweep axes must differ");
    return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    return parse_config(in);
}

inline OscillatorSpec make_oscillator(
    const RunConfig& cfg, const std::map<std::string, double>& overrides = {}) {
    double m = cfg.osc_m, w = cfg.osc_omega;
    if (const auto o = overrides.find("oscillator.m"); o != overrides.end())
        m = o->second;
    if (const auto o = overrides.find("oscillator.omega"); o != overrides.end())
        w = o->second;
    return {m, w};
}

/// Builds the environment from the config, applying per-point sweep overrides
/// before the symmetric/gibbs closure is taken.
inline EnvironmentSpec make_environment(
    const RunConfig& cfg, const std::map<std::string, double>& overrides = {}) {
    auto get = [&](const std::string& name) {
        const auto o = overrides.find("environment." + name);
        if (o != overrides.end()) return o->second;
        const auto it = cfg.coeffs.find(name);
        return it == cfg.coeffs.end() ? 0.0 : it->second;
    };
    double lambda = cfg.lambda;
    if (const auto o = overrides.find("environment.lambda"); o != overrides.end())
        lambda = o->second;

    switch (cfg.env_mode) {
        case EnvMode::gibbs: {
            const OscillatorSpec osc = make_oscillator(cfg, overrides);
            return gibbs_environment(osc, lambda, get("d_xx"), get("d_xy"),
                                     get("d_xpy"));
        }
        case EnvMode::symmetric:
            return symmetric_environment(lambda, get("d_xx"), get("d_xpx"),
                                         get("d_pxpx"), get("d_xy"), get("d_xpy"),
                                         get("d_pxpy"));
        case EnvMode::general: {
            EnvironmentSpec e;
            e.lambda = lambda;
            e.d_xx = get("d_xx");
            e.d_xpx = get("d_xpx");
            e.d_pxpx = get("d_pxpx");
            e.d_yy = get("d_yy");
            e.d_ypy = get("d_ypy");
            e.d_pypy = get("d_pypy");
            e.d_xy = get("d_xy");
            e.d_xpy = get("d_xpy");
            e.d_ypx = get("d_ypx");
            e.d_pxpy = get("d_pxpy");
            return e;
        }
    }
    throw std::logic_error("unreachable");
}

inline CovarianceMatrix initial_state_preset(const std::string& name) {
    if (name.empty() || name == "vacuum") return CovarianceMatrix::vacuum();
    if (name == "fig2")
        return CovarianceMatrix::from_upper({1, 0, 0, 0, 0.5, 0, 0, 1, 0, 0.5});
    if (name == "fig3")
        return CovarianceMatrix::from_upper({1, 0, 0.5, 0, 0.5, 0, -0.5, 1, 0, 0.5});
    throw ConfigError("config: unknown initial.preset '" + name + "'");
}

inline CovarianceMatrix make_initial_state(const RunConfig& cfg) {
    if (cfg.initial_upper) return CovarianceMatrix::from_upper(*cfg.initial_upper);
    return initial_state_preset(cfg.initial_preset);
}

/// Environment gate for CLI flows. Violations of lambda/Eq.-(6) constraints are
/// hard failures; a coefficient-matrix PSD violation alone is reported as a
/// warning because the reference parameter families fall outside full PSD.
inline void gate_environment(const EnvironmentSpec& env, std::ostream& warn,
                             double tol = kDefaultTol) {
    const ValidationResult vr = validate_environment(env, tol);
    if (vr.ok) return;
    std::string hard, soft;
    for (const auto& v : vr.violations) {
        std::string msg = v.name + " (residual " + fmt12(v.residual) + ")";
        if (v.name == "coefficient_matrix_psd")
            soft += "  " + msg + "\n";
        else
            hard += "  " + msg + "\n";
    }
    if (!hard.empty())
        throw EnvironmentError("environment constraint violation:\n" + hard);
    warn << "warning: environment violates full coefficient-matrix positivity:\n"
         << soft;
}

// ---------------------------------------------------------------------------
// Sweep machinery

namespace detail {

inline double axis_value(const SweepAxis& ax, int i) {
    if (ax.n == 1) return ax.lo;
    return ax.lo + (ax.hi - ax.lo) * static_cast<double>(i) / (ax.n - 1);
}

inline int resolve_jobs(int jobs) {
    if (jobs > 0) return jobs;
    if (const char* e = std::getenv("GAUSSDYN_JOBS")) {
        const int n = std::atoi(e);
        if (n > 0) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Runs fn(i) for i in [0, n) on `jobs` threads; fn must only write slot i.
template <class Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
    jobs = std::min(std::max(jobs, 1), std::max(n, 1));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int w = 0; w < jobs; ++w)
        workers.emplace_back([&, w] {
            for (int i = w; i < n; i += jobs) fn(i);
        });
    for (auto& th : workers) th.join();
}

}  // namespace detail

/// Evaluates one environment point: asymptotic quantities plus trajectory
/// classification. Used by both sweeps and scenario presets.
struct PointResult {
    bool valid = false;       // full validation (minors + PSD)
    bool computed = false;    // metrics below are populated
    double s_inf = 0.0;
    double e_inf = 0.0;
    Classification classification = Classification::separable_throughout;
    std::vector<double> crossing_times;
};

inline PointResult evaluate_point(const OscillatorSpec& osc,
                                  const EnvironmentSpec& env,
                                  const CovarianceMatrix& sigma0, double t_max,
                                  int n_samples) {
    PointResult pr;
    try {
        pr.valid = validate_environment(env).ok;
    } catch (const std::exception&) {
        return pr;
    }
    if (!(env.lambda > 0.0)) return pr;
    try {
        const CovarianceMatrix si =
            steady_state(build_drift(osc, env), build_diffusion(env));
        pr.s_inf = simon_s(si).s;
        try {
            pr.e_inf = log_negativity(si).e;
        } catch (const std::exception&) {
            pr.e_inf = std::numeric_limits<double>::quiet_NaN();
        }
        const EntanglementTrace tr = trace(sigma0, osc, env, t_max, n_samples);
        const EventReport rep = detect_events(tr, osc, env, sigma0);
        pr.classification = rep.classification;
        for (const auto& c : rep.crossings) pr.crossing_times.push_back(c.t);
        pr.computed = true;
    } catch (const std::exception&) {
        pr.computed = false;
    }
    return pr;
}

/// Deterministic sweep CSV: rows in lexicographic grid order (axis 1 outer),
/// independent of the worker count.
inline std::string run_sweep(const RunConfig& cfg, int jobs = 0) {
    if (cfg.sweep.empty())
        throw ConfigError("sweep: config has no sweep block");
    const int njobs = detail::resolve_jobs(jobs);

    std::ostringstream header;
    for (const auto& ax : cfg.sweep) header << ax.param << ",";
    header << "valid,S_infinity,E_infinity,classification,crossing_times\n";

    const int n1 = cfg.sweep[0].n;
    const int n2 = cfg.sweep.size() == 2 ? cfg.sweep[1].n : 1;
    const int total = n1 * n2;
    const CovarianceMatrix sigma0 = make_initial_state(cfg);
    const int n_samples = cfg.n_samples.value_or(kDefaultTraceSamples);

    std::vector<std::string> rows(total);
    detail::parallel_for(total, njobs, [&](int idx) {
        const int i = idx / n2;
        const int j = idx % n2;
        std::map<std::string, double> ov;
        ov[cfg.sweep[0].param] = detail::axis_value(cfg.sweep[0], i);
        if (cfg.sweep.size() == 2)
            ov[cfg.sweep[1].param] = detail::axis_value(cfg.sweep[1], j);

        std::ostringstream row;
        row << fmt12(detail::axis_value(cfg.sweep[0], i)) << ",";
        if (cfg.sweep.size() == 2)
            row << fmt12(detail::axis_value(cfg.sweep[1], j)) << ",";

        PointResult pr;
        try {
            const OscillatorSpec osc = make_oscillator(cfg, ov);
            const EnvironmentSpec env = make_environment(cfg, ov);
            const double t_max = cfg.t_max.value_or(
                env.lambda > 0.0
                    ? kDefaultTraceTmaxOverInvLambda / env.lambda
                    : 1.0);
            pr = evaluate_point(osc, env, sigma0, t_max, n_samples);
        } catch (const std::exception&) {
        }
        row << (pr.valid ? 1 : 0) << ",";
        if (pr.computed) {
            row << fmt12(pr.s_inf) << "," << fmt12(pr.e_inf) << ","
                << to_string(pr.classification) << ",";
            for (std::size_t k = 0; k < pr.crossing_times.size(); ++k)
                row << (k ? ";" : "") << fmt12(pr.crossing_times[k]);
        } else {
            row << ",,,";
        }
        row << "\n";
        rows[idx] = row.str();
    });

    std::string out = header.str();
    for (const auto& r : rows) out += r;
    if (!cfg.out_path.empty()) {
        std::ofstream f(cfg.out_path, std::ios::binary);
        if (!f) throw ConfigError("sweep: cannot write " + cfg.out_path);
        f << out;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scenario presets

inline std::string events_path_for(const std::string& csv_path) {
    const auto dot = csv_path.rfind(".csv");
    if (dot != std::string::npos && dot == csv_path.size() - 4)
        return csv_path.substr(0, dot) + ".events.csv";
    return csv_path + ".events.csv";
}

struct ScenarioOutput {
    std::string main_csv;
    std::string events_csv;  // empty for fig1
};

/// fig1: E(inf), S(inf) surface over the (D, d) coefficient plane.
/// fig2/fig3: S(t), E(t) traces over a d grid plus per-d event summaries.
inline ScenarioOutput run_scenario(
    const std::string& name,
    const std::map<std::string, std::string>& overrides = {},
    std::ostream* warn = nullptr) {
    std::ostringstream devnull;
    std::ostream& w = warn ? *warn : devnull;

    auto getd = [&](const std::string& key, double dflt) {
        const auto it = overrides.find(key);
        return it == overrides.end() ? dflt
                                     : detail::parse_double(key, it->second);
    };
    for (const auto& [k, v] : overrides) {
        (void)v;
        static const std::set<std::string> allowed = {
            "oscillator.m", "oscillator.omega", "environment.lambda",
            "environment.d_xx", "scenario.d_lo", "scenario.d_hi", "scenario.d_n",
            "scenario.D_lo", "scenario.D_hi", "scenario.D_n", "time.t_max",
            "time.n_samples"};
        if (!allowed.count(k))
            throw ConfigError("scenario: unknown override " + k);
    }

    ScenarioOutput out;
    const OscillatorSpec osc{getd("oscillator.m", 1.0), getd("oscillator.omega", 1.0)};

    if (name == "fig1") {
        const double lambda = getd("environment.lambda", 0.2);
        const double D_lo = getd("scenario.D_lo", 0.0), D_hi = getd("scenario.D_hi", 1.0);
        const double d_lo = getd("scenario.d_lo", 0.0), d_hi = getd("scenario.d_hi", 1.0);
        const int nD = static_cast<int>(getd("scenario.D_n", 51));
        const int nd = static_cast<int>(getd("scenario.d_n", 51));
        std::string csv = "D,d,E_infinity,S_infinity,physical\n";
        for (int i = 0; i < nD; ++i) {
            const double D = nD == 1 ? D_lo : D_lo + (D_hi - D_lo) * i / (nD - 1.0);
            for (int j = 0; j < nd; ++j) {
                const double d = nd == 1 ? d_lo : d_lo + (d_hi - d_lo) * j / (nd - 1.0);
                const EnvironmentSpec env = gibbs_environment(osc, lambda, D, 0.0, d);
                const double e_inf = asymptotic_negativity(osc, env);
                const double s_inf = asymptotic_simon_gibbs(osc, env);
                csv += fmt12(D) + "," + fmt12(d) + "," + fmt12(e_inf) + "," +
                       fmt12(s_inf) + "," + (D >= d ? "1" : "0") + "\n";
            }
        }
        out.main_csv = std::move(csv);
        return out;
    }

    if (name != "fig2" && name != "fig3")
        throw ConfigError("scenario: unknown name '" + name + "' (fig1|fig2|fig3)");

    const double lambda = getd("environment.lambda", 0.5);
    const double D = getd("environment.d_xx", 0.4);
    const double d_lo = getd("scenario.d_lo", -D), d_hi = getd("scenario.d_hi", D);
    const int nd = static_cast<int>(getd("scenario.d_n", 21));
    const double t_max = getd("time.t_max", kDefaultTraceTmaxOverInvLambda / lambda);
    const int n_samples = static_cast<int>(getd("time.n_samples", kDefaultTraceSamples));
    const CovarianceMatrix sigma0 = initial_state_preset(name);

    const PhysicalityReport phys = check_physical(sigma0);
    if (!phys.is_physical)
        w << "warning: preset initial state is unphysical (nu_- = "
          << fmt12(phys.symplectic_eigenvalues[0]) << "); continuing (paper preset)\n";

    std::string csv = "t,d,S,E,nu_tilde_minus,entangled\n";
    std::string ev_csv = "d,classification,n_crossings,crossing_times,asymptotic_S\n";
    bool psd_warned = false;
    for (int j = 0; j < nd; ++j) {
        const double d = nd == 1 ? d_lo : d_lo + (d_hi - d_lo) * j / (nd - 1.0);
        const EnvironmentSpec env = gibbs_environment(osc, lambda, D, 0.0, d);
        if (!psd_warned) {
            gate_environment(env, w);
            psd_warned = true;  // one warning per run is enough
        } else {
            std::ostringstream sink;
            gate_environment(env, sink);
        }
        const EntanglementTrace tr = trace(sigma0, osc, env, t_max, n_samples);
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            const bool ent = tr.s_values[i] < -kVerdictBand;
            csv += fmt12(tr.times[i]) + "," + fmt12(d) + "," +
                   fmt12(tr.s_values[i]) + "," + fmt12(tr.e_values[i]) + "," +
                   fmt12(tr.nu_values[i]) + "," + (ent ? "1" : "0") + "\n";
        }
        const EventReport rep = detect_events(tr, osc, env, sigma0);
        ev_csv += fmt12(d) + std::string(",") + to_string(rep.classification) + "," +
                  std::to_string(rep.crossings.size()) + ",";
        for (std::size_t k = 0; k < rep.crossings.size(); ++k)
            ev_csv += (k ? ";" : "") + fmt12(rep.crossings[k].t);
        ev_csv += "," + fmt12(rep.asymptotic_s) + "\n";
    }
    out.main_csv = std::move(csv);
    out.events_csv = std::move(ev_csv);
    return out;
}

inline void write_scenario(const ScenarioOutput& out, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("scenario: cannot write " + path);
    f << out.main_csv;
    if (!out.events_csv.empty()) {
        const std::string epath = events_path_for(path);
        std::ofstream ef(epath, std::ios::binary);
        if (!ef) throw ConfigError("scenario: cannot write " + epath);
        ef << out.events_csv;
    }
}

// ---------------------------------------------------------------------------
// Single run

struct SingleReport {
    ValidationResult env_validation;
    PhysicalityReport physicality;
    Mat4 sigma_inf;
    double s0 = 0.0, s_inf = 0.0, e_inf = 0.0;
    std::optional<Classification> classification;
    std::string trace_csv;
};

inline SingleReport run_single(const RunConfig& cfg, std::ostream& text) {
    const OscillatorSpec osc = make_oscillator(cfg);
    const EnvironmentSpec env = make_environment(cfg);
    SingleReport rep;
    rep.env_validation = validate_environment(env);
    gate_environment(env, text);

    const CovarianceMatrix sigma0 = make_initial_state(cfg);
    rep.physicality = check_physical(sigma0);
    if (!rep.physicality.is_physical && !cfg.allow_unphysical)
        throw UnphysicalStateError(
            "initial covariance is unphysical: nu_- = " +
            fmt12(rep.physicality.symplectic_eigenvalues[0]) +
            " < 1/2 (pass --allow-unphysical to override)");

    CovarianceMatrix si = CovarianceMatrix::vacuum();
    try {
        si = steady_state(build_drift(osc, env), build_diffusion(env));
    } catch (const std::exception& ex) {
        throw NumericalError(std::string("steady state: ") + ex.what());
    }
    rep.sigma_inf = si.matrix();
    rep.s0 = simon_s(sigma0).s;
    rep.s_inf = simon_s(si).s;
    try {
        rep.e_inf = log_negativity(si).e;
    } catch (const std::exception&) {
        rep.e_inf = std::numeric_limits<double>::quiet_NaN();
    }

    text << "environment: " << (rep.env_validation.ok ? "valid" : "constraint violations present") << "\n";
    text << "initial state: nu_- = " << fmt12(rep.physicality.symplectic_eigenvalues[0])
         << (rep.physicality.is_physical ? " (physical)" : " (UNPHYSICAL, override active)")
         << "\n";
    text << "sigma(inf) =\n";
    for (int i = 0; i < 4; ++i) {
        text << " ";
        for (int j = 0; j < 4; ++j) text << " " << fmt12(rep.sigma_inf(i, j));
        text << "\n";
    }
    text << "S(0) = " << fmt12(rep.s0) << "\n";
    text << "S(inf) = " << fmt12(rep.s_inf) << "\n";
    text << "E(inf) = " << fmt12(rep.e_inf) << "\n";

    if (cfg.t_max || cfg.n_samples || !cfg.out_path.empty()) {
        const double t_max = cfg.t_max.value_or(kDefaultTraceTmaxOverInvLambda /
                                                env.lambda);
        const int n_samples = cfg.n_samples.value_or(kDefaultTraceSamples);
        const EntanglementTrace tr = trace(sigma0, osc, env, t_max, n_samples);
        const EventReport er = detect_events(tr, osc, env, sigma0);
        rep.classification = er.classification;
        text << "classification = " << to_string(er.classification) << "\n";

        std::string csv = "t,S,E,nu_tilde_minus,entangled\n";
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            const bool ent = tr.s_values[i] < -kVerdictBand;
            csv += fmt12(tr.times[i]) + "," + fmt12(tr.s_values[i]) + "," +
                   fmt12(tr.e_values[i]) + "," + fmt12(tr.nu_values[i]) + "," +
                   (ent ? "1" : "0") + "\n";
        }
        rep.trace_csv = std::move(csv);
        if (!cfg.out_path.empty()) {
            std::ofstream f(cfg.out_path, std::ios::binary);
            if (!f) throw ConfigError("run: cannot write " + cfg.out_path);
            f << rep.trace_csv;
        }
    }
    return rep;
}

}  // namespace gaussdyn
