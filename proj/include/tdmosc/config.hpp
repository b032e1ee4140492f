#pragma once

#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdmosc/errors.hpp"
#include "tdmosc/mass_model.hpp"

namespace tdmosc {

using Json = nlohmann::json;

struct GridConfig {
    std::optional<std::pair<double, double>> box; // absent: sized from the trajectory
    double h = 0.02;
    double dtau = 1e-4;
    double leak_threshold = 1e-8;
};

struct ExpansionConfig {
    int n_max = 32;
    double tail_tol = 1e-8;
    std::vector<double> times{0.0, 2.5, 5.0, 10.0};
};

struct OracleConfig {
    double t0 = 0.0;
    double t1 = 5.0;
    std::size_t snapshots = 8;
    std::string pipeline = "both"; // "u" | "riccati" | "both"
};

struct Thresholds {
    double wronskian = 1e-6;
    double lambda = 1e-6;
    double norm = 1e-8;
    double poisson = 1e-6;
    double lewis = 1e-6;
    double riccati = 1e-5;
    double width = 1e-4;
    double pde = 1e-5;
};

struct SweepConfig {
    std::vector<double> gamma0_values{0.05, 0.1, 0.2, 0.4};
};

/// One JSON document drives every subcommand; each field has a default so
/// `verify` runs with no arguments at all.
struct RunConfig {
    MassModel model = MassModel::constant(1.0);
    bool model_explicit = false; // absent "model": verify fans out over the built-in trio
    double tau0 = 0.0;
    double tau1 = 10.0;
    std::size_t samples = 1000; // grid intervals for the time series
    double tol = 1e-10;

    std::complex<double> u0{1.0, 0.0};
    std::complex<double> udot0{0.0, 1.0};
    std::complex<double> b0{1.0, 0.0};
    double N0_phase = 0.0;
    double eta0 = 1.0;
    double etadot0 = 0.0;

    double quasi_coherence_eps = 0.1;
    GridConfig grid;
    ExpansionConfig expansion;
    OracleConfig oracle;
    Thresholds thresholds;
    SweepConfig sweep;
    std::string out_dir = "out";
};

namespace detail {

inline void expect_keys(const Json& j, const std::string& where,
                        const std::set<std::string>& allowed) {
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in " + where);
}

inline double number_at(const Json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + " must be a number");
    return j.get<double>();
}

inline double get_number(const Json& j, const std::string& key, const std::string& where,
                         double fallback) {
    if (!j.contains(key)) return fallback;
    return number_at(j.at(key), where + "." + key);
}

inline std::complex<double> get_complex(const Json& j, const std::string& key,
                                        const std::string& where, std::complex<double> fallback) {
    if (!j.contains(key)) return fallback;
    const Json& v = j.at(key);
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError(where + "." + key + " must be a number or a [re, im] pair");
}

inline std::pair<double, double> get_window(const Json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError(where + " must be a [lo, hi] pair");
    const double lo = v[0].get<double>(), hi = v[1].get<double>();
    if (!(lo < hi)) throw ConfigError(where + ": lower bound must be below the upper one");
    return {lo, hi};
}

inline MassModel parse_model(const Json& j) {
    expect_keys(j, "model", {"kind", "M0", "gamma0"});
    if (!j.contains("kind") || !j.at("kind").is_string())
        throw ConfigError("model.kind must be one of constant, gaussian_growing, "
                          "gaussian_decaying, exponential");
    const std::string kind = j.at("kind").get<std::string>();
    MassModel m;
    if (kind == "constant") {
        m = MassModel::constant(get_number(j, "M0", "model", 1.0));
    } else {
        if (!j.contains("gamma0"))
            throw ConfigError("model.gamma0 is required for kind '" + kind + "'");
        const double g0 = number_at(j.at("gamma0"), "model.gamma0");
        if (kind == "gaussian_growing") m = MassModel::gaussian_growing(g0);
        else if (kind == "gaussian_decaying") m = MassModel::gaussian_decaying(g0);
        else if (kind == "exponential") m = MassModel::exponential(g0);
        else
            throw ConfigError("unknown model.kind '" + kind + "'");
    }
    try {
        validate_params(m);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return m;
}

} // namespace detail

inline RunConfig parse_config(const Json& j) {
    using namespace detail;
    RunConfig cfg;
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    expect_keys(j, "config",
                {"model", "window", "samples", "tol", "initial", "quasi_coherence_eps", "grid",
                 "expansion", "oracle", "thresholds", "sweep", "out_dir"});

    if (j.contains("model")) {
        cfg.model = parse_model(j.at("model"));
        cfg.model_explicit = true;
    }
    if (j.contains("window"))
        std::tie(cfg.tau0, cfg.tau1) = get_window(j.at("window"), "window");
    if (j.contains("samples")) {
        if (!j.at("samples").is_number_integer() || j.at("samples").get<long long>() <= 0)
            throw ConfigError("samples must be a positive integer");
        cfg.samples = j.at("samples").get<std::size_t>();
    }
    cfg.tol = get_number(j, "tol", "config", cfg.tol);
    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");

    if (j.contains("initial")) {
        const Json& in = j.at("initial");
        expect_keys(in, "initial", {"u0", "udot0", "b0", "N0_phase", "eta0", "etadot0"});
        cfg.u0 = get_complex(in, "u0", "initial", cfg.u0);
        cfg.udot0 = get_complex(in, "udot0", "initial", cfg.udot0);
        cfg.b0 = get_complex(in, "b0", "initial", cfg.b0);
        cfg.N0_phase = get_number(in, "N0_phase", "initial", cfg.N0_phase);
        cfg.eta0 = get_number(in, "eta0", "initial", cfg.eta0);
        cfg.etadot0 = get_number(in, "etadot0", "initial", cfg.etadot0);
        if (std::abs(cfg.u0) == 0.0 && std::abs(cfg.udot0) == 0.0)
            throw ConfigError("initial.u0 and initial.udot0 must not both vanish");
        if (std::abs(cfg.u0) < 1e-12)
            throw ConfigError("initial.u0 too small: the trajectory is normalized by 1/u0");
    }

    cfg.quasi_coherence_eps = get_number(j, "quasi_coherence_eps", "config", cfg.quasi_coherence_eps);
    if (!(cfg.quasi_coherence_eps > 0.0)) throw ConfigError("quasi_coherence_eps must be positive");

    if (j.contains("grid")) {
        const Json& g = j.at("grid");
        expect_keys(g, "grid", {"box", "h", "dtau", "leak_threshold"});
        if (g.contains("box") && !g.at("box").is_null())
            cfg.grid.box = get_window(g.at("box"), "grid.box");
        cfg.grid.h = get_number(g, "h", "grid", cfg.grid.h);
        cfg.grid.dtau = get_number(g, "dtau", "grid", cfg.grid.dtau);
        cfg.grid.leak_threshold = get_number(g, "leak_threshold", "grid", cfg.grid.leak_threshold);
        if (!(cfg.grid.h > 0.0)) throw ConfigError("grid.h must be positive");
        if (!(cfg.grid.dtau > 0.0)) throw ConfigError("grid.dtau must be positive");
        if (!(cfg.grid.leak_threshold > 0.0)) throw ConfigError("grid.leak_threshold must be positive");
    }

    if (j.contains("expansion")) {
        const Json& e = j.at("expansion");
        expect_keys(e, "expansion", {"n_max", "tail_tol", "times"});
        if (e.contains("n_max")) {
            if (!e.at("n_max").is_number_integer() || e.at("n_max").get<int>() < 0)
                throw ConfigError("expansion.n_max must be a non-negative integer");
            cfg.expansion.n_max = e.at("n_max").get<int>();
        }
        cfg.expansion.tail_tol = get_number(e, "tail_tol", "expansion", cfg.expansion.tail_tol);
        if (!(cfg.expansion.tail_tol > 0.0)) throw ConfigError("expansion.tail_tol must be positive");
        if (e.contains("times")) {
            if (!e.at("times").is_array() || e.at("times").empty())
                throw ConfigError("expansion.times must be a non-empty array");
            cfg.expansion.times.clear();
            for (const auto& v : e.at("times"))
                cfg.expansion.times.push_back(number_at(v, "expansion.times[]"));
            for (std::size_t i = 1; i < cfg.expansion.times.size(); ++i)
                if (!(cfg.expansion.times[i] > cfg.expansion.times[i - 1]))
                    throw ConfigError("expansion.times must be strictly increasing");
        }
    }

    if (j.contains("oracle")) {
        const Json& o = j.at("oracle");
        expect_keys(o, "oracle", {"window", "snapshots", "pipeline"});
        if (o.contains("window")) std::tie(cfg.oracle.t0, cfg.oracle.t1) = get_window(o.at("window"), "oracle.window");
        if (o.contains("snapshots")) {
            if (!o.at("snapshots").is_number_integer() || o.at("snapshots").get<long long>() <= 0)
                throw ConfigError("oracle.snapshots must be a positive integer");
            cfg.oracle.snapshots = o.at("snapshots").get<std::size_t>();
        }
        if (o.contains("pipeline")) {
            if (!o.at("pipeline").is_string()) throw ConfigError("oracle.pipeline must be a string");
            cfg.oracle.pipeline = o.at("pipeline").get<std::string>();
            if (cfg.oracle.pipeline != "u" && cfg.oracle.pipeline != "riccati" &&
                cfg.oracle.pipeline != "both")
                throw ConfigError("oracle.pipeline must be 'u', 'riccati' or 'both'");
        }
    }

    if (j.contains("thresholds")) {
        const Json& t = j.at("thresholds");
        expect_keys(t, "thresholds",
                    {"wronskian", "lambda", "norm", "poisson", "lewis", "riccati", "width", "pde"});
        Thresholds& th = cfg.thresholds;
        th.wronskian = get_number(t, "wronskian", "thresholds", th.wronskian);
        th.lambda = get_number(t, "lambda", "thresholds", th.lambda);
        th.norm = get_number(t, "norm", "thresholds", th.norm);
        th.poisson = get_number(t, "poisson", "thresholds", th.poisson);
        th.lewis = get_number(t, "lewis", "thresholds", th.lewis);
        th.riccati = get_number(t, "riccati", "thresholds", th.riccati);
        th.width = get_number(t, "width", "thresholds", th.width);
        th.pde = get_number(t, "pde", "thresholds", th.pde);
    }

    if (j.contains("sweep")) {
        const Json& s = j.at("sweep");
        expect_keys(s, "sweep", {"gamma0_values"});
        if (s.contains("gamma0_values")) {
            if (!s.at("gamma0_values").is_array() || s.at("gamma0_values").empty())
                throw ConfigError("sweep.gamma0_values must be a non-empty array");
            cfg.sweep.gamma0_values.clear();
            for (const auto& v : s.at("gamma0_values")) {
                const double g = number_at(v, "sweep.gamma0_values[]");
                if (!(g > 0.0)) throw ConfigError("sweep.gamma0_values entries must be positive");
                cfg.sweep.gamma0_values.push_back(g);
            }
        }
    }

    if (j.contains("out_dir")) {
        if (!j.at("out_dir").is_string()) throw ConfigError("out_dir must be a string");
        cfg.out_dir = j.at("out_dir").get<std::string>();
    }
    return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

/// --out flag beats TDMOSC_OUT, which beats the config value.
inline std::string resolve_out_dir(const RunConfig& cfg, const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("TDMOSC_OUT"); env && *env) return env;
    return cfg.out_dir;
}

} // namespace tdmosc
