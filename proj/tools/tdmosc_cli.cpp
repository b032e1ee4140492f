// Command-line driver: wires the JSON config to the simulation, expansion,
// verification and PDE-certification pipelines and writes CSV/JSON artifacts.
//
// Exit codes: 0 success, 1 invariant failure, 2 config error, 3 numerical error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "tdmosc/config.hpp"
#include "tdmosc/tdmosc.hpp"
#include "tdmosc/verify.hpp"

namespace fs = std::filesystem;
using namespace tdmosc;

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> skips;
    std::string pipeline; // overrides oracle.pipeline when set
    double tol = 0.0;     // overrides config tol when > 0
};

RunConfig effective_config(const CliOptions& opt) {
    RunConfig cfg = opt.config_path.empty() ? RunConfig{} : load_config_file(opt.config_path);
    if (opt.tol != 0.0) {
        if (!(opt.tol > 0.0)) throw ConfigError("--tol must be positive");
        cfg.tol = opt.tol;
    }
    if (!opt.pipeline.empty()) {
        if (opt.pipeline != "u" && opt.pipeline != "riccati" && opt.pipeline != "both")
            throw ConfigError("--pipeline must be 'u', 'riccati' or 'both'");
        cfg.oracle.pipeline = opt.pipeline;
    }
    cfg.out_dir = resolve_out_dir(cfg, opt.out_dir);
    return cfg;
}

fs::path ensure_out_dir(const RunConfig& cfg) {
    fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
    return dir;
}

void warn_about_model(const MassModel& model, double tau0, double tau1) {
    const AdmissibilityReport rep = validate_model(model, tau0, tau1);
    for (const std::string& flag : rep.flags)
        std::cerr << "warning: mass model " << model.kind_name() << " " << flag << "\n";
}

int cmd_simulate(const RunConfig& cfg) {
    const fs::path dir = ensure_out_dir(cfg);
    warn_about_model(cfg.model, cfg.tau0, cfg.tau1);

    const auto grid = uniform_grid(cfg.tau0, cfg.tau1, cfg.samples);
    const auto traj = solve_damped_oscillator(cfg.model, cfg.u0, cfg.udot0, grid, cfg.tol);
    PacketConfig pc{cfg.b0, cfg.N0_phase};
    const PacketSeries series = build_packet_series(traj, pc, cfg.tol);

    {
        std::ofstream os(dir / "trajectory.csv");
        write_trajectory_csv(os, traj);
    }
    {
        std::ofstream os(dir / "packet.csv");
        write_packet_csv(os, series);
    }

    // general Gaussian packet along the same grid: manifest plus a few snapshots
    RiccatiSeed seed{cfg.u0, cfg.udot0, cfg.eta0, cfg.etadot0};
    const RiccatiPipeline pipe = wp_from_mass_model(cfg.model, seed, grid, cfg.tol);
    Json manifest = Json::array();
    for (const RiccatiState& s : pipe.states)
        manifest.push_back({{"t", s.t},
                            {"eta", s.eta},
                            {"alpha", s.alpha},
                            {"y_R", s.y.real()},
                            {"y_I", s.y.imag()},
                            {"I", ermakov_lewis_invariant(s.alpha, s.alpha_dot, s.eta, s.eta_dot)}});
    {
        std::ofstream os(dir / "wp_manifest.json");
        os << manifest.dump(2) << "\n";
    }
    const auto box = cfg.grid.box ? *cfg.grid.box : suggest_box(traj, cfg.b0);
    const SpatialGrid sgrid = SpatialGrid::with_spacing(box.first, box.second, cfg.grid.h);
    std::size_t snap_index = 0;
    for (double t : cfg.expansion.times) {
        if (t < cfg.tau0 || t > cfg.tau1) continue;
        std::size_t k = 0;
        for (std::size_t j = 0; j < pipe.size(); ++j)
            if (std::abs(pipe.tau[j] - t) < std::abs(pipe.tau[k] - t)) k = j;
        std::ostringstream name;
        name << "wp_snapshot_" << snap_index++ << ".csv";
        std::ofstream os(dir / name.str());
        write_wp_snapshot_csv(os, build_wp(pipe.states[k], sgrid));
    }

    const auto windows =
        quasi_coherence_window(cfg.model, cfg.tau0, cfg.tau1, cfg.quasi_coherence_eps);
    Json qc = Json::array();
    for (const Interval& w : windows) qc.push_back({w.lo, w.hi});
    Json summary{{"model", cfg.model.kind_name()},
                 {"lambda0", series.lambda_ref},
                 {"max_lambda_deviation", series.max_lambda_deviation()},
                 {"max_abel_error", traj.max_abel_error()},
                 {"max_norm_error", series.max_norm_error()},
                 {"quasi_coherence_windows", qc}};
    std::ofstream os(dir / "summary.json");
    os << summary.dump(2) << "\n";

    std::cout << "wrote " << (dir / "trajectory.csv").string() << ", "
              << (dir / "packet.csv").string() << ", wp_manifest.json and "
              << (dir / "summary.json").string() << "\n";
    return 0;
}

int cmd_verify(const RunConfig& cfg, const std::set<std::string>& skips) {
    const std::vector<InvariantRow> rows = run_verify(cfg, skips);

    std::cout << std::left << std::setw(20) << "model" << std::setw(12) << "invariant"
              << std::setw(14) << "measured" << std::setw(14) << "threshold"
              << "status\n";
    bool all_ok = true;
    for (const InvariantRow& r : rows) {
        std::cout << std::left << std::setw(20) << r.model << std::setw(12) << r.name;
        if (r.skipped) {
            std::cout << std::setw(14) << "-" << std::setw(14) << "-" << "skipped\n";
            continue;
        }
        std::ostringstream meas, thr;
        meas << std::scientific << std::setprecision(2) << r.measured;
        thr << std::scientific << std::setprecision(2) << r.threshold;
        std::cout << std::setw(14) << meas.str() << std::setw(14) << thr.str()
                  << (r.passed ? "pass" : "FAIL");
        if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
        std::cout << "\n";
        all_ok = all_ok && r.passed;
    }
    return all_ok ? 0 : 1;
}

int cmd_expand(const RunConfig& cfg) {
    const fs::path dir = ensure_out_dir(cfg);

    std::vector<double> times{cfg.tau0};
    for (double t : cfg.expansion.times)
        if (t > cfg.tau0 && t <= cfg.tau1) times.push_back(t);
    if (times.size() < 2) times.push_back(cfg.tau1);

    const auto traj = solve_damped_oscillator(cfg.model, cfg.u0, cfg.udot0, times, cfg.tol);
    PacketConfig pc{cfg.b0, cfg.N0_phase};
    const PacketSeries series = build_packet_series(traj, pc, cfg.tol, false);

    std::vector<ExpansionSpectrum> specs;
    for (std::size_t k = 0; k < series.states.size(); ++k) {
        const ExpansionSpectrum spec = coefficients_quadrature(
            series.states[k], cfg.expansion.n_max, cfg.expansion.tail_tol);
        std::ostringstream name;
        name << "spectrum_" << k << ".csv";
        std::ofstream os(dir / name.str());
        write_spectrum_csv(os, spec);
        specs.push_back(spec);
    }

    double cross_time_dev = 0.0, poisson_dev = 0.0;
    for (std::size_t a = 0; a < specs.size(); ++a) {
        poisson_dev = std::max(poisson_dev, compare_distributions(specs[a], 1e-8).max_rel_err);
        for (std::size_t b = a + 1; b < specs.size(); ++b)
            for (std::size_t n = 0; n < specs[a].moduli_sq.size(); ++n)
                cross_time_dev = std::max(
                    cross_time_dev, std::abs(specs[a].moduli_sq[n] - specs[b].moduli_sq[n]));
    }

    Json report{{"model", cfg.model.kind_name()},
                {"times", times},
                {"lambda0", series.lambda_ref},
                {"cross_time_max_deviation", cross_time_dev},
                {"max_rel_err_vs_poisson", poisson_dev}};
    std::ofstream os(dir / "expansion_report.json");
    os << report.dump(2) << "\n";

    std::cout << "lambda0 = " << fmt17(series.lambda_ref)
              << ", cross-time sup deviation = " << fmt17(cross_time_dev)
              << ", max rel err vs Poisson = " << fmt17(poisson_dev) << "\n";
    return 0;
}

Json certification_entry(const RunConfig& cfg, const std::string& pipeline) {
    const double t0 = std::max(cfg.oracle.t0, cfg.tau0);
    const double t1 = std::min(cfg.oracle.t1, cfg.tau1);
    if (!(t0 < t1)) throw ConfigError("oracle window does not overlap the run window");
    const auto snaps = uniform_grid(t0, t1, cfg.oracle.snapshots);
    std::vector<double> traj_grid = snaps;
    if (t0 > cfg.tau0) traj_grid.insert(traj_grid.begin(), cfg.tau0);

    EvolveOptions opt;
    opt.leak_threshold = cfg.grid.leak_threshold;

    CertificationReport rep;
    SpatialGrid grid;
    if (pipeline == "u") {
        const auto traj = solve_damped_oscillator(cfg.model, cfg.u0, cfg.udot0, traj_grid, cfg.tol);
        PacketConfig pc{cfg.b0, cfg.N0_phase};
        const PacketSeries series = build_packet_series(traj, pc, cfg.tol, false);
        const auto box = cfg.grid.box ? *cfg.grid.box : suggest_box(traj, cfg.b0);
        grid = SpatialGrid::with_spacing(box.first, box.second, cfg.grid.h);
        const auto evaluator = [&series](double x, double t) {
            for (const PacketState& s : series.states)
                if (std::abs(s.tau - t) < 1e-12) return eval_packet(s, x);
            throw std::logic_error("certify: no packet state at requested time");
        };
        rep = certify_packet(evaluator, HamiltonianSpec::mass(cfg.model), grid, snaps,
                             cfg.grid.dtau, opt);
    } else {
        RiccatiSeed seed{cfg.u0, cfg.udot0, cfg.eta0, cfg.etadot0};
        const RiccatiPipeline pipe = wp_from_mass_model(cfg.model, seed, traj_grid, cfg.tol);
        const auto u_traj = solve_damped_oscillator(cfg.model, cfg.u0, cfg.udot0, traj_grid, cfg.tol);
        const auto box = cfg.grid.box ? *cfg.grid.box : suggest_box(u_traj, cfg.b0);
        grid = SpatialGrid::with_spacing(box.first, box.second, cfg.grid.h);
        const auto evaluator = [&pipe](double x, double t) -> Complex {
            for (const RiccatiState& s : pipe.states) {
                if (std::abs(s.t - t) < 1e-12) {
                    const double xt = x - s.eta;
                    return std::exp(Complex(0.0, 1.0) * (s.y * xt * xt + s.p_mean * xt));
                }
            }
            throw std::logic_error("certify: no Riccati state at requested time");
        };
        rep = certify_packet(evaluator, HamiltonianSpec::frequency(effective_frequency(cfg.model)),
                             grid, snaps, cfg.grid.dtau, opt);
    }

    Json snapshots = Json::array();
    for (const CertificationSnapshot& s : rep.snapshots)
        snapshots.push_back({{"t", s.t}, {"infidelity", s.infidelity}, {"norm_error", s.norm_error}});
    Json params;
    if (cfg.model.kind == MassModel::Kind::Constant) params["M0"] = cfg.model.M0;
    else params["gamma0"] = cfg.model.gamma0;
    return Json{{"model", cfg.model.kind_name()},
                {"params", params},
                {"pipeline", pipeline},
                {"grid", {{"x_min", grid.x_min}, {"x_max", grid.x_max}, {"h", grid.h()}}},
                {"dt", cfg.grid.dtau},
                {"snapshots", snapshots},
                {"max_infidelity", rep.max_infidelity}};
}

int cmd_oracle(const RunConfig& cfg) {
    const fs::path dir = ensure_out_dir(cfg);
    Json report;
    if (cfg.oracle.pipeline == "u" || cfg.oracle.pipeline == "both")
        report["u"] = certification_entry(cfg, "u");
    if (cfg.oracle.pipeline == "riccati" || cfg.oracle.pipeline == "both")
        report["riccati"] = certification_entry(cfg, "riccati");

    std::ofstream os(dir / "certification.json");
    os << report.dump(2) << "\n";

    for (const auto& [name, entry] : report.items())
        std::cout << name << " pipeline max infidelity = "
                  << fmt17(entry.at("max_infidelity").get<double>()) << "\n";
    std::cout << "wrote " << (dir / "certification.json").string() << "\n";
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    const fs::path dir = ensure_out_dir(cfg);
    if (cfg.model.kind == MassModel::Kind::Constant)
        throw ConfigError("sweep requires a non-constant model kind to scan gamma0");

    std::ofstream os(dir / "sweep.csv");
    os << "gamma0,lambda0,max_lambda_dev,max_abel_error,max_norm_error,admissible\n";
    const auto grid = uniform_grid(cfg.tau0, cfg.tau1, cfg.samples);
    for (double g0 : cfg.sweep.gamma0_values) {
        MassModel m = cfg.model;
        m.gamma0 = g0;
        const auto traj = solve_damped_oscillator(m, cfg.u0, cfg.udot0, grid, cfg.tol);
        const PacketAdmissibility adm = check_admissibility(traj);
        if (!adm.admissible) {
            write_csv_row(os, {g0, 0.0, 0.0, traj.max_abel_error(), 0.0, 0.0});
            continue;
        }
        PacketConfig pc{cfg.b0, cfg.N0_phase};
        const PacketSeries series = build_packet_series(traj, pc, cfg.tol);
        write_csv_row(os, {g0, series.lambda_ref, series.max_lambda_deviation(),
                           traj.max_abel_error(), series.max_norm_error(), 1.0});
    }
    std::cout << "wrote " << (dir / "sweep.csv").string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian wave packets of the quantum oscillator with time-dependent mass"};
    app.require_subcommand(1);

    CliOptions opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON config file (all fields optional)");
        sub->add_option("--out", opt.out_dir, "output directory (beats TDMOSC_OUT and the config)");
        sub->add_option("--tol", opt.tol, "override the integrator tolerance");
    };

    CLI::App* sim = app.add_subcommand("simulate", "write trajectory and packet time series");
    add_common(sim);
    CLI::App* ver = app.add_subcommand("verify", "run the invariant suite and print a pass/fail table");
    add_common(ver);
    ver->add_option("--skip", opt.skips, "invariant rows to skip (e.g. pde)")->allow_extra_args(false);
    CLI::App* exp = app.add_subcommand("expand", "expansion spectra at the configured sample times");
    add_common(exp);
    CLI::App* ora = app.add_subcommand("oracle", "Crank-Nicolson certification of the analytic packets");
    add_common(ora);
    ora->add_option("--pipeline", opt.pipeline, "u | riccati | both");
    CLI::App* swp = app.add_subcommand("sweep", "scan gamma0 values and tabulate invariant drifts");
    add_common(swp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const RunConfig cfg = effective_config(opt);
        if (sim->parsed()) return cmd_simulate(cfg);
        if (ver->parsed()) return cmd_verify(cfg, std::set<std::string>(opt.skips.begin(), opt.skips.end()));
        if (exp->parsed()) return cmd_expand(cfg);
        if (ora->parsed()) return cmd_oracle(cfg);
        if (swp->parsed()) return cmd_sweep(cfg);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "ConfigError: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
