#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <set>
#include <string>
#include <vector>

#include "tdmosc/config.hpp"
#include "tdmosc/csv.hpp"
#include "tdmosc/expansion.hpp"
#include "tdmosc/packet.hpp"
#include "tdmosc/pde.hpp"
#include "tdmosc/riccati.hpp"

namespace tdmosc {

struct InvariantRow {
    std::string model;
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool passed = false;
    bool skipped = false;
    std::string detail;
};

/// Box large enough for the run: +- (max |center| + 12 max sigma + 2),
/// never smaller than the default +-20 box.
inline std::pair<double, double> suggest_box(const AuxiliaryTrajectory& traj, Complex b0) {
    const double W0s = wronskian_scale(traj.W0);
    double extent = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double width = std::norm(traj.u[k]) / W0s; // (Delta x)^2
        const double center = 2.0 * width * b_of_tau(b0, traj.u[k]).real();
        extent = std::max(extent, std::abs(center) + 12.0 * std::sqrt(width) + 2.0);
    }
    const double half = std::max(20.0, std::ceil(extent));
    return {-half, half};
}

namespace detail {

struct PipelinePieces {
    AuxiliaryTrajectory traj;
    PacketSeries series;
    RiccatiPipeline riccati;
};

inline PipelinePieces run_pipelines(const RunConfig& cfg, const MassModel& model) {
    PipelinePieces p;
    const auto grid = uniform_grid(cfg.tau0, cfg.tau1, cfg.samples);
    p.traj = solve_damped_oscillator(model, cfg.u0, cfg.udot0, grid, cfg.tol);
    PacketConfig pc{cfg.b0, cfg.N0_phase};
    p.series = build_packet_series(p.traj, pc, cfg.tol);
    RiccatiSeed seed{cfg.u0, cfg.udot0, cfg.eta0, cfg.etadot0};
    p.riccati = wp_from_mass_model(model, seed, grid, cfg.tol);
    return p;
}

} // namespace detail

/// The invariant rows for a single model. Row names double as --skip keys.
inline std::vector<InvariantRow> run_invariant_suite(const RunConfig& cfg, const MassModel& model,
                                                     const std::set<std::string>& skips = {}) {
    std::vector<InvariantRow> rows;
    const std::string mname = model.kind_name();
    const Thresholds& th = cfg.thresholds;

    auto add_row = [&](const std::string& name, double threshold, auto&& compute) {
        InvariantRow row;
        row.model = mname;
        row.name = name;
        row.threshold = threshold;
        if (skips.count(name)) {
            row.skipped = true;
            row.passed = true;
        } else {
            compute(row);
            row.passed = row.measured < row.threshold && row.detail.empty();
        }
        rows.push_back(std::move(row));
    };

    const detail::PipelinePieces p = detail::run_pipelines(cfg, model);

    add_row("wronskian", th.wronskian, [&](InvariantRow& r) {
        r.measured = p.traj.max_abel_error();
        const double purity = std::abs(p.traj.W0.real()) / std::abs(p.traj.W0);
        if (purity > 1e-12) r.detail = "W0 not pure imaginary";
    });

    add_row("lambda", th.lambda, [&](InvariantRow& r) {
        r.measured = p.series.max_lambda_deviation();
    });

    add_row("norm", th.norm, [&](InvariantRow& r) { r.measured = p.series.max_norm_error(); });

    add_row("poisson", th.poisson, [&](InvariantRow& r) {
        // the grid must start at tau0: that instant anchors u = 1, b0 and W0
        std::vector<double> times{cfg.tau0};
        for (double t : cfg.expansion.times)
            if (t > cfg.tau0 && t <= cfg.tau1) times.push_back(t);
        if (times.size() < 2) times = {cfg.tau0, 0.5 * (cfg.tau0 + cfg.tau1), cfg.tau1};
        const auto traj = solve_damped_oscillator(model, cfg.u0, cfg.udot0, times, cfg.tol);
        PacketConfig pc{cfg.b0, cfg.N0_phase};
        const PacketSeries series = build_packet_series(traj, pc, cfg.tol, false);
        double worst = 0.0;
        std::vector<std::vector<double>> moduli;
        for (const PacketState& s : series.states) {
            const ExpansionSpectrum spec =
                coefficients_quadrature(s, cfg.expansion.n_max, cfg.expansion.tail_tol);
            worst = std::max(worst, compare_distributions(spec, 1e-8).max_rel_err);
            moduli.push_back(spec.moduli_sq);
        }
        for (std::size_t a = 0; a < moduli.size(); ++a)
            for (std::size_t b = a + 1; b < moduli.size(); ++b)
                for (std::size_t n = 0; n < moduli[a].size(); ++n)
                    worst = std::max(worst, std::abs(moduli[a][n] - moduli[b][n]));
        r.measured = worst;
    });

    add_row("lewis", th.lewis, [&](InvariantRow& r) {
        const auto& states = p.riccati.states;
        const double I0 = ermakov_lewis_invariant(states[0].alpha, states[0].alpha_dot,
                                                  states[0].eta, states[0].eta_dot);
        double drift = 0.0;
        for (const RiccatiState& s : states) {
            const double Ik = ermakov_lewis_invariant(s.alpha, s.alpha_dot, s.eta, s.eta_dot);
            drift = std::max(drift, I0 != 0.0 ? std::abs(Ik - I0) / std::abs(I0)
                                              : std::abs(Ik));
        }
        r.measured = drift;
    });

    add_row("riccati", th.riccati, [&](InvariantRow& r) {
        const double t1 = std::min(cfg.tau1, cfg.tau0 + 5.0);
        const auto fine = uniform_grid(cfg.tau0, t1, static_cast<std::size_t>((t1 - cfg.tau0) / 1e-3));
        RiccatiSeed seed{cfg.u0, cfg.udot0, cfg.eta0, cfg.etadot0};
        const RiccatiPipeline pipe = wp_from_mass_model(model, seed, fine, cfg.tol);
        std::vector<Complex> y;
        y.reserve(pipe.size());
        for (const auto& s : pipe.states) y.push_back(s.y);
        r.measured = riccati_residual(pipe.tau, y, effective_frequency(model));
    });

    add_row("width", th.width, [&](InvariantRow& r) {
        const double W0s = wronskian_scale(p.traj.W0);
        double worst = 0.0;
        for (std::size_t k = 0; k < p.riccati.size(); ++k) {
            const double width_u = std::norm(p.traj.u[k]) / W0s;
            worst = std::max(worst, std::abs(p.riccati.width_x[k] / width_u - 1.0));
        }
        r.measured = worst;
    });

    add_row("pde", th.pde, [&](InvariantRow& r) {
        const double t0 = std::max(cfg.oracle.t0, cfg.tau0);
        const double t1 = std::min(cfg.oracle.t1, cfg.tau1);
        if (!(t0 < t1)) throw ConfigError("oracle window does not overlap the run window");
        const auto snaps = uniform_grid(t0, t1, cfg.oracle.snapshots);
        std::vector<double> traj_grid = snaps;
        if (t0 > cfg.tau0) traj_grid.insert(traj_grid.begin(), cfg.tau0); // keep the u = 1 anchor
        const auto traj = solve_damped_oscillator(model, cfg.u0, cfg.udot0, traj_grid, cfg.tol);
        PacketConfig pc{cfg.b0, cfg.N0_phase};
        const PacketSeries series = build_packet_series(traj, pc, cfg.tol, false);
        const auto box = cfg.grid.box ? *cfg.grid.box : suggest_box(traj, cfg.b0);
        const SpatialGrid grid = SpatialGrid::with_spacing(box.first, box.second, cfg.grid.h);
        const auto evaluator = [&series](double x, double t) {
            for (const PacketState& s : series.states)
                if (std::abs(s.tau - t) < 1e-12) return eval_packet(s, x);
            throw std::logic_error("certify: no packet state at requested time");
        };
        EvolveOptions opt;
        opt.leak_threshold = cfg.grid.leak_threshold;
        const CertificationReport rep = certify_packet(
            evaluator, HamiltonianSpec::mass(model), grid, snaps, cfg.grid.dtau, opt);
        r.measured = rep.max_infidelity;
    });

    return rows;
}

/// Models the suite runs over: the configured one, or the built-in trio when
/// the config does not pin a model (the out-of-the-box demonstration).
inline std::vector<MassModel> verify_models(const RunConfig& cfg) {
    if (cfg.model_explicit) return {cfg.model};
    return {MassModel::constant(1.0), MassModel::gaussian_decaying(0.1),
            MassModel::exponential(0.5)};
}

/// Independent model cases run concurrently; rows come back in model order.
inline std::vector<InvariantRow> run_verify(const RunConfig& cfg,
                                            const std::set<std::string>& skips = {}) {
    const std::vector<MassModel> models = verify_models(cfg);
    std::vector<std::future<std::vector<InvariantRow>>> futures;
    futures.reserve(models.size());
    for (const MassModel& m : models)
        futures.push_back(std::async(std::launch::async,
                                     [&cfg, m, &skips] { return run_invariant_suite(cfg, m, skips); }));
    std::vector<InvariantRow> all;
    for (auto& f : futures) {
        auto rows = f.get();
        all.insert(all.end(), rows.begin(), rows.end());
    }
    return all;
}

} // namespace tdmosc
