#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <sstream>
#include <vector>

#include "tdmosc/classical.hpp"
#include "tdmosc/errors.hpp"
#include "tdmosc/grid.hpp"
#include "tdmosc/mass_model.hpp"

namespace tdmosc {

// Independent ground truth for the analytic packets: Crank-Nicolson
// integration of i psi_t = H(t) psi on the spatial grid. The oracle never
// touches the packet formulas except through the initial snapshot.

/// H = -(kin(t)/2) d^2/dx^2 + (pot(t)/2) x^2, covering the mass Hamiltonian
/// (kin = 1/M, pot = M), the frequency one (kin = 1, pot = w^2) and the
/// zero-test hook.
struct HamiltonianSpec {
    enum class Kind { TimeDependentMass, TimeDependentFrequency, Zero };
    Kind kind = Kind::TimeDependentMass;
    MassModel model;
    FrequencyFn w2;

    static HamiltonianSpec mass(const MassModel& m) {
        HamiltonianSpec s;
        s.kind = Kind::TimeDependentMass;
        s.model = m;
        return s;
    }
    static HamiltonianSpec frequency(FrequencyFn w2fn) {
        HamiltonianSpec s;
        s.kind = Kind::TimeDependentFrequency;
        s.w2 = std::move(w2fn);
        return s;
    }
    static HamiltonianSpec zero() {
        HamiltonianSpec s;
        s.kind = Kind::Zero;
        return s;
    }

    /// kinetic and potential coefficients at time t
    std::pair<double, double> coefficients(double t) const {
        switch (kind) {
            case Kind::TimeDependentMass: {
                const double M = eval_mass(model, t).M;
                return {1.0 / M, M};
            }
            case Kind::TimeDependentFrequency:
                return {1.0, w2(t)};
            case Kind::Zero:
                return {0.0, 0.0};
        }
        return {0.0, 0.0};
    }
};

struct EvolveOptions {
    double leak_threshold = 1e-8; // max tolerated |psi| at the first/last interior node
};

/// One Crank-Nicolson step: (1 + i dt H/2) psi' = (1 - i dt H/2) psi with H
/// evaluated at the step midpoint and the Laplacian in second-order central
/// differences. The scheme is exactly unitary for the Hermitian
/// discretization, so the discrete norm is conserved to roundoff.
inline void crank_nicolson_step(GridWavefunction& wf, const HamiltonianSpec& spec, double dtau,
                                const EvolveOptions& opt = {}) {
    if (!(dtau > 0.0)) throw std::invalid_argument("crank_nicolson_step: dtau > 0 required");
    const std::size_t n = wf.psi.size();
    const double h = wf.grid.h();
    const auto [kin, pot] = spec.coefficients(wf.t + 0.5 * dtau);

    const double off_h = -0.5 * kin / (h * h);       // off-diagonal of H
    const Complex off = Complex(0.0, 0.5 * dtau) * off_h;

    static thread_local std::vector<Complex> diag, rhs, scratch;
    diag.resize(n);
    rhs.resize(n);
    scratch.resize(n);

    for (std::size_t j = 0; j < n; ++j) {
        const double x = wf.grid.x(j);
        const double Hjj = kin / (h * h) + 0.5 * pot * x * x;
        const Complex iHdt = Complex(0.0, 0.5 * dtau) * Hjj;
        diag[j] = 1.0 + iHdt;
        const Complex left = j > 0 ? wf.psi[j - 1] : Complex(0.0, 0.0);
        const Complex right = j + 1 < n ? wf.psi[j + 1] : Complex(0.0, 0.0);
        rhs[j] = (1.0 - iHdt) * wf.psi[j] - off * (left + right);
    }

    // Thomas solve with constant off-diagonals
    scratch[0] = off / diag[0];
    rhs[0] /= diag[0];
    for (std::size_t j = 1; j < n; ++j) {
        const Complex denom = diag[j] - off * scratch[j - 1];
        scratch[j] = off / denom;
        rhs[j] = (rhs[j] - off * rhs[j - 1]) / denom;
    }
    for (std::size_t j = n - 1; j-- > 0;) rhs[j] -= scratch[j] * rhs[j + 1];

    wf.psi = rhs;
    wf.t += dtau;

    if (wf.edge_amplitude() > opt.leak_threshold) {
        std::ostringstream os;
        os << "edge amplitude " << wf.edge_amplitude() << " at t = " << wf.t
           << " exceeds " << opt.leak_threshold << "; enlarge the box";
        throw BoundaryLeak(os.str());
    }
}

/// Repeated Crank-Nicolson stepping with snapshots at the requested times;
/// each target is hit exactly by shortening the final partial step.
inline std::vector<GridWavefunction> evolve(const GridWavefunction& psi0, const HamiltonianSpec& spec,
                                            std::span<const double> snapshot_times, double dtau,
                                            const EvolveOptions& opt = {}) {
    if (snapshot_times.empty()) throw std::invalid_argument("evolve: no snapshot times");
    if (psi0.edge_amplitude() > opt.leak_threshold)
        throw BoundaryLeak("evolve: initial state already touches the box edge");

    GridWavefunction wf = psi0;
    std::vector<GridWavefunction> snaps;
    snaps.reserve(snapshot_times.size());
    for (double target : snapshot_times) {
        if (target < wf.t - 1e-12)
            throw std::invalid_argument("evolve: snapshot times must be non-decreasing");
        while (wf.t < target - 1e-12) {
            const double step = std::min(dtau, target - wf.t);
            crank_nicolson_step(wf, spec, step, opt);
        }
        wf.t = target; // kill accumulated roundoff in t
        snaps.push_back(wf);
    }
    return snaps;
}

struct CertificationSnapshot {
    double t = 0.0;
    double infidelity = 0.0;
    double norm_error = 0.0;
};

struct CertificationReport {
    std::vector<CertificationSnapshot> snapshots;
    double max_infidelity = 0.0;
    double max_norm_error = 0.0;
};

/// Evolves the analytic packet's initial snapshot numerically and reports
/// 1 - fidelity against the analytic packet at each snapshot time. The
/// evaluator may return an unnormalized profile; both sides are normalized
/// on the grid.
inline CertificationReport certify_packet(
    const std::function<Complex(double x, double t)>& analytic, const HamiltonianSpec& spec,
    const SpatialGrid& grid, std::span<const double> snapshot_times, double dtau,
    const EvolveOptions& opt = {}) {
    if (snapshot_times.size() < 2)
        throw std::invalid_argument("certify_packet: need the initial time plus snapshots");

    const auto sample = [&](double t) {
        GridWavefunction wf;
        wf.grid = grid;
        wf.t = t;
        wf.psi.resize(grid.n_interior);
        for (std::size_t j = 0; j < grid.n_interior; ++j) wf.psi[j] = analytic(grid.x(j), t);
        wf.normalize();
        return wf;
    };

    GridWavefunction psi0 = sample(snapshot_times.front());
    const std::vector<GridWavefunction> snaps =
        evolve(psi0, spec, snapshot_times.subspan(1), dtau, opt);

    CertificationReport rep;
    for (const auto& snap : snaps) {
        CertificationSnapshot cs;
        cs.t = snap.t;
        cs.infidelity = 1.0 - fidelity(snap, sample(snap.t));
        cs.norm_error = std::abs(snap.norm() - 1.0);
        rep.snapshots.push_back(cs);
        rep.max_infidelity = std::max(rep.max_infidelity, cs.infidelity);
        rep.max_norm_error = std::max(rep.max_norm_error, cs.norm_error);
    }
    return rep;
}

} // namespace tdmosc
