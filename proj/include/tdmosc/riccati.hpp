#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "tdmosc/classical.hpp"
#include "tdmosc/errors.hpp"
#include "tdmosc/grid.hpp"
#include "tdmosc/mass_model.hpp"
#include "tdmosc/packet.hpp"

namespace tdmosc {

/// hbar and m appear explicitly only in this module; everything else works
/// in hbar = m = 1 units.
struct PhysicalConstants {
    double hbar = 1.0;
    double m = 1.0;
};

/// State of the general Gaussian packet
/// Psi(x, t) = N(t) exp(i [ y(t) xt^2 + <p> xt / hbar ]), xt = x - eta(t),
/// with the quadratic coefficient tied to the Ermakov amplitude.
struct RiccatiState {
    double t = 0.0;
    Complex y;         // y = y_R + i y_I, y_I > 0
    double alpha = 1.0;
    double alpha_dot = 0.0;
    double eta = 0.0;
    double eta_dot = 0.0;
    double p_mean = 0.0; // m eta_dot
};

/// (2 hbar / m) y = alpha_dot / alpha + i / alpha^2, the closed solution of
/// the Riccati equation in terms of the Ermakov amplitude.
inline Complex y_from_alpha(double alpha, double alpha_dot, PhysicalConstants c = {}) {
    if (!(alpha > 0.0)) throw ErmakovSingularity("y_from_alpha: alpha <= 0");
    const double pref = 0.5 * c.m / c.hbar;
    return Complex(pref * alpha_dot / alpha, pref / (alpha * alpha));
}

inline double ermakov_lewis_invariant(double alpha, double alpha_dot, double eta, double eta_dot) {
    const double cross = eta_dot * alpha - eta * alpha_dot;
    const double ratio = eta / alpha;
    return 0.5 * (cross * cross + ratio * ratio);
}

/// Max over interior grid points of |(2hbar/m) ydot + ((2hbar/m) y)^2 + w^2|
/// with ydot from second-order finite differences (nonuniform-safe).
inline double riccati_residual(std::span<const double> t, std::span<const Complex> y,
                               const FrequencyFn& w2, PhysicalConstants c = {}) {
    if (t.size() != y.size()) throw std::invalid_argument("riccati_residual: size mismatch");
    if (t.size() < 3) throw GridTooCoarse("riccati_residual: need at least 3 grid points");
    const double k = 2.0 * c.hbar / c.m;
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        const double hm = t[i] - t[i - 1];
        const double hp = t[i + 1] - t[i];
        const Complex ydot =
            (hm * hm * y[i + 1] - hp * hp * y[i - 1] + (hp * hp - hm * hm) * y[i]) /
            (hm * hp * (hm + hp));
        const Complex res = k * ydot + (k * y[i]) * (k * y[i]) + w2(t[i]);
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}

/// Snapshot of Psi on a grid; |N| is fixed by the continuum unit norm
/// (|N| = (2 y_I / pi)^{1/4}) and the purely time-dependent phase K(t) is
/// set to zero, so comparisons downstream must be phase-insensitive.
inline GridWavefunction build_wp(const RiccatiState& s, const SpatialGrid& grid,
                                 PhysicalConstants c = {}) {
    if (!(s.y.imag() > 0.0)) throw NonNormalizable("build_wp: Im(y) <= 0");
    const double mag_N = std::pow(2.0 * s.y.imag() / std::numbers::pi, 0.25);
    GridWavefunction wf;
    wf.grid = grid;
    wf.t = s.t;
    wf.psi.resize(grid.n_interior);
    for (std::size_t j = 0; j < grid.n_interior; ++j) {
        const double xt = grid.x(j) - s.eta;
        const Complex arg = Complex(0.0, 1.0) * (s.y * xt * xt + s.p_mean * xt / c.hbar);
        wf.psi[j] = mag_N * std::exp(arg);
    }
    return wf;
}

/// The packet family for a mass model, obtained through the u = q / sqrt(M)
/// reduction: the damped-oscillator data are mapped to initial conditions of
/// the canonical Ermakov equation for w^2 = effective_frequency(model), and
/// the packet width in the original variable is hbar alpha^2 / (2 m M(tau)).
struct RiccatiPipeline {
    MassModel model;
    std::vector<double> tau;
    std::vector<RiccatiState> states;
    std::vector<double> width_x; // (Delta x)^2 in the mass problem

    std::size_t size() const { return tau.size(); }
};

struct RiccatiSeed {
    Complex u0{1.0, 0.0};
    Complex udot0{0.0, 1.0};
    double eta0 = 0.0;
    double etadot0 = 0.0;
};

inline RiccatiPipeline wp_from_mass_model(const MassModel& model, const RiccatiSeed& seed,
                                          std::span<const double> sample_ts, double tol,
                                          PhysicalConstants c = {}) {
    validate_params(model);
    const MassSample m0 = eval_mass(model, sample_ts.front());
    const double sqrtM = std::sqrt(m0.M);

    // q = u sqrt(M): same conserved Wronskian as M W[u, u*]
    const Complex q0 = seed.u0 * sqrtM;
    const Complex qdot0 = seed.udot0 * sqrtM + 0.5 * seed.u0 * m0.M_dot / sqrtM;
    const Complex W0 = wronskian(q0, qdot0);
    const double W0_scale = wronskian_scale(W0);

    // rescale |q| so the Ermakov equation takes its canonical 1/alpha^3 form
    const double s = std::sqrt(0.5 * W0_scale);
    const double aq = std::abs(q0);
    const double alpha0 = aq / s;
    const double alphadot0 = (q0.real() * qdot0.real() + q0.imag() * qdot0.imag()) / aq / s;

    const FrequencyFn w2 = effective_frequency(model);
    const RealTrajectory alpha = solve_ermakov(w2, alpha0, alphadot0, sample_ts, tol);
    const RealTrajectory eta = solve_newton(w2, seed.eta0, seed.etadot0, sample_ts, tol);

    RiccatiPipeline pipe;
    pipe.model = model;
    pipe.tau = alpha.t;
    pipe.states.reserve(alpha.size());
    pipe.width_x.reserve(alpha.size());
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        RiccatiState st;
        st.t = alpha.t[k];
        st.alpha = alpha.value[k];
        st.alpha_dot = alpha.derivative[k];
        st.eta = eta.value[k];
        st.eta_dot = eta.derivative[k];
        st.p_mean = c.m * eta.derivative[k];
        st.y = y_from_alpha(st.alpha, st.alpha_dot, c);
        pipe.states.push_back(st);
        const double M = eval_mass(model, alpha.t[k]).M;
        pipe.width_x.push_back(c.hbar * st.alpha * st.alpha / (2.0 * c.m * M));
    }
    return pipe;
}

} // namespace tdmosc
