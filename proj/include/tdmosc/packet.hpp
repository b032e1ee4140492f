#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include "tdmosc/classical.hpp"
#include "tdmosc/errors.hpp"
#include "tdmosc/quadrature.hpp"

namespace tdmosc {

// Gaussian packet psi(x, tau) = N(tau) exp(-omega(tau) x^2 / 2 + b(tau) x)
// built on top of an auxiliary trajectory u(tau). All formulas below are
// exact consequences of the Schroedinger equation for the mass Hamiltonian;
// the tests check them against independent quadrature and a PDE solver.

/// |u| below this is treated as a breakdown of the construction.
inline constexpr double u_breakdown_threshold = 1e-12;

struct PacketConfig {
    Complex b0{1.0, 0.0};  // linear coefficient at tau0 (the trajectory has u(tau0) = 1)
    double N0_phase = 0.0; // arg N(tau0); the magnitude is fixed by normalization
};

struct PacketState {
    double tau = 0.0;
    Complex omega;
    Complex b;
    Complex N;
    double width = 0.0;  // (Delta x)^2 = 1 / (omega + omega*)
    double lambda = 0.0; // Poisson center of the occupation distribution
};

/// omega = -i M udot / u. Normalizability requires Re(omega) > 0, which is
/// equivalent to Im(udot conj(u)) > 0.
inline Complex omega_from_u(double M, Complex u, Complex udot) {
    if (std::abs(u) < u_breakdown_threshold)
        throw DivisionByZeroU("omega_from_u: |u| below breakdown threshold");
    return Complex(0.0, -1.0) * (M * udot / u);
}

inline Complex b_of_tau(Complex b0, Complex u) {
    if (std::abs(u) < u_breakdown_threshold)
        throw DivisionByZeroU("b_of_tau: |u| below breakdown threshold");
    return b0 / u;
}

/// (Delta x)^2 = 1 / (omega + omega*).
inline double width_from_omega(Complex omega) {
    const double sigma = 2.0 * omega.real();
    if (!(sigma > 0.0))
        throw NonNormalizable("width_from_omega: Re(omega) <= 0");
    return 1.0 / sigma;
}

/// Poisson center lambda = |b|^2 / (omega + omega*) = |b|^2 (Delta x)^2.
/// Along any admissible trajectory this is constant in tau: the occupation
/// numbers |C_n|^2 = e^{-lambda} lambda^n / n! do not evolve.
inline double lambda_of_tau(Complex b, Complex omega) {
    return std::norm(b) * width_from_omega(omega);
}

/// Positive Wronskian scale W_0, defined by W0 = -i W_0. Throws unless i W0
/// is real positive to within `rel_tol`, since otherwise Re(omega) cannot
/// stay positive and no normalizable packet exists.
inline double wronskian_scale(Complex W0, double rel_tol = 1e-9) {
    const Complex iW0 = Complex(0.0, 1.0) * W0;
    const double mag = std::abs(W0);
    if (mag == 0.0)
        throw InadmissibleWronskian("W0 = 0: u and u* are linearly dependent");
    if (std::abs(iW0.imag()) > rel_tol * mag)
        throw InadmissibleWronskian("W0 is not pure imaginary");
    if (!(iW0.real() > 0.0))
        throw InadmissibleWronskian("i W0 is negative: packet not normalizable");
    return iW0.real();
}

/// lambda0 = |b0|^2 / W_0, the conserved Poisson center expressed through
/// the initial data alone.
inline double lambda0(Complex b0, Complex W0) {
    return std::norm(b0) / wronskian_scale(W0);
}

/// |N| from the closed normalization integral:
/// |N|^2 = sqrt(sigma / (2 pi)) exp(-(b + b*)^2 / (2 sigma)), sigma = omega + omega*.
inline double normalization_magnitude(Complex omega, Complex b) {
    const double sigma = 2.0 * omega.real();
    if (!(sigma > 0.0)) throw NonNormalizable("normalization_magnitude: Re(omega) <= 0");
    const double re_b2 = 2.0 * b.real();
    const double n2 = std::sqrt(sigma / (2.0 * std::numbers::pi)) *
                      std::exp(-re_b2 * re_b2 / (2.0 * sigma));
    return std::sqrt(n2);
}

/// N(tau) from the phase equation  Ndot / N = -i (omega - b^2) / (2 M),
/// the x^0 component of the Schroedinger equation. Integrated jointly with
/// the trajectory's own ODE (same model, initial data and grid) so |N| can
/// be cross-checked against the closed formula.
inline std::vector<Complex> evolve_normalization(const AuxiliaryTrajectory& traj,
                                                 const PacketConfig& cfg, double tol) {
    if (traj.size() < 2) throw std::invalid_argument("evolve_normalization: empty trajectory");

    const MassModel model = traj.model;
    const Complex b0 = cfg.b0;
    const RhsFn<6> rhs = [&model, b0](double tau, const State<6>& y, State<6>& dy) {
        const MassSample ms = eval_mass(model, tau);
        const Complex u(y[0], y[1]);
        const Complex udot(y[2], y[3]);
        const Complex N(y[4], y[5]);
        const Complex uddot = -ms.gamma * udot - u;
        const Complex omega = Complex(0.0, -1.0) * (ms.M * udot / u);
        const Complex b = b0 / u;
        const Complex Ndot = Complex(0.0, -1.0) * (omega - b * b) / (2.0 * ms.M) * N;
        dy[0] = udot.real();
        dy[1] = udot.imag();
        dy[2] = uddot.real();
        dy[3] = uddot.imag();
        dy[4] = Ndot.real();
        dy[5] = Ndot.imag();
    };

    const Complex omega0 = omega_from_u(traj.mass_at(0), traj.u[0], traj.udot[0]);
    const Complex N0 = std::polar(normalization_magnitude(omega0, b_of_tau(cfg.b0, traj.u[0])),
                                  cfg.N0_phase);

    IvpOptions opt;
    opt.tol = tol;
    const State<6> y0{traj.u[0].real(),    traj.u[0].imag(),    traj.udot[0].real(),
                      traj.udot[0].imag(), N0.real(),           N0.imag()};
    const Sampled<6> sol = integrate_ivp<6>(rhs, y0, traj.tau, opt);

    std::vector<Complex> N;
    N.reserve(sol.y.size());
    for (const auto& y : sol.y) N.emplace_back(y[4], y[5]);
    return N;
}

/// Dual admissibility diagnostics: the sharp criterion (i W0 real positive)
/// and the heuristic one (u neither real nor pure imaginary anywhere). The
/// sharp criterion and min Re(omega) > 0 are equivalent; `consistent` records
/// whether the numerics agree with that.
struct PacketAdmissibility {
    bool admissible = false;      // sharp: W_0 > 0
    double W0_scale = 0.0;        // i W0 when defined, else 0
    double re_W0_rel = 0.0;       // |Re(W0)| / |W0|
    double min_re_omega = 0.0;
    bool re_omega_positive = false;
    bool heuristic_ok = false;    // min |Re u| > 0 and min |Im u| > 0 over the grid
    double min_abs_re_u = 0.0;
    double min_abs_im_u = 0.0;
    bool consistent = false;      // sharp criterion vs sign of Re(omega)
};

inline PacketAdmissibility check_admissibility(const AuxiliaryTrajectory& traj) {
    PacketAdmissibility rep;
    const double mag = std::abs(traj.W0);
    rep.re_W0_rel = mag > 0.0 ? std::abs(traj.W0.real()) / mag : 0.0;
    try {
        rep.W0_scale = wronskian_scale(traj.W0);
        rep.admissible = true;
    } catch (const InadmissibleWronskian&) {
        rep.admissible = false;
        rep.W0_scale = (Complex(0.0, 1.0) * traj.W0).real();
    }

    double min_re_omega = std::numeric_limits<double>::max();
    double min_re_u = std::numeric_limits<double>::max();
    double min_im_u = std::numeric_limits<double>::max();
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double M = traj.mass_at(k);
        const Complex u = traj.u[k];
        // Re(omega) = M Im(udot conj(u)) / |u|^2, finite even when |u| is tiny
        const double re_omega = M * std::imag(traj.udot[k] * std::conj(u)) / std::norm(u);
        min_re_omega = std::min(min_re_omega, re_omega);
        min_re_u = std::min(min_re_u, std::abs(u.real()));
        min_im_u = std::min(min_im_u, std::abs(u.imag()));
    }
    rep.min_re_omega = min_re_omega;
    rep.re_omega_positive = min_re_omega > 0.0;
    rep.min_abs_re_u = min_re_u;
    rep.min_abs_im_u = min_im_u;
    rep.heuristic_ok = min_re_u > 0.0 && min_im_u > 0.0;
    rep.consistent = rep.admissible == rep.re_omega_positive;
    return rep;
}

inline Complex eval_packet(const PacketState& s, double x) {
    return s.N * std::exp(-0.5 * s.omega * x * x + s.b * x);
}

/// L2 norm of the packet by Gauss-Hermite quadrature (an actual integral,
/// not the closed formula; used to detect drift of the evolved N).
inline double packet_norm_quadrature(const PacketState& s, std::size_t nodes = 96) {
    const double sigma = 2.0 * s.omega.real();
    if (!(sigma > 0.0)) throw NonNormalizable("packet_norm_quadrature: Re(omega) <= 0");
    const GaussHermiteRule rule = gauss_hermite(nodes);
    const double scale = std::sqrt(2.0 / sigma); // x = scale * y
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double x = scale * rule.x[i];
        // |psi|^2 e^{y^2} with the Gaussian of |psi|^2 cancelled against the weight
        const double rest = std::norm(s.N) * std::exp(2.0 * s.b.real() * x);
        acc += rule.w[i] * rest;
    }
    return std::sqrt(acc * scale);
}

/// Packet states on the trajectory grid, with N from the phase ODE and the
/// conserved reference lambda0. lambda is still evaluated pointwise from
/// (b, omega); its constancy is a measured invariant, never an input.
struct PacketSeries {
    std::vector<PacketState> states;
    double lambda_ref = 0.0; // lambda0(b0, W0)
    std::vector<double> norm_error; // | ||psi|| - 1 | per state

    double max_lambda_deviation() const {
        double worst = 0.0;
        for (const auto& s : states) {
            const double dev = lambda_ref > 0.0 ? std::abs(s.lambda - lambda_ref) / lambda_ref
                                                : std::abs(s.lambda);
            worst = std::max(worst, dev);
        }
        return worst;
    }

    double max_norm_error() const {
        double worst = 0.0;
        for (double e : norm_error) worst = std::max(worst, e);
        return worst;
    }
};

inline PacketSeries build_packet_series(const AuxiliaryTrajectory& traj, const PacketConfig& cfg,
                                        double tol, bool with_norm_check = true) {
    PacketSeries series;
    series.lambda_ref = lambda0(cfg.b0, traj.W0);
    const std::vector<Complex> N = evolve_normalization(traj, cfg, tol);

    series.states.reserve(traj.size());
    series.norm_error.reserve(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        PacketState s;
        s.tau = traj.tau[k];
        s.omega = omega_from_u(traj.mass_at(k), traj.u[k], traj.udot[k]);
        s.b = b_of_tau(cfg.b0, traj.u[k]);
        s.N = N[k];
        s.width = width_from_omega(s.omega);
        s.lambda = lambda_of_tau(s.b, s.omega);
        series.states.push_back(s);
        series.norm_error.push_back(with_norm_check
                                        ? std::abs(packet_norm_quadrature(s) - 1.0)
                                        : 0.0);
    }
    return series;
}

} // namespace tdmosc
