#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <sstream>
#include <vector>

#include "tdmosc/errors.hpp"
#include "tdmosc/mass_model.hpp"
#include "tdmosc/ode.hpp"

namespace tdmosc {

using Complex = std::complex<double>;

/// W[u, u*] = u conj(udot) - udot conj(u). Built from the imaginary part so
/// the result is pure imaginary by construction.
inline Complex wronskian(Complex u, Complex udot) {
    return Complex(0.0, 2.0 * std::imag(u * std::conj(udot)));
}

/// Sampled solution of  u'' + gamma(tau) u' + u = 0  together with the
/// conserved quantity W0 = M(tau0) W[u,u*](tau0) (Abel's identity gives
/// M(tau) W[u,u*](tau) = W0 along the whole trajectory).
///
/// The stored solution is normalized to u(tau0) = 1; the initial data are
/// rescaled by 1/u0, which rescales W0 by 1/|u0|^2. b(tau) = b0/u relies on
/// this convention.
struct AuxiliaryTrajectory {
    MassModel model;
    std::vector<double> tau;
    std::vector<Complex> u;
    std::vector<Complex> udot;
    Complex W0{};

    std::size_t size() const { return tau.size(); }

    double mass_at(std::size_t k) const { return eval_mass(model, tau[k]).M; }

    /// |M W - W0| / |W0| at grid point k.
    double abel_error(std::size_t k) const {
        return std::abs(mass_at(k) * wronskian(u[k], udot[k]) - W0) / std::abs(W0);
    }

    double max_abel_error() const {
        double worst = 0.0;
        for (std::size_t k = 0; k < size(); ++k) worst = std::max(worst, abel_error(k));
        return worst;
    }
};

inline AuxiliaryTrajectory solve_damped_oscillator(const MassModel& model, Complex u0, Complex udot0,
                                                   std::span<const double> sample_ts, double tol) {
    validate_params(model);
    if (std::abs(u0) == 0.0 && std::abs(udot0) == 0.0)
        throw std::invalid_argument("solve_damped_oscillator: (u0, udot0) must not both vanish");
    if (std::abs(u0) < 1e-12)
        throw DivisionByZeroU("u(tau0) too small to normalize the trajectory to u(tau0) = 1");

    // normalize to u(tau0) = 1
    udot0 /= u0;
    u0 = Complex(1.0, 0.0);

    const RhsFn<4> rhs = [&model](double tau, const State<4>& y, State<4>& dy) {
        const double g = eval_mass(model, tau).gamma;
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = -g * y[2] - y[0];
        dy[3] = -g * y[3] - y[1];
    };

    IvpOptions opt;
    opt.tol = tol;
    const State<4> y0{u0.real(), u0.imag(), udot0.real(), udot0.imag()};
    const Sampled<4> sol = integrate_ivp<4>(rhs, y0, sample_ts, opt);

    AuxiliaryTrajectory traj;
    traj.model = model;
    traj.tau = sol.t;
    traj.u.reserve(sol.y.size());
    traj.udot.reserve(sol.y.size());
    for (const auto& y : sol.y) {
        traj.u.emplace_back(y[0], y[1]);
        traj.udot.emplace_back(y[2], y[3]);
    }
    traj.W0 = eval_mass(model, sample_ts.front()).M * wronskian(u0, udot0);
    return traj;
}

struct RealTrajectory {
    std::vector<double> t;
    std::vector<double> value;
    std::vector<double> derivative;

    std::size_t size() const { return t.size(); }
};

using FrequencyFn = std::function<double(double)>; // w^2(t)

inline RealTrajectory solve_newton(const FrequencyFn& w2, double eta0, double etadot0,
                                   std::span<const double> sample_ts, double tol) {
    const RhsFn<2> rhs = [&w2](double t, const State<2>& y, State<2>& dy) {
        dy[0] = y[1];
        dy[1] = -w2(t) * y[0];
    };
    IvpOptions opt;
    opt.tol = tol;
    const Sampled<2> sol = integrate_ivp<2>(rhs, {eta0, etadot0}, sample_ts, opt);

    RealTrajectory traj;
    traj.t = sol.t;
    for (const auto& y : sol.y) {
        traj.value.push_back(y[0]);
        traj.derivative.push_back(y[1]);
    }
    return traj;
}

/// alpha'' + w^2(t) alpha = 1/alpha^3 with alpha(t0) = alpha0 > 0.
/// The inverse-cube barrier keeps exact solutions positive; if the numerics
/// drive alpha toward zero anyway (e.g. a blowing-up w^2), that is a packet
/// collapse and surfaces as ErmakovSingularity rather than a raw step failure.
inline RealTrajectory solve_ermakov(const FrequencyFn& w2, double alpha0, double alphadot0,
                                    std::span<const double> sample_ts, double tol) {
    if (!(alpha0 > 0.0))
        throw ErmakovSingularity("alpha(t0) must be positive");

    const RhsFn<2> rhs = [&w2](double t, const State<2>& y, State<2>& dy) {
        dy[0] = y[1];
        dy[1] = -w2(t) * y[0] + 1.0 / (y[0] * y[0] * y[0]);
    };
    IvpOptions opt;
    opt.tol = tol;

    double last_alpha = alpha0;
    const StepObserver<2> watch = [&last_alpha, alpha0](double t, const State<2>& y) {
        last_alpha = y[0];
        if (y[0] <= 1e-10 * alpha0) {
            std::ostringstream os;
            os << "alpha collapsed at t = " << t;
            throw ErmakovSingularity(os.str());
        }
    };

    Sampled<2> sol;
    try {
        sol = integrate_ivp<2>(rhs, {alpha0, alphadot0}, sample_ts, opt, watch);
    } catch (const StepSizeUnderflow& e) {
        if (last_alpha < 0.1 * alpha0)
            throw ErmakovSingularity(std::string("width collapse (") + e.what() + ")");
        throw;
    }

    RealTrajectory traj;
    traj.t = sol.t;
    for (const auto& y : sol.y) {
        traj.value.push_back(y[0]);
        traj.derivative.push_back(y[1]);
    }
    return traj;
}

/// Frequency of the undamped companion equation: with u = q / sqrt(M), the
/// damped oscillator for u becomes  q'' + w^2(tau) q = 0  where
/// w^2 = 1 - gamma_dot/2 - gamma^2/4.
inline FrequencyFn effective_frequency(const MassModel& model) {
    validate_params(model);
    return [model](double tau) {
        const MassSample s = eval_mass(model, tau);
        return 1.0 - 0.5 * s.gamma_dot - 0.25 * s.gamma * s.gamma;
    };
}

} // namespace tdmosc
