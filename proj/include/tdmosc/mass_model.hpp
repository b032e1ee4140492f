#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdmosc/errors.hpp"

namespace tdmosc {

/// Closed-form mass families M(tau) > 0 with analytic derivatives.
/// The damping rate gamma = Mdot/M is what enters the auxiliary classical
/// equation, so every family must supply Mdot (and gamma_dot, needed by the
/// frequency reduction) exactly rather than by finite differences.
struct MassModel {
    enum class Kind {
        Constant,         // M(tau) = M0
        GaussianGrowing,  // M(tau) = exp(+gamma0 tau^2 / 2), diverges as tau -> inf
        GaussianDecaying, // M(tau) = exp(-gamma0 tau^2 / 2)
        Exponential,      // M(tau) = exp(-gamma0 tau)
    };

    Kind kind = Kind::Constant;
    double M0 = 1.0;     // Constant only
    double gamma0 = 0.0; // rate parameter of the non-constant kinds

    static MassModel constant(double M0 = 1.0) { return {Kind::Constant, M0, 0.0}; }
    static MassModel gaussian_growing(double g0) { return {Kind::GaussianGrowing, 1.0, g0}; }
    static MassModel gaussian_decaying(double g0) { return {Kind::GaussianDecaying, 1.0, g0}; }
    static MassModel exponential(double g0) { return {Kind::Exponential, 1.0, g0}; }

    std::string kind_name() const {
        switch (kind) {
            case Kind::Constant: return "constant";
            case Kind::GaussianGrowing: return "gaussian_growing";
            case Kind::GaussianDecaying: return "gaussian_decaying";
            case Kind::Exponential: return "exponential";
        }
        return "?";
    }
};

struct MassSample {
    double M;         // M(tau) > 0
    double M_dot;     // dM/dtau
    double gamma;     // Mdot / M
    double gamma_dot; // d(gamma)/dtau
};

/// Throws std::invalid_argument if the model parameters violate the family
/// invariants (gamma0 > 0 for the parameterized kinds, M0 > 0 for Constant).
inline void validate_params(const MassModel& m) {
    switch (m.kind) {
        case MassModel::Kind::Constant:
            if (!(m.M0 > 0.0))
                throw std::invalid_argument("constant mass requires M0 > 0");
            break;
        case MassModel::Kind::GaussianGrowing:
        case MassModel::Kind::GaussianDecaying:
        case MassModel::Kind::Exponential:
            if (!(m.gamma0 > 0.0))
                throw std::invalid_argument(m.kind_name() + " mass requires gamma0 > 0");
            break;
    }
}

inline MassSample eval_mass(const MassModel& m, double tau) {
    validate_params(m);
    switch (m.kind) {
        case MassModel::Kind::Constant:
            return {m.M0, 0.0, 0.0, 0.0};
        case MassModel::Kind::GaussianGrowing: {
            const double M = std::exp(0.5 * m.gamma0 * tau * tau);
            const double g = m.gamma0 * tau;
            return {M, g * M, g, m.gamma0};
        }
        case MassModel::Kind::GaussianDecaying: {
            const double M = std::exp(-0.5 * m.gamma0 * tau * tau);
            const double g = -m.gamma0 * tau;
            return {M, g * M, g, -m.gamma0};
        }
        case MassModel::Kind::Exponential: {
            const double M = std::exp(-m.gamma0 * tau);
            return {M, -m.gamma0 * M, -m.gamma0, 0.0};
        }
    }
    throw std::logic_error("unreachable mass kind");
}

/// Diagnostics gathered by validate_model. Never throws: a divergent mass is
/// flagged, not rejected, so callers can warn and proceed.
struct AdmissibilityReport {
    bool accepted = true;
    bool positive = true;          // M > 0 sampled over the window
    bool bounded = true;           // sup M finite on the window
    bool divergent_at_infinity = false;
    double max_M = 0.0;
    double min_M = 0.0;
    std::vector<std::string> flags;
};

inline AdmissibilityReport validate_model(const MassModel& m, double tau0, double tau1,
                                          std::size_t n_samples = 2048) {
    validate_params(m);
    if (!(tau0 < tau1)) throw std::invalid_argument("validate_model: tau0 < tau1 required");

    AdmissibilityReport rep;
    rep.max_M = -1.0;
    rep.min_M = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i <= n_samples; ++i) {
        const double tau = tau0 + (tau1 - tau0) * static_cast<double>(i) / static_cast<double>(n_samples);
        const double M = eval_mass(m, tau).M;
        rep.max_M = std::max(rep.max_M, M);
        rep.min_M = std::min(rep.min_M, M);
        if (!(M > 0.0)) rep.positive = false;
        if (!std::isfinite(M)) rep.bounded = false;
    }

    switch (m.kind) {
        case MassModel::Kind::GaussianGrowing:
            rep.divergent_at_infinity = true;
            rep.flags.push_back("diverges as tau -> infinity");
            break;
        case MassModel::Kind::GaussianDecaying:
            rep.flags.push_back("converges to zero as tau -> infinity");
            break;
        case MassModel::Kind::Exponential:
            rep.flags.push_back("converges to zero as tau -> infinity");
            if (!(m.gamma0 < 1.0))
                rep.flags.push_back("gamma0 outside the recommended range (0, 1)");
            break;
        case MassModel::Kind::Constant:
            break;
    }

    if (!rep.positive) rep.flags.push_back("mass not positive on the window");
    if (!rep.bounded) rep.flags.push_back("mass overflows on the window");
    rep.accepted = rep.positive && rep.bounded && !rep.divergent_at_infinity;
    return rep;
}

struct Interval {
    double lo, hi;
};

/// Sub-intervals of [tau0, tau1] where |gamma(tau)| < eps, i.e. where the
/// packet behaves as a quasi-coherent state. Resolved by dense sampling; the
/// returned endpoints are accurate to one grid step.
inline std::vector<Interval> quasi_coherence_window(const MassModel& m, double tau0, double tau1,
                                                    double eps, std::size_t n_samples = 4096) {
    validate_params(m);
    if (!(eps > 0.0)) throw std::invalid_argument("quasi_coherence_window: eps > 0 required");
    if (!(tau0 < tau1)) throw std::invalid_argument("quasi_coherence_window: tau0 < tau1 required");

    std::vector<Interval> out;
    const double dt = (tau1 - tau0) / static_cast<double>(n_samples);
    bool inside = false;
    double start = 0.0;
    for (std::size_t i = 0; i <= n_samples; ++i) {
        const double tau = tau0 + dt * static_cast<double>(i);
        const bool ok = std::abs(eval_mass(m, tau).gamma) < eps;
        if (ok && !inside) {
            inside = true;
            start = tau;
        } else if (!ok && inside) {
            inside = false;
            out.push_back({start, tau0 + dt * static_cast<double>(i - 1)});
        }
    }
    if (inside) out.push_back({start, tau1});
    return out;
}

} // namespace tdmosc
