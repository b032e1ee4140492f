#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include "tdmosc/errors.hpp"
#include "tdmosc/packet.hpp"
#include "tdmosc/quadrature.hpp"

namespace tdmosc {

/// Physicists' Hermite polynomial H_n(z) by the three-term recurrence
/// H_0 = 1, H_1 = 2z, H_{n+1} = 2z H_n - 2n H_{n-1}.
inline double hermite(int n, double z, int max_degree = 64) {
    if (n < 0) throw std::invalid_argument("hermite: n >= 0 required");
    if (n > max_degree) {
        std::ostringstream os;
        os << "hermite: degree " << n << " exceeds the configured maximum " << max_degree;
        throw DegreeTooLarge(os.str());
    }
    double hkm1 = 0.0, hk = 1.0;
    for (int k = 0; k < n; ++k) {
        const double hkp1 = 2.0 * z * hk - 2.0 * static_cast<double>(k) * hkm1;
        hkm1 = hk;
        hk = hkp1;
    }
    return hk;
}

namespace detail {

/// Hermite functions h_n(z) e^{-z^2/2} with h_n orthonormal w.r.t. e^{-z^2};
/// evaluated for n = 0..n_max in one recurrence sweep. Keeping the Gaussian
/// attached avoids overflow of the bare polynomials at large degree.
inline void hermite_functions(int n_max, double z, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(n_max) + 1);
    const double gauss = std::exp(-0.5 * z * z);
    double fkm1 = 0.0;
    double fk = 0.7511255444649425 * gauss; // pi^(-1/4) e^{-z^2/2}
    out[0] = fk;
    for (int k = 0; k < n_max; ++k) {
        const double fkp1 = z * std::sqrt(2.0 / (k + 1.0)) * fk -
                            std::sqrt(static_cast<double>(k) / (k + 1.0)) * fkm1;
        fkm1 = fk;
        fk = fkp1;
        out[static_cast<std::size_t>(k) + 1] = fk;
    }
}

} // namespace detail

/// Element of the time-dependent expansion basis:
/// Phi_n(x) = (2^n n!)^{-1/2} ((omega+omega*)/(2 pi))^{1/4}
///            H_n(sqrt((omega+omega*)/2) x) exp(-omega x^2 / 2).
/// Orthonormal at fixed tau because the pairwise Gaussian weight
/// exp(-(omega+omega*) x^2 / 2) is real.
inline Complex phi_n(int n, Complex omega, double x) {
    if (n < 0) throw std::invalid_argument("phi_n: n >= 0 required");
    const double sigma = 2.0 * omega.real();
    if (!(sigma > 0.0)) throw NonNormalizable("phi_n: Re(omega) <= 0");
    const double z = std::sqrt(0.5 * sigma) * x;
    std::vector<double> fn;
    detail::hermite_functions(n, z, fn);
    // residual complex phase of exp(-omega x^2/2) after the real Gaussian is absorbed
    const Complex phase = std::exp(Complex(0.0, -0.5 * omega.imag() * x * x));
    return std::pow(0.5 * sigma, 0.25) * fn[static_cast<std::size_t>(n)] * phase;
}

struct ExpansionSpectrum {
    int n_max = 0;
    std::vector<Complex> C;           // overlap coefficients, n = 0..n_max
    std::vector<double> moduli_sq;    // |C_n|^2
    double lambda_used = 0.0;         // Poisson center evaluated from (b, omega)
    std::vector<double> poisson_ref;  // e^{-lambda} lambda^n / n!
    double total_prob = 0.0;          // sum |C_n|^2
    double tail = 0.0;                // 1 - total_prob
};

/// Poisson weights e^{-lambda} lambda^n / n! for n = 0..n_max, evaluated in
/// log space so large n never routes through an overflowing factorial.
inline std::vector<double> poisson_weights(double lambda, int n_max) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("poisson_weights: lambda >= 0 required");
    if (n_max < 0) throw std::invalid_argument("poisson_weights: n_max >= 0 required");
    std::vector<double> w(static_cast<std::size_t>(n_max) + 1, 0.0);
    if (lambda == 0.0) {
        w[0] = 1.0;
        return w;
    }
    const double log_lambda = std::log(lambda);
    for (int n = 0; n <= n_max; ++n)
        w[static_cast<std::size_t>(n)] =
            std::exp(-lambda + n * log_lambda - std::lgamma(n + 1.0));
    return w;
}

/// C_n = ∫ Phi_n*(x) psi(x) dx by Gauss-Hermite quadrature with the change of
/// variable y = sqrt((omega+omega*)/2) x; node count 2 n_max + 32. The
/// spectrum is rejected (TailTooLarge) when the truncated sum of |C_n|^2
/// misses more than tail_tol of the norm.
inline ExpansionSpectrum coefficients_quadrature(const PacketState& state, int n_max,
                                                 double tail_tol = 1e-8) {
    if (n_max < 0) throw std::invalid_argument("coefficients_quadrature: n_max >= 0 required");
    const double sigma = 2.0 * state.omega.real();
    if (!(sigma > 0.0)) throw NonNormalizable("coefficients_quadrature: Re(omega) <= 0");

    const std::size_t n_nodes = 2 * static_cast<std::size_t>(n_max) + 32;
    const GaussHermiteRule rule = gauss_hermite(n_nodes);
    const std::vector<double> tw = rule.total_weights();
    const double scale = std::sqrt(2.0 / sigma); // x = scale * y

    ExpansionSpectrum spec;
    spec.n_max = n_max;
    spec.C.assign(static_cast<std::size_t>(n_max) + 1, Complex(0.0, 0.0));

    std::vector<double> fn;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double y = rule.x[i];
        const double x = scale * y;
        const Complex psi = eval_packet(state, x);
        // conj(Phi_n(x)) shares the real Gaussian e^{-z^2/2} with the Hermite functions
        const Complex phase = std::exp(Complex(0.0, 0.5 * state.omega.imag() * x * x));
        const Complex common = tw[i] * psi * phase * std::pow(0.5 * sigma, 0.25);
        detail::hermite_functions(n_max, y, fn);
        for (int n = 0; n <= n_max; ++n)
            spec.C[static_cast<std::size_t>(n)] += common * fn[static_cast<std::size_t>(n)];
    }
    for (auto& c : spec.C) c *= scale;

    spec.moduli_sq.resize(spec.C.size());
    spec.total_prob = 0.0;
    for (std::size_t n = 0; n < spec.C.size(); ++n) {
        spec.moduli_sq[n] = std::norm(spec.C[n]);
        spec.total_prob += spec.moduli_sq[n];
    }
    spec.tail = 1.0 - spec.total_prob;
    spec.lambda_used = lambda_of_tau(state.b, state.omega);
    spec.poisson_ref = poisson_weights(spec.lambda_used, n_max);

    if (spec.tail > tail_tol) {
        std::ostringstream os;
        os << "truncation tail " << spec.tail << " exceeds tolerance " << tail_tol
           << " (n_max = " << n_max << ", lambda = " << spec.lambda_used << ")";
        throw TailTooLarge(os.str());
    }
    return spec;
}

/// Measured occupation numbers against the Poisson reference. Relative error
/// is reported only where the reference weight is above rel_floor; below that
/// roundoff dominates and only the absolute error is meaningful.
struct DistributionComparison {
    double max_abs_err = 0.0;
    double max_rel_err = 0.0;
    double tail = 0.0;
};

inline DistributionComparison compare_distributions(const ExpansionSpectrum& spec,
                                                    double rel_floor = 1e-12) {
    DistributionComparison cmp;
    cmp.tail = spec.tail;
    for (std::size_t n = 0; n < spec.moduli_sq.size(); ++n) {
        const double err = std::abs(spec.moduli_sq[n] - spec.poisson_ref[n]);
        cmp.max_abs_err = std::max(cmp.max_abs_err, err);
        if (spec.poisson_ref[n] > rel_floor)
            cmp.max_rel_err = std::max(cmp.max_rel_err, err / spec.poisson_ref[n]);
    }
    return cmp;
}

} // namespace tdmosc
