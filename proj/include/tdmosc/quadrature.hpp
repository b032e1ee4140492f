#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tdmosc/errors.hpp"

namespace tdmosc {

/// Nodes and weights for ∫ f(y) e^{-y^2} dy ≈ Σ w_i f(x_i), weight included.
struct GaussHermiteRule {
    std::vector<double> x;
    std::vector<double> w;

    std::size_t size() const { return x.size(); }

    /// w_i e^{x_i^2}: weights for integrands that carry their own Gaussian.
    std::vector<double> total_weights() const {
        std::vector<double> tw(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) tw[i] = w[i] * std::exp(x[i] * x[i]);
        return tw;
    }
};

/// Golub-Welsch-free construction: Newton iteration on the scaled Hermite
/// recurrence, largest roots first (the classic gauher scheme). Exact for
/// polynomials of degree <= 2n - 1.
inline GaussHermiteRule gauss_hermite(std::size_t n) {
    if (n == 0) throw std::invalid_argument("gauss_hermite: n >= 1 required");
    constexpr double eps = 1e-14;
    constexpr double pi_m4 = 0.7511255444649425; // pi^(-1/4)

    GaussHermiteRule rule;
    rule.x.assign(n, 0.0);
    rule.w.assign(n, 0.0);

    const std::size_t m = (n + 1) / 2;
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * rule.x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * rule.x[1];
        else
            z = 2.0 * z - rule.x[i - 2];

        double pp = 0.0;
        bool converged = false;
        for (int iter = 0; iter < 100 && !converged; ++iter) {
            double p1 = pi_m4, p2 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / static_cast<double>(j)) * p2 -
                     std::sqrt(static_cast<double>(j - 1) / static_cast<double>(j)) * p3;
            }
            pp = std::sqrt(2.0 * static_cast<double>(n)) * p2;
            const double dz = p1 / pp;
            z -= dz;
            converged = std::abs(dz) <= eps * std::max(1.0, std::abs(z));
        }
        if (!converged) throw std::runtime_error("gauss_hermite: Newton iteration stalled");

        rule.x[i] = z;
        rule.x[n - 1 - i] = -z;
        rule.w[i] = 2.0 / (pp * pp);
        rule.w[n - 1 - i] = rule.w[i];
    }
    return rule;
}

} // namespace tdmosc
