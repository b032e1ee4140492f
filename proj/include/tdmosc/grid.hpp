#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tdmosc/errors.hpp"

namespace tdmosc {

/// Uniform spatial grid with hard walls at x_min and x_max. Only interior
/// nodes are stored; the wavefunction is identically zero on the walls.
struct SpatialGrid {
    double x_min = -20.0;
    double x_max = 20.0;
    std::size_t n_interior = 1999;

    double h() const { return (x_max - x_min) / static_cast<double>(n_interior + 1); }
    double x(std::size_t j) const { return x_min + h() * static_cast<double>(j + 1); }

    bool operator==(const SpatialGrid&) const = default;

    /// Grid whose spacing is as close as possible to the requested h.
    static SpatialGrid with_spacing(double x_min, double x_max, double h_target) {
        if (!(x_max > x_min)) throw std::invalid_argument("SpatialGrid: x_max > x_min required");
        if (!(h_target > 0.0)) throw std::invalid_argument("SpatialGrid: h > 0 required");
        const auto n_cells = static_cast<std::size_t>(std::lround((x_max - x_min) / h_target));
        if (n_cells < 4) throw std::invalid_argument("SpatialGrid: box too small for spacing");
        return {x_min, x_max, n_cells - 1};
    }
};

struct GridWavefunction {
    SpatialGrid grid;
    double t = 0.0;
    std::vector<std::complex<double>> psi;

    /// Discrete L2 norm sqrt(h sum |psi_j|^2).
    double norm() const {
        double s = 0.0;
        for (const auto& v : psi) s += std::norm(v);
        return std::sqrt(s * grid.h());
    }

    void normalize() {
        const double n = norm();
        if (!(n > 0.0)) throw std::invalid_argument("GridWavefunction: cannot normalize zero state");
        for (auto& v : psi) v /= n;
    }

    double edge_amplitude() const {
        return std::max(std::abs(psi.front()), std::abs(psi.back()));
    }
};

/// |h sum conj(a_j) b_j| for unit-norm states; the inputs are normalized
/// internally so the result is insensitive to overall scaling and phase.
inline double fidelity(const GridWavefunction& a, const GridWavefunction& b) {
    if (!(a.grid == b.grid)) throw GridMismatch("fidelity: states live on different grids");
    std::complex<double> overlap(0.0, 0.0);
    for (std::size_t j = 0; j < a.psi.size(); ++j) overlap += std::conj(a.psi[j]) * b.psi[j];
    const double na = a.norm(), nb = b.norm();
    if (!(na > 0.0) || !(nb > 0.0)) throw std::invalid_argument("fidelity: zero-norm input");
    return std::abs(overlap) * a.grid.h() / (na * nb);
}

} // namespace tdmosc
