#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "tdmosc/classical.hpp"
#include "tdmosc/expansion.hpp"
#include "tdmosc/grid.hpp"
#include "tdmosc/packet.hpp"

namespace tdmosc {

/// 17 significant digits: enough to round-trip a double, and fixed so that
/// identical runs produce byte-identical files.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv_row(std::ostream& os, const std::vector<double>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << fmt17(cells[i]);
    }
    os << '\n';
}

/// Columns: tau, Re(u), Im(u), Re(udot), Im(udot), M, |M W - W0|/|W0|.
inline void write_trajectory_csv(std::ostream& os, const AuxiliaryTrajectory& traj) {
    os << "tau,re_u,im_u,re_udot,im_udot,M,abel_error\n";
    for (std::size_t k = 0; k < traj.size(); ++k)
        write_csv_row(os, {traj.tau[k], traj.u[k].real(), traj.u[k].imag(), traj.udot[k].real(),
                           traj.udot[k].imag(), traj.mass_at(k), traj.abel_error(k)});
}

/// Columns: tau, Re(omega), Im(omega), Re(b), Im(b), width, lambda,
/// |lambda - lambda0|/lambda0, norm_error.
inline void write_packet_csv(std::ostream& os, const PacketSeries& series) {
    os << "tau,re_omega,im_omega,re_b,im_b,width,lambda,lambda_rel_dev,norm_error\n";
    for (std::size_t k = 0; k < series.states.size(); ++k) {
        const PacketState& s = series.states[k];
        const double dev = series.lambda_ref > 0.0
                               ? std::abs(s.lambda - series.lambda_ref) / series.lambda_ref
                               : std::abs(s.lambda);
        write_csv_row(os, {s.tau, s.omega.real(), s.omega.imag(), s.b.real(), s.b.imag(), s.width,
                           s.lambda, dev, series.norm_error[k]});
    }
}

/// Columns: x, Re(Psi), Im(Psi), |Psi|^2 for one snapshot.
inline void write_wp_snapshot_csv(std::ostream& os, const GridWavefunction& wf) {
    os << "x,re_psi,im_psi,density\n";
    for (std::size_t j = 0; j < wf.psi.size(); ++j)
        write_csv_row(os, {wf.grid.x(j), wf.psi[j].real(), wf.psi[j].imag(), std::norm(wf.psi[j])});
}

/// Columns: n, Re(C_n), Im(C_n), |C_n|^2, poisson_ref, abs_err.
inline void write_spectrum_csv(std::ostream& os, const ExpansionSpectrum& spec) {
    os << "n,re_C,im_C,moduli_sq,poisson_ref,abs_err\n";
    for (std::size_t n = 0; n < spec.C.size(); ++n)
        write_csv_row(os, {static_cast<double>(n), spec.C[n].real(), spec.C[n].imag(),
                           spec.moduli_sq[n], spec.poisson_ref[n],
                           std::abs(spec.moduli_sq[n] - spec.poisson_ref[n])});
}

} // namespace tdmosc
