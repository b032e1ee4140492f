#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "tdmosc/errors.hpp"

namespace tdmosc {

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
using RhsFn = std::function<void(double, const State<N>&, State<N>&)>;

/// Called after every accepted step; may throw to abort the integration
/// (used e.g. to catch a collapsing Ermakov amplitude early).
template <std::size_t N>
using StepObserver = std::function<void(double, const State<N>&)>;

template <std::size_t N>
struct Sampled {
    std::vector<double> t;
    std::vector<State<N>> y;
};

struct IvpOptions {
    double tol = 1e-10;   // per-step error bound, applied as both abs and rel scale
    double h_init = 0.0;  // 0: pick from the first sample gap
    double h_max = 0.0;   // 0: whole interval
    std::size_t max_steps = 20'000'000;
};

inline std::vector<double> uniform_grid(double t0, double t1, std::size_t n_intervals) {
    if (!(t1 > t0)) throw std::invalid_argument("uniform_grid: t1 > t0 required");
    if (n_intervals == 0) throw std::invalid_argument("uniform_grid: need at least one interval");
    std::vector<double> g(n_intervals + 1);
    for (std::size_t i = 0; i <= n_intervals; ++i)
        g[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n_intervals);
    g.back() = t1;
    return g;
}

/// Embedded Dormand-Prince 5(4) pair with PI step-size control (the classic
/// dopri5 controller constants). One driver serves every ODE in the project
/// so all trajectories share the same local-error semantics.
///
/// The integration runs over [sample_ts.front(), sample_ts.back()] and the
/// step is clamped so every requested sample point is hit exactly; no
/// interpolation enters the recorded values. Complex systems are packed as
/// real pairs by the callers.
template <std::size_t N>
Sampled<N> integrate_ivp(const RhsFn<N>& rhs, State<N> y0, std::span<const double> sample_ts,
                         const IvpOptions& opt = {}, const StepObserver<N>& on_accept = {}) {
    if (sample_ts.size() < 2) throw std::invalid_argument("integrate_ivp: need at least 2 sample points");
    for (std::size_t i = 1; i < sample_ts.size(); ++i)
        if (!(sample_ts[i] > sample_ts[i - 1]))
            throw std::invalid_argument("integrate_ivp: sample points must be strictly increasing");
    if (!(opt.tol > 0.0)) throw std::invalid_argument("integrate_ivp: tol > 0 required");

    // Dormand-Prince 5(4) tableau; row 7 doubles as the 5th-order weights (FSAL).
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double t_begin = sample_ts.front();
    const double t_end = sample_ts.back();
    const double span_len = t_end - t_begin;
    const double h_max = opt.h_max > 0.0 ? opt.h_max : span_len;

    Sampled<N> out;
    out.t.reserve(sample_ts.size());
    out.y.reserve(sample_ts.size());
    out.t.push_back(t_begin);
    out.y.push_back(y0);

    double t = t_begin;
    State<N> y = y0;
    State<N> k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, err_vec;
    rhs(t, y, k1);

    double h = opt.h_init > 0.0 ? opt.h_init
                                : std::min({h_max, span_len / 100.0, sample_ts[1] - sample_ts[0]});

    // PI controller state (Hairer's dopri5 defaults).
    constexpr double beta = 0.04, expo1 = 0.2 - beta * 0.75, safe = 0.9;
    constexpr double facmin = 0.2, facmax_normal = 10.0;
    double facold = 1e-4;
    double facmax = facmax_normal;

    std::size_t next_sample = 1;
    std::size_t n_steps = 0;

    while (next_sample < sample_ts.size()) {
        const double t_target = sample_ts[next_sample];
        bool hit_target = false;
        const double h_natural = h;
        if (t + h >= t_target - 1e-14 * span_len) {
            h = t_target - t;
            hit_target = true;
        }
        if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0)) {
            std::ostringstream os;
            os << "step size underflow at t = " << t;
            throw StepSizeUnderflow(os.str());
        }
        if (++n_steps > opt.max_steps) {
            std::ostringstream os;
            os << "step budget exhausted at t = " << t;
            throw StepSizeUnderflow(os.str());
        }

        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        rhs(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        rhs(t + h, ytmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs(t + h, ynew, k7);
        for (std::size_t i = 0; i < N; ++i)
            err_vec[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opt.tol + opt.tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double q = err_vec[i] / sc;
            err += q * q;
            finite = finite && std::isfinite(ynew[i]) && std::isfinite(err_vec[i]);
        }
        err = std::sqrt(err / static_cast<double>(N));
        if (!finite) err = 1e10;

        if (err <= 1.0) {
            // accepted; the PI factor mixes this error with the previous one
            const double fac11 = std::pow(err, expo1);
            double fac = fac11 / std::pow(facold, beta);
            fac = std::max(1.0 / facmax, std::min(1.0 / facmin, fac / safe));
            facold = std::max(err, 1e-4);
            t = hit_target ? t_target : t + h;
            y = ynew;
            k1 = k7; // FSAL
            if (on_accept) on_accept(t, y);
            if (hit_target) {
                out.t.push_back(t_target);
                out.y.push_back(y);
                ++next_sample;
            }
            h = std::min(h / fac, h_max);
            // a step clamped onto a sample point must not throttle the next one
            if (hit_target) h = std::min(std::max(h, h_natural), h_max);
            facmax = facmax_normal;
        } else {
            const double fac11 = std::pow(err, expo1);
            h = h / std::min(1.0 / facmin, fac11 / safe);
            facmax = 1.0; // no growth right after a rejection
        }
    }
    return out;
}

} // namespace tdmosc
