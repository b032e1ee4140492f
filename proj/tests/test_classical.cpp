#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "tdmosc/classical.hpp"

#include "oracles.hpp"

using namespace tdmosc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double pi = std::numbers::pi;
const Complex I{0.0, 1.0};

// independent statement of the Lewis invariant for the Newton/Ermakov pair
double lewis_invariant(double a, double adot, double e, double edot) {
    return 0.5 * ((edot * a - e * adot) * (edot * a - e * adot) + (e / a) * (e / a));
}
}

TEST_CASE("wronskian") {
    SECTION("reference values") {
        CHECK(wronskian(Complex{1.0, 0.0}, I) == Complex(0.0, -2.0));
        CHECK(wronskian(Complex{1.0, 0.0}, Complex{1.0, 0.0}) == Complex(0.0, 0.0));
        CHECK(wronskian(Complex{0.3, 0.0}, Complex{-1.7, 0.0}) == Complex(0.0, 0.0));
    }
    SECTION("phase invariance: W[e^{it}, .] = -2i for any t") {
        for (int k = 0; k < 50; ++k) {
            const double t = oracle::uniform(-10.0, 10.0);
            const Complex u = std::exp(I * t);
            CHECK_THAT(std::abs(wronskian(u, I * u) - Complex(0.0, -2.0)), WithinAbs(0.0, 1e-15));
        }
    }
    SECTION("pure imaginary by construction") {
        for (int k = 0; k < 200; ++k) {
            const Complex u = oracle::random_complex(-5.0, 5.0);
            const Complex udot = oracle::random_complex(-5.0, 5.0);
            CHECK(wronskian(u, udot).real() == 0.0);
            CHECK_THAT(wronskian(u, udot).imag(), WithinAbs(2.0 * std::imag(u * std::conj(udot)), 1e-12));
        }
    }
}

TEST_CASE("constant-mass auxiliary solution is e^{i tau}") {
    const auto grid = uniform_grid(0.0, 2.0 * pi, 100);
    const auto traj = solve_damped_oscillator(MassModel::constant(1.0), {1.0, 0.0}, I, grid, 1e-10);

    CHECK(traj.W0 == Complex(0.0, -2.0));
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const Complex expect = std::exp(I * traj.tau[k]);
        CHECK_THAT(std::abs(traj.u[k] - expect), WithinAbs(0.0, 1e-8));
        CHECK_THAT(std::abs(traj.u[k]), WithinAbs(1.0, 1e-9));
    }
}

TEST_CASE("trajectories are normalized to u(tau0) = 1") {
    const auto grid = uniform_grid(0.0, 1.0, 10);
    const Complex u0{0.0, 2.0}; // pure imaginary start
    const auto traj = solve_damped_oscillator(MassModel::constant(1.0), u0, I, grid, 1e-10);
    CHECK(traj.u[0] == Complex(1.0, 0.0));
    // W0 rescales by 1/|u0|^2: W[u0, i] = 2i Im(u0 * conj(i)) = 2i Im(2i * (-i)) = 0... use value
    const Complex expected_W0 = wronskian(u0, I) / std::norm(u0);
    CHECK_THAT(std::abs(traj.W0 - expected_W0), WithinAbs(0.0, 1e-15));
    CHECK_THROWS_AS(
        solve_damped_oscillator(MassModel::constant(1.0), {0.0, 0.0}, I, grid, 1e-10),
        DivisionByZeroU);
}

TEST_CASE("damped oscillator satisfies its ODE (finite-difference residual)") {
    // central differences bottom out near 1e-8 for O(1) solutions (epsilon/h^2
    // cancellation), so the 100 tol bound is checked at tol = 1e-9
    const double tol = 1e-9;
    for (const MassModel& m : {MassModel::constant(1.0), MassModel::gaussian_decaying(0.1),
                               MassModel::exponential(0.5)}) {
        const auto grid = uniform_grid(0.0, 0.5, 2000); // h = 2.5e-4
        const auto traj = solve_damped_oscillator(m, {1.0, 0.0}, I, grid, tol);
        const double res = oracle::residual_2nd_order<Complex>(
            traj.tau, traj.u, [&](double t) { return eval_mass(m, t).gamma; },
            [](double) { return 1.0; }, [](double) { return Complex{}; });
        INFO("model " << m.kind_name());
        CHECK(res < 100.0 * tol);
    }
}

TEST_CASE("Abel identity: M W[u, u*] is conserved") {
    const auto grid = uniform_grid(0.0, 10.0, 1000);
    for (const MassModel& m :
         {MassModel::constant(1.0), MassModel::constant(3.0), MassModel::gaussian_decaying(0.1),
          MassModel::gaussian_growing(0.05), MassModel::exponential(0.5)}) {
        const auto traj = solve_damped_oscillator(m, {1.0, 0.0}, I, grid, 1e-10);
        INFO("model " << m.kind_name());
        CHECK(traj.max_abel_error() < 1e-6);
        CHECK(std::abs(traj.W0.real()) < 1e-12 * std::abs(traj.W0));
    }
}

TEST_CASE("integrating at tol/100 reproduces the trajectory") {
    const auto grid = uniform_grid(0.0, 10.0, 200);
    const auto a = solve_damped_oscillator(MassModel::gaussian_decaying(0.1), {1.0, 0.0}, I, grid, 1e-8);
    const auto b = solve_damped_oscillator(MassModel::gaussian_decaying(0.1), {1.0, 0.0}, I, grid, 1e-10);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a.u[k] - b.u[k]));
    CHECK(worst < 1e-6);
}

TEST_CASE("tightening tol reduces the Abel drift") {
    const auto grid = uniform_grid(0.0, 10.0, 20); // coarse samples: the controller runs free
    auto drift = [&](double tol) {
        return solve_damped_oscillator(MassModel::gaussian_decaying(0.1), {1.0, 0.0}, I, grid, tol)
            .max_abel_error();
    };
    const double coarse = drift(1e-5);
    const double fine = drift(1e-6);
    CHECK(fine > 0.0);
    CHECK(fine < coarse);
}

TEST_CASE("solve_newton closed forms") {
    const auto grid = uniform_grid(0.0, pi, 200);
    const FrequencyFn one = [](double) { return 1.0; };
    SECTION("cosine") {
        const auto traj = solve_newton(one, 1.0, 0.0, grid, 1e-10);
        for (std::size_t k = 0; k < traj.size(); ++k)
            CHECK_THAT(traj.value[k], WithinAbs(std::cos(traj.t[k]), 1e-8));
    }
    SECTION("sine reaches 1 at pi/2") {
        const auto half = uniform_grid(0.0, 0.5 * pi, 100);
        const auto traj = solve_newton(one, 0.0, 1.0, half, 1e-10);
        CHECK_THAT(traj.value.back(), WithinAbs(1.0, 1e-9));
    }
    SECTION("free motion is linear") {
        const FrequencyFn zero = [](double) { return 0.0; };
        const auto traj = solve_newton(zero, 0.5, -2.0, grid, 1e-10);
        for (std::size_t k = 0; k < traj.size(); ++k)
            CHECK_THAT(traj.value[k], WithinAbs(0.5 - 2.0 * traj.t[k], 1e-9));
    }
}

TEST_CASE("solve_ermakov") {
    const FrequencyFn one = [](double) { return 1.0; };
    SECTION("alpha = 1 is the fixed point of w^2 = 1") {
        const auto grid = uniform_grid(0.0, 10.0, 500);
        const auto traj = solve_ermakov(one, 1.0, 0.0, grid, 1e-10);
        for (double a : traj.value) CHECK_THAT(a, WithinAbs(1.0, 1e-9));
    }
    SECTION("alpha0 = 2 oscillates, stays positive, keeps the Lewis invariant") {
        const auto grid = uniform_grid(0.0, 10.0, 2000);
        const auto alpha = solve_ermakov(one, 2.0, 0.0, grid, 1e-10);
        const auto eta = solve_newton(one, 1.0, 0.0, grid, 1e-10);
        double lo = 1e300, hi = 0.0;
        for (double a : alpha.value) {
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
        CHECK(lo > 0.0);
        CHECK(hi > lo + 0.1); // genuinely oscillating
        const double I0 = lewis_invariant(alpha.value[0], alpha.derivative[0], eta.value[0],
                                          eta.derivative[0]);
        double drift = 0.0;
        for (std::size_t k = 0; k < alpha.size(); ++k) {
            const double Ik = lewis_invariant(alpha.value[k], alpha.derivative[k], eta.value[k],
                                              eta.derivative[k]);
            drift = std::max(drift, std::abs(Ik - I0) / std::abs(I0));
        }
        CHECK(drift < 1e-6);
    }
    SECTION("free case closed form alpha = sqrt(1 + t^2)") {
        const FrequencyFn zero = [](double) { return 0.0; };
        const auto grid = uniform_grid(0.0, 5.0, 500);
        const auto traj = solve_ermakov(zero, 1.0, 0.0, grid, 1e-10);
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double t = traj.t[k];
            CHECK_THAT(traj.value[k], WithinAbs(std::sqrt(1.0 + t * t), 1e-8));
            CHECK_THAT(traj.derivative[k], WithinAbs(t / std::sqrt(1.0 + t * t), 1e-8));
        }
    }
    SECTION("Ermakov residual by finite differences") {
        // alpha'''' reaches a few hundred near the width minima, so the FD
        // truncation only clears 1e-6 on a step-1e-4 grid
        const auto grid = uniform_grid(0.0, 5.0, 50000);
        const auto traj = solve_ermakov(one, 2.0, 0.0, grid, 1e-10);
        const double h = traj.t[1] - traj.t[0];
        double worst = 0.0;
        for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
            const double add = oracle::d2<double>(traj.value, k, h);
            const double a = traj.value[k];
            worst = std::max(worst, std::abs(add + a - 1.0 / (a * a * a)));
        }
        CHECK(worst < 1e-6);
    }
    SECTION("collapse at a frequency blow-up is an ErmakovSingularity") {
        const FrequencyFn blowup = [](double t) { return 2.0 / ((1.0 - t) * (1.0 - t)); };
        const auto grid = uniform_grid(0.0, 1.0, 100);
        CHECK_THROWS_AS(solve_ermakov(blowup, 1.0, 0.0, grid, 1e-10), ErmakovSingularity);
    }
    SECTION("nonpositive alpha0 is rejected") {
        const auto grid = uniform_grid(0.0, 1.0, 10);
        CHECK_THROWS_AS(solve_ermakov(one, 0.0, 0.0, grid, 1e-10), ErmakovSingularity);
        CHECK_THROWS_AS(solve_ermakov(one, -1.0, 0.0, grid, 1e-10), ErmakovSingularity);
    }
}

TEST_CASE("effective_frequency closed forms and the u = q/sqrt(M) reduction") {
    SECTION("constant mass: w^2 = 1") {
        const FrequencyFn w2 = effective_frequency(MassModel::constant(4.0));
        for (double t : {0.0, 1.0, 3.3}) CHECK(w2(t) == 1.0);
    }
    SECTION("exponential: w^2 = 1 - gamma0^2/4") {
        const FrequencyFn w2 = effective_frequency(MassModel::exponential(0.5));
        for (double t : {0.0, 2.0}) CHECK_THAT(w2(t), WithinRel(1.0 - 0.0625, 1e-15));
    }
    SECTION("gaussian decaying: w^2 = 1 + gamma0/2 - gamma0^2 t^2/4") {
        const double g0 = 0.1;
        const FrequencyFn w2 = effective_frequency(MassModel::gaussian_decaying(g0));
        for (double t : {0.0, 1.0, 5.0})
            CHECK_THAT(w2(t), WithinRel(1.0 + 0.5 * g0 - 0.25 * g0 * g0 * t * t, 1e-14));
    }
    SECTION("q from the reduced equation gives a damped-oscillator solution") {
        for (const MassModel& m : {MassModel::gaussian_decaying(0.1), MassModel::exponential(0.5),
                                   MassModel::gaussian_growing(0.05)}) {
            const auto grid = uniform_grid(0.0, 2.0, 10000); // h = 2e-4
            // q(0) = 1, qdot(0) chosen so that u = q/sqrt(M) starts as (1, i)
            const MassSample m0 = eval_mass(m, 0.0);
            REQUIRE(m0.M == 1.0);
            const auto qr = solve_newton(effective_frequency(m), 1.0, 0.5 * m0.gamma, grid, 1e-10);
            const auto qi = solve_newton(effective_frequency(m), 0.0, 1.0, grid, 1e-10);
            std::vector<Complex> u(qr.size());
            for (std::size_t k = 0; k < qr.size(); ++k)
                u[k] = Complex(qr.value[k], qi.value[k]) / std::sqrt(eval_mass(m, qr.t[k]).M);
            const double res = oracle::residual_2nd_order<Complex>(
                qr.t, u, [&](double t) { return eval_mass(m, t).gamma; },
                [](double) { return 1.0; }, [](double) { return Complex{}; });
            INFO("model " << m.kind_name());
            CHECK(res < 1e-6);
        }
    }
}
