#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "tdmosc/expansion.hpp"
#include "tdmosc/csv.hpp"

#include "oracles.hpp"

using namespace tdmosc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double pi = std::numbers::pi;
const Complex I{0.0, 1.0};

// Gaussian moments: int x^{2m} e^{-x^2} dx = sqrt(pi) (2m-1)!! / 2^m
double gaussian_moment(int p) {
    if (p % 2 == 1) return 0.0;
    double v = std::sqrt(pi);
    for (int m = 1; 2 * m <= p; ++m) v *= (2.0 * m - 1.0) / 2.0;
    return v;
}

PacketState make_state(Complex omega, Complex b) {
    PacketState s;
    s.omega = omega;
    s.b = b;
    s.N = std::polar(normalization_magnitude(omega, b), 0.0);
    s.width = width_from_omega(omega);
    s.lambda = lambda_of_tau(b, omega);
    return s;
}
}

TEST_CASE("Gauss-Hermite rule") {
    SECTION("low moments") {
        const GaussHermiteRule r = gauss_hermite(24);
        double s0 = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            s0 += r.w[i];
            s2 += r.w[i] * r.x[i] * r.x[i];
        }
        CHECK_THAT(s0, WithinRel(std::sqrt(pi), 1e-13));
        CHECK_THAT(s2, WithinRel(0.5 * std::sqrt(pi), 1e-13));
    }
    SECTION("exact on polynomials up to degree 2n - 1") {
        for (std::size_t n : {5ul, 12ul, 40ul}) {
            const GaussHermiteRule r = gauss_hermite(n);
            std::vector<double> coef(2 * n); // degree 2n - 1
            for (auto& c : coef) c = oracle::uniform(-1.0, 1.0);
            double exact = 0.0;
            for (std::size_t p = 0; p < coef.size(); ++p)
                exact += coef[p] * gaussian_moment(static_cast<int>(p));
            double quad = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) {
                double xp = 1.0, val = 0.0;
                for (std::size_t p = 0; p < coef.size(); ++p) {
                    val += coef[p] * xp;
                    xp *= r.x[i];
                }
                quad += r.w[i] * val;
            }
            CHECK_THAT(quad, WithinAbs(exact, 1e-10 * (1.0 + std::abs(exact))));
        }
    }
    SECTION("large rules stay finite") {
        const GaussHermiteRule r = gauss_hermite(160);
        for (std::size_t i = 0; i < r.size(); ++i) {
            CHECK(std::isfinite(r.w[i]));
            CHECK(r.w[i] > 0.0);
        }
        const auto tw = r.total_weights();
        for (double w : tw) CHECK(std::isfinite(w));
    }
}

TEST_CASE("hermite polynomials") {
    CHECK(hermite(0, 1.7) == 1.0);
    for (double z : {-2.0, 0.0, 0.3, 1.0}) {
        CHECK_THAT(hermite(1, z), WithinAbs(2.0 * z, 1e-14));
        CHECK_THAT(hermite(2, z), WithinAbs(4.0 * z * z - 2.0, 1e-13));
        CHECK_THAT(hermite(3, z), WithinAbs(8.0 * z * z * z - 12.0 * z, 1e-12));
    }
    CHECK_THAT(hermite(3, 1.0), WithinAbs(-4.0, 1e-13));
    CHECK_NOTHROW(hermite(64, 0.5));
    CHECK_THROWS_AS(hermite(65, 0.5), DegreeTooLarge);
    CHECK_NOTHROW(hermite(80, 0.5, 128));
    CHECK_THROWS_AS(hermite(-1, 0.0), std::invalid_argument);
}

TEST_CASE("basis elements phi_n") {
    SECTION("n = 0 at omega = 1 is the oscillator ground state") {
        for (double x : {-1.5, 0.0, 0.2, 2.0}) {
            const Complex v = phi_n(0, {1.0, 0.0}, x);
            CHECK_THAT(std::abs(v - std::pow(pi, -0.25) * std::exp(-0.5 * x * x)),
                       WithinAbs(0.0, 1e-14));
        }
    }
    SECTION("consistent with the raw Hermite formula at moderate n") {
        const Complex omega{0.7, 1.3};
        const double sigma = 2.0 * omega.real();
        for (int n : {1, 2, 5, 9}) {
            for (double x : {-0.8, 0.3, 1.4}) {
                const double z = std::sqrt(0.5 * sigma) * x;
                const Complex ref = std::pow(2.0, -0.5 * n) / std::sqrt(std::tgamma(n + 1.0)) *
                                    std::pow(sigma / (2.0 * pi), 0.25) * hermite(n, z) *
                                    std::exp(-0.5 * omega * x * x);
                CHECK_THAT(std::abs(phi_n(n, omega, x) - ref), WithinAbs(0.0, 1e-12));
            }
        }
    }
    SECTION("rejects non-normalizable omega") {
        CHECK_THROWS_AS(phi_n(0, {0.0, 1.0}, 0.0), NonNormalizable);
        CHECK_THROWS_AS(phi_n(0, {-1.0, 0.0}, 0.0), NonNormalizable);
    }
    SECTION("Gram matrix is the identity for strongly complex omega") {
        for (const Complex omega : {Complex{1.0, 0.0}, Complex{1.0, 2.0}, Complex{0.3, 5.0}}) {
            const int n_max = 12;
            const double sigma = 2.0 * omega.real();
            const double scale = std::sqrt(2.0 / sigma);
            const GaussHermiteRule rule = gauss_hermite(64);
            const auto tw = rule.total_weights();
            double worst = 0.0;
            for (int a = 0; a <= n_max; ++a) {
                for (int b = a; b <= n_max; ++b) {
                    Complex g{0.0, 0.0};
                    for (std::size_t i = 0; i < rule.size(); ++i) {
                        const double x = scale * rule.x[i];
                        g += tw[i] * std::conj(phi_n(a, omega, x)) * phi_n(b, omega, x);
                    }
                    g *= scale;
                    const double target = a == b ? 1.0 : 0.0;
                    worst = std::max(worst, std::abs(g - Complex(target, 0.0)));
                }
            }
            INFO("omega = " << omega.real() << " + " << omega.imag() << "i");
            CHECK(worst < 1e-8);
        }
    }
}

TEST_CASE("poisson_weights") {
    SECTION("degenerate center") {
        const auto w = poisson_weights(0.0, 4);
        CHECK(w[0] == 1.0);
        for (std::size_t n = 1; n < w.size(); ++n) CHECK(w[n] == 0.0);
    }
    SECTION("reference values at lambda = 1") {
        const auto w = poisson_weights(1.0, 4);
        CHECK_THAT(w[0], WithinRel(std::exp(-1.0), 1e-14));
        CHECK_THAT(w[2], WithinRel(0.5 * std::exp(-1.0), 1e-14));
    }
    SECTION("ratio recurrence and unit sum, including large centers") {
        for (double lambda : {0.3, 2.0, 9.0, 150.0, 700.0}) {
            const int n_max = static_cast<int>(lambda + 14.0 * std::sqrt(lambda) + 20.0);
            const auto w = poisson_weights(lambda, n_max);
            double sum = 0.0;
            for (double v : w) {
                CHECK(std::isfinite(v));
                sum += v;
            }
            CHECK_THAT(sum, WithinAbs(1.0, 1e-10));
            for (int n = 0; n + 1 <= n_max && w[n] > 1e-280; ++n)
                CHECK_THAT(w[n + 1] * (n + 1.0), WithinRel(w[n] * lambda, 1e-10));
        }
        CHECK_THROWS_AS(poisson_weights(-0.1, 4), std::invalid_argument);
    }
}

TEST_CASE("expansion of the centered packet is pure C_0") {
    const PacketState s = make_state({0.8, 1.7}, {0.0, 0.0});
    const ExpansionSpectrum spec = coefficients_quadrature(s, 12);
    CHECK_THAT(spec.moduli_sq[0], WithinAbs(1.0, 1e-10));
    for (std::size_t n = 1; n < spec.moduli_sq.size(); ++n)
        CHECK_THAT(spec.moduli_sq[n], WithinAbs(0.0, 1e-10));
    const DistributionComparison cmp = compare_distributions(spec);
    CHECK(cmp.max_abs_err < 1e-10);
}

TEST_CASE("constant-mass coherent packet carries Poisson(1/2) occupation numbers") {
    // quadrature oracle: |C_n|^2 = e^{-1/2} (1/2)^n / n! for b0 = 1, omega = 1
    const PacketState s = make_state({1.0, 0.0}, {1.0, 0.0});
    const ExpansionSpectrum spec = coefficients_quadrature(s, 24);
    CHECK_THAT(spec.lambda_used, WithinRel(0.5, 1e-14));
    CHECK_THAT(spec.moduli_sq[0], WithinRel(std::exp(-0.5), 1e-10));
    CHECK_THAT(spec.moduli_sq[1], WithinRel(0.5 * std::exp(-0.5), 1e-10));
    const DistributionComparison cmp = compare_distributions(spec);
    CHECK(cmp.max_rel_err < 1e-6);
    CHECK(spec.total_prob <= 1.0 + 1e-8);
    CHECK(std::abs(spec.tail) < 1e-8);
}

TEST_CASE("occupation numbers are time-independent along a decaying-mass run") {
    const auto times = std::vector<double>{0.0, 2.0, 5.0, 10.0};
    const auto traj =
        solve_damped_oscillator(MassModel::gaussian_decaying(0.1), {1.0, 0.0}, I, times, 1e-10);
    PacketConfig cfg;
    cfg.b0 = {1.0, 0.0};
    const PacketSeries series = build_packet_series(traj, cfg, 1e-10, false);

    std::vector<ExpansionSpectrum> specs;
    for (const PacketState& s : series.states) specs.push_back(coefficients_quadrature(s, 24));

    SECTION("each time matches the conserved Poisson reference") {
        for (const auto& spec : specs) {
            CHECK_THAT(spec.lambda_used, WithinAbs(series.lambda_ref, 1e-8));
            const DistributionComparison cmp = compare_distributions(spec);
            CHECK(cmp.max_rel_err < 1e-6);
        }
    }
    SECTION("pairwise sup-deviation of the moduli is tiny; phases do move") {
        double dev = 0.0;
        for (std::size_t a = 0; a < specs.size(); ++a)
            for (std::size_t b = a + 1; b < specs.size(); ++b)
                for (std::size_t n = 0; n < specs[a].moduli_sq.size(); ++n)
                    dev = std::max(dev,
                                   std::abs(specs[a].moduli_sq[n] - specs[b].moduli_sq[n]));
        CHECK(dev < 1e-6);
        // the C_1 phases at different times genuinely differ (only moduli are conserved)
        const double phase0 = std::arg(specs[0].C[1]);
        const double phase1 = std::arg(specs[1].C[1]);
        CHECK(std::abs(phase0 - phase1) > 1e-3);
    }
}

TEST_CASE("comparison harness can fail: a shifted center is detected") {
    const PacketState s = make_state({1.0, 0.0}, {1.0, 0.0});
    ExpansionSpectrum spec = coefficients_quadrature(s, 24);
    spec.poisson_ref = poisson_weights(spec.lambda_used + 0.1, spec.n_max);
    const DistributionComparison cmp = compare_distributions(spec);
    CHECK(cmp.max_rel_err > 1e-2);
}

TEST_CASE("tail control") {
    // lambda0 = 9 needs far more than 8 basis elements
    const PacketState s = make_state({1.0, 0.0}, {std::sqrt(18.0), 0.0});
    CHECK_THAT(lambda_of_tau(s.b, s.omega), WithinRel(9.0, 1e-13));
    CHECK_THROWS_AS(coefficients_quadrature(s, 8), TailTooLarge);
    CHECK_NOTHROW(coefficients_quadrature(s, 60));
}

TEST_CASE("spectrum CSV layout") {
    // n_max = 10: Poisson(1/2) mass beyond is ~7e-12, comfortably inside the tail tolerance
    const PacketState s = make_state({1.0, 0.0}, {1.0, 0.0});
    const ExpansionSpectrum spec = coefficients_quadrature(s, 10);
    std::ostringstream os;
    write_spectrum_csv(os, spec);
    const std::string text = os.str();
    CHECK(text.rfind("n,re_C,im_C,moduli_sq,poisson_ref,abs_err\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : text) lines += c == '\n';
    CHECK(lines == 12); // header + n = 0..10
}
