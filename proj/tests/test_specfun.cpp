#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "frachs/specfun.hpp"

using namespace frachs;
using cd = std::complex<double>;

TEST_CASE("log_gamma_complex at classical points") {
    CHECK(std::abs(log_gamma_complex(1.0)) < 1e-14);
    CHECK(std::abs(log_gamma_complex(2.0)) < 1e-14);
    const cd half = log_gamma_complex(0.5);
    CHECK(half.real() == doctest::Approx(0.5 * std::log(std::numbers::pi)).epsilon(1e-14));
    CHECK(std::abs(half.imag()) < 1e-15);
}

TEST_CASE("log_gamma_complex satisfies the functional equation") {
    for (cd z : {cd(0.3, 0.7), cd(2.5, 0.0), cd(5.0, -3.0), cd(0.01, 40.0), cd(80.0, 50.0)}) {
        const cd ratio = std::exp(log_gamma_complex(z + 1.0) - log_gamma_complex(z));
        CHECK(std::abs(ratio - z) / std::abs(z) < 1e-12);
    }
}

TEST_CASE("log_gamma_complex matches the real log-gamma") {
    for (double x = 0.05; x <= 100.0; x += 0.37) {
        const cd lg = log_gamma_complex(x);
        CHECK(std::abs(std::expm1(lg.real() - std::lgamma(x))) < 1e-12);
        CHECK(std::abs(lg.imag()) < 1e-13);
    }
}

TEST_CASE("log_gamma_complex reproduces |Gamma(1/2 + iy)|^2 = pi / cosh(pi y)") {
    for (double y : {0.1, 1.0, 3.7, 12.0, 30.0}) {
        const double lhs = 2.0 * log_gamma_complex(cd(0.5, y)).real();
        const double rhs = std::log(std::numbers::pi / std::cosh(std::numbers::pi * y));
        CHECK(std::abs(std::expm1(lhs - rhs)) < 1e-12);
    }
}

TEST_CASE("log_gamma_complex rejects bad input") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(log_gamma_complex(cd(nan, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(log_gamma_complex(cd(1.0, INFINITY)), std::invalid_argument);
    CHECK_THROWS_AS(log_gamma_complex(cd(0.0, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(log_gamma_complex(cd(-2.5, 0.0)), std::invalid_argument);
}

TEST_CASE("sector symbol at tau = 0 is the Hardy constant") {
    for (auto [n, s] : {std::pair{2, 0.3}, {3, 0.75}, {4, 0.5}, {5, 0.25}, {5, 0.5}}) {
        const double h = hardy_constant(n, s);
        const double direct = std::pow(2.0, 2 * s) *
                              std::pow(std::tgamma((n + 2 * s) / 4) / std::tgamma((n - 2 * s) / 4), 2);
        CHECK(h == doctest::Approx(direct).epsilon(1e-13));
        CHECK(sector_symbol({0, 0.0, n, s}) == doctest::Approx(h).epsilon(1e-12));
        CHECK(h > 0.0);
    }
    CHECK(hardy_constant(3, 0.75) == doctest::Approx(0.44642959996256532).epsilon(1e-14));
}

TEST_CASE("sector symbol is even in tau") {
    for (int ell = 0; ell <= 4; ++ell)
        for (double tau : {0.3, 1.0, 7.5, 60.0}) {
            const double a = sector_symbol({ell, tau, 3, 0.75});
            const double b = sector_symbol({ell, -tau, 3, 0.75});
            CHECK(a == b);
        }
}

TEST_CASE("sector symbol tends to the Laplacian symbol as s -> 1") {
    for (int n : {3, 4, 5}) {
        double worst = 0.0;
        for (double tau = 0.0; tau <= 10.0; tau += 0.05) {
            const double classical = tau * tau + (n - 2.0) * (n - 2.0) / 4.0;
            worst = std::max(worst, std::abs(sector_symbol({0, tau, n, 0.999}) - classical) / classical);
        }
        CHECK(worst <= 1e-2);
    }
    CHECK(hardy_constant(4, 0.9999) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("sector symbol increases in tau^2 and in ell") {
    for (auto [n, s] : {std::pair{3, 0.75}, {2, 0.3}, {5, 0.5}}) {
        for (int ell = 0; ell <= 5; ++ell) {
            double prev = sector_symbol({ell, 0.0, n, s});
            for (int k = 1; k <= 1000; ++k) {
                const double tau = 0.1 * k;
                const double cur = sector_symbol({ell, tau, n, s});
                CHECK_MESSAGE(cur > prev, "ell=" << ell << " tau=" << tau);
                if (ell < 5) CHECK(sector_symbol({ell + 1, tau, n, s}) > cur);
                prev = cur;
            }
        }
    }
}

TEST_CASE("minimum of Lambda_0 over a tau grid is attained at tau = 0") {
    const double h = hardy_constant(3, 0.75);
    for (double tau = 0.01; tau < 20.0; tau += 0.01) CHECK(sector_symbol({0, tau, 3, 0.75}) > h);
}

TEST_CASE("symbol queries are validated") {
    CHECK_THROWS_AS(sector_symbol({-1, 0.0, 3, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(sector_symbol({0, 0.0, 1, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(sector_symbol({0, 0.0, 3, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(sector_symbol({0, 0.0, 3, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(sector_symbol({0, NAN, 3, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(hardy_constant(3, 1.2), std::invalid_argument);
}

TEST_CASE("sphere measure and harmonic multiplicity") {
    CHECK(sphere_measure(2) == doctest::Approx(2 * std::numbers::pi));
    CHECK(sphere_measure(3) == doctest::Approx(4 * std::numbers::pi));
    CHECK(sphere_measure(4) == doctest::Approx(2 * std::numbers::pi * std::numbers::pi));
    CHECK(harmonic_multiplicity(3, 0) == 1);
    CHECK(harmonic_multiplicity(3, 2) == 5);
    CHECK(harmonic_multiplicity(2, 3) == 2);
    CHECK(harmonic_multiplicity(4, 2) == 9);
}
