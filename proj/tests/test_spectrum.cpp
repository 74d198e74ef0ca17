#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "frachs/error.hpp"
#include "frachs/spectrum.hpp"
#include "support.hpp"

using namespace frachs;
using frachs::test::cosine;
using frachs::test::reference_ground;

namespace {

// Dense reference: generalized symmetric problem A f = mu W f via the
// Cholesky-free form W^{1/2} A^{-1} W^{1/2}, assembled column by column.
std::vector<double> dense_eigenvalues(const GroundState& g, int ell, int m) {
    const int N = g.grid.size();
    const SectorMultiplier op(g.grid, g.params, ell, g.params.lambda);
    std::vector<double> w(N);
    for (int j = 0; j < N; ++j) w[j] = std::sqrt(std::pow(std::max(g.v[j], 0.0), g.params.q - 2.0));
    Eigen::MatrixXd M(N, N);
    for (int k = 0; k < N; ++k) {
        Profile e(g.grid);
        e[k] = w[k];
        const Profile col = op.invert(e);
        for (int j = 0; j < N; ++j) M(j, k) = w[j] * col[j];
    }
    M = 0.5 * (M + M.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    std::vector<double> mu;
    for (int i = N - 1; i >= N - m; --i) mu.push_back(1.0 / es.eigenvalues()(i));
    return mu;
}

const GroundState& small_ground() {
    static GroundState g = solve_ground(make_params(3, 0.75, 3.0), make_grid(20.0, 256));
    return g;
}

}  // namespace

TEST_CASE("ell = 0 contains the equation and the dilation mode") {
    const GroundState& g = reference_ground();
    const SectorSpectrum sp = sector_spectrum(g, 0, 5);
    REQUIRE(sp.eigenvalues.size() == 5);
    CHECK(std::abs(sp.eigenvalues[0] - 1.0) <= kMu1Tolerance);
    CHECK(std::abs(sp.eigenvalues[1] - 2.0) <= kMu2Tolerance);
    CHECK(sp.eigenvalues[2] > 2.0 + 0.1);
    CHECK(std::abs(cosine(sp.eigenfunctions[0], g.v)) >= 1.0 - 1e-8);
    CHECK(std::abs(cosine(sp.eigenfunctions[1], derivative(g.v))) >= 1.0 - 1e-8);
    const Profile& f0 = sp.eigenfunctions[0];
    const Profile& f1 = sp.eigenfunctions[1];
    CHECK(sup_norm(f0 - kelvin_reflect(f0)) <= 1e-8 * sup_norm(f0));
    CHECK(sup_norm(f1 + kelvin_reflect(f1)) <= 1e-8 * sup_norm(f1));
    CHECK(sp.gap_to_qminus1 == doctest::Approx(sp.eigenvalues[2] - 2.0));
    CHECK(sp.rayleigh_defect <= 1e-10);
}

TEST_CASE("eigenfunctions are weight-orthonormal") {
    const GroundState& g = reference_ground();
    const SectorSpectrum sp = sector_spectrum(g, 1, 4);
    for (std::size_t i = 0; i < sp.eigenfunctions.size(); ++i)
        for (std::size_t j = 0; j < sp.eigenfunctions.size(); ++j) {
            Profile wf = sp.eigenfunctions[j];
            for (int k = 0; k < g.grid.size(); ++k) wf[k] *= sp.weight[k];
            const double ip = inner(sp.eigenfunctions[i], wf);
            CHECK(ip == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-10));
        }
}

TEST_CASE("eigenpairs satisfy the pencil") {
    const GroundState& g = reference_ground();
    for (int ell : {0, 2}) {
        const SectorSpectrum sp = sector_spectrum(g, ell, 3);
        const SectorMultiplier op(g.grid, g.params, ell, 0.0);
        for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i) {
            const Profile& f = sp.eigenfunctions[i];
            Profile rhs = f;
            for (int k = 0; k < g.grid.size(); ++k) rhs[k] *= sp.eigenvalues[i] * sp.weight[k];
            CHECK(sup_norm(op.apply(f) - rhs) <= 1e-7 * sup_norm(op.apply(f)));
        }
    }
}

TEST_CASE("agreement with dense diagonalization") {
    const GroundState& g = small_ground();
    for (int ell : {0, 1, 3}) {
        const auto dense = dense_eigenvalues(g, ell, 4);
        const SectorSpectrum sp = sector_spectrum(g, ell, 4);
        for (int i = 0; i < 4; ++i) CHECK(sp.eigenvalues[i] == doctest::Approx(dense[i]).epsilon(1e-10));
    }
}

TEST_CASE("higher sectors lie above q - 1 and increase with ell") {
    const GroundState& g = reference_ground();
    double prev = 2.0;
    for (int ell = 1; ell <= 3; ++ell) {
        const SectorSpectrum sp = sector_spectrum(g, ell, 3);
        CHECK(sp.eigenvalues.front() > prev);
        CHECK(sp.gap_to_qminus1 > 0.0);
        CHECK(std::is_sorted(sp.eigenvalues.begin(), sp.eigenvalues.end()));
        CHECK(sp.multiplicity == 2 * ell + 1);
        prev = sp.eigenvalues.front();
    }
}

TEST_CASE("grid doubling leaves the key eigenvalues unchanged") {
    const GroundState& a = reference_ground(2048);
    const GroundState& b = reference_ground(4096);
    const double keys_a[] = {sector_spectrum(a, 0, 2).eigenvalues[1], sector_spectrum(a, 0, 3).eigenvalues[2],
                             sector_spectrum(a, 1, 1).eigenvalues[0]};
    const double keys_b[] = {sector_spectrum(b, 0, 2).eigenvalues[1], sector_spectrum(b, 0, 3).eigenvalues[2],
                             sector_spectrum(b, 1, 1).eigenvalues[0]};
    for (int i = 0; i < 3; ++i) CHECK(std::abs(keys_a[i] - keys_b[i]) / keys_b[i] < 1e-6);
}

TEST_CASE("nondegeneracy report") {
    const NondegeneracyReport r = nondegeneracy_report(reference_ground(), 3, 5);
    CHECK(r.passed);
    CHECK(r.failures.empty());
    CHECK(r.mu2_simple);
    CHECK(r.mu2_odd);
    CHECK(r.min_margin > 0.0);
    CHECK(r.kappa == doctest::Approx(1.0 - 2.0 / r.mu3));
    REQUIRE(r.sectors.size() == 4);
    for (std::size_t i = 1; i < r.sectors.size(); ++i) CHECK(r.sectors[i].margin > 0.0);
}

TEST_CASE("argument validation") {
    const GroundState& g = small_ground();
    CHECK_THROWS_AS(sector_spectrum(g, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(sector_spectrum(g, 0, 65), std::invalid_argument);
    CHECK_THROWS_AS(sector_spectrum(g, -1, 2), std::invalid_argument);
}

TEST_CASE("stability scan") {
    const ProblemParams base = make_params(3, 0.75, 3.0);
    const EFGrid grid = make_grid(30.0, 2048);
    const std::vector<double> lambdas = {-0.3, 0.0, 0.3, 0.9};
    const ScanResult res = stability_scan(base, lambdas, grid);
    REQUIRE(res.rows.size() == lambdas.size());
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        CHECK(res.rows[i].converged);
        CHECK(res.rows[i].lambda == lambdas[i]);
        CHECK(res.rows[i].indicator == doctest::Approx(res.rows[i].nu1 - 2.0));
    }
    CHECK(res.rows[1].indicator > 0.0);
    REQUIRE(res.threshold.has_value());
    const ThresholdEstimate& t = *res.threshold;
    CHECK(std::abs(t.indicator) <= 1e-6);
    CHECK(t.bracket_lo <= t.lambda_star);
    CHECK(t.lambda_star <= t.bracket_hi);
    CHECK(t.lambda_star > 0.3);
    CHECK(t.lambda_star < 0.9);

    ScanOptions serial;
    serial.threads = 1;
    const ScanResult again = stability_scan(base, lambdas, grid, serial);
    for (std::size_t i = 0; i < lambdas.size(); ++i) CHECK(again.rows[i].nu1 == res.rows[i].nu1);
    CHECK(again.threshold->lambda_star == t.lambda_star);
}
