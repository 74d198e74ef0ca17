#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "frachs/error.hpp"
#include "frachs/perturb.hpp"
#include "support.hpp"

using namespace frachs;
using frachs::test::reference_ground;

namespace {

double weighted_lq(const Profile& kappa, const Profile& V, double q) {
    double acc = 0.0;
    for (int j = 0; j < V.grid().size(); ++j) acc += kappa[j] * std::pow(std::max(V[j], 0.0), q);
    return acc * V.grid().spacing();
}

}  // namespace

TEST_CASE("weights") {
    const EFGrid& grid = reference_ground().grid;
    const PerturbationWeight g = gaussian_weight(grid, 1.0, 0.5, 2.0, 0.3);
    CHECK(g.gauge == doctest::Approx(0.3));
    CHECK(g.sup_norm == doctest::Approx(2.3).epsilon(1e-4));
    CHECK(std::abs(g.limit_zero) < 1e-12);
    CHECK(std::abs(g.limit_infinity) < 1e-12);
    const Profile full = g.full();
    const int j = static_cast<int>(std::lround((1.0 + 30.0) / grid.spacing()));
    CHECK(full[j] == doctest::Approx(0.3 + 2.0 * std::exp(-std::pow(grid.node(j) - 1.0, 2) / 0.5)));

    const PerturbationWeight c = constant_weight(grid, -0.7);
    CHECK(c.gauge == -0.7);
    CHECK(sup_norm(c.kappa) == 0.0);

    const Profile ramp = Profile::from_function(grid, [](double z) { return std::tanh(z); });
    CHECK_THROWS_AS(make_weight(ramp), std::invalid_argument);
    CHECK(t_log_range(-1.0, 1.0, 5) == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
    CHECK_THROWS_AS(t_log_range(0.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("zero perturbation is the unperturbed family") {
    const GroundState& g = reference_ground();
    const PerturbationWeight w = gaussian_weight(g.grid, 0.0, 1.0, 1.0);
    for (double t : {0.0, 1.5, -2.25}) {
        const ReducedPoint p = solve_reduced_point(g, 0.0, w, t);
        CHECK(sup_norm(p.eta) == 0.0);
        CHECK(p.gamma == 0.0);
        CHECK(p.newton_steps == 0);
        CHECK(p.converged);
        CHECK(p.energy == doctest::Approx(energy_e0(g.v, g.params)).epsilon(1e-9));
    }
}

TEST_CASE("constant weight rescales the ground state") {
    const GroundState& g = reference_ground();
    const double q = g.params.q;
    for (double c : {1.0, -2.0}) {
        const PerturbationWeight w = constant_weight(g.grid, c);
        for (double eps : {1e-3, 1e-1}) {
            for (double t : {0.0, 2.0}) {
                const ReducedPoint p = solve_reduced_point(g, eps, w, t);
                REQUIRE(p.converged);
                const Profile expected = std::pow(1.0 + eps * c, -1.0 / (q - 2.0)) * dilated_ground(g, t);
                CHECK(sup_norm(p.solution(g) - expected) <= 1e-8);
                CHECK(std::abs(p.gamma) <= 1e-8);
            }
        }
    }
}

TEST_CASE("correction is first order in eps") {
    const GroundState& g = reference_ground();
    const PerturbationWeight w = gaussian_weight(g.grid, 0.5, 1.0, 1.0);
    const auto ts = t_log_range(-4.0, 4.0, 9);
    double lo = INFINITY, hi = 0.0;
    for (double eps : {1e-3, 1e-2, 1e-1}) {
        const ReducedCurve curve = reduced_curve(g, eps, w, ts);
        double worst = 0.0;
        for (const ReducedPoint& p : curve.points) {
            REQUIRE(p.converged);
            CHECK(std::abs(p.constraint) <= 1e-9);
            worst = std::max(worst, p.eta_norm / eps);
        }
        lo = std::min(lo, worst);
        hi = std::max(hi, worst);
    }
    CHECK(hi / lo < 1.5);
}

TEST_CASE("reduced energy to first order") {
    const GroundState& g = reference_ground();
    const PerturbationWeight w = gaussian_weight(g.grid, -1.0, 0.8, 1.0);
    const double eps = 1e-4;
    const double e0 = energy_e0(g.v, g.params);
    for (double t : {-2.0, 0.0, 1.0}) {
        const ReducedPoint p = solve_reduced_point(g, eps, w, t);
        const Profile V = dilated_ground(g, t);
        const double first = e0 - eps * g.params.sphere_measure / g.params.q * weighted_lq(w.kappa, V, g.params.q);
        CHECK(std::abs(p.energy - first) <= 50.0 * eps * eps);
    }
}

TEST_CASE("symmetric bump yields a solution at the origin") {
    const GroundState& g = reference_ground();
    const PerturbationWeight w = gaussian_weight(g.grid, 0.0, 1.0, 1.0);
    const double eps = 0.01;
    const ReducedCurve curve = reduced_curve(g, eps, w, t_log_range(-6.0, 6.0, 25));
    CHECK_FALSE(curve.degenerate);
    const SolutionSearch found = find_solutions(curve, g, eps, w);
    REQUIRE_FALSE(found.solutions.empty());
    const VerifiedSolution* origin = nullptr;
    for (const auto& s : found.solutions)
        if (std::abs(s.t_log) < 1e-6) origin = &s;
    REQUIRE(origin != nullptr);
    CHECK(origin->residual <= 1e-8);
    CHECK(std::abs(origin->gamma) <= 1e-8);
    CHECK(origin->positive);
    CHECK(full_residual(g, eps, w, origin->u) == doctest::Approx(origin->residual));
    CHECK(sup_norm(origin->u - kelvin_reflect(origin->u)) <= 1e-8);
}

TEST_CASE("moving the weight moves the critical point") {
    const GroundState& g = reference_ground();
    const double eps = 0.01;
    const auto ts = t_log_range(-6.0, 6.0, 25);
    const double delta = 1.5;
    const auto centred = find_solutions(reduced_curve(g, eps, gaussian_weight(g.grid, 0.0, 1.0, 1.0), ts), g, eps,
                                        gaussian_weight(g.grid, 0.0, 1.0, 1.0));
    const PerturbationWeight moved = gaussian_weight(g.grid, delta, 1.0, 1.0);
    const auto shifted = find_solutions(reduced_curve(g, eps, moved, ts), g, eps, moved);
    REQUIRE(centred.solutions.size() == shifted.solutions.size());
    for (std::size_t i = 0; i < centred.solutions.size(); ++i) {
        CHECK(shifted.solutions[i].t_log == doctest::Approx(centred.solutions[i].t_log - delta).epsilon(1e-5));
        CHECK(shifted.solutions[i].energy == doctest::Approx(centred.solutions[i].energy).epsilon(1e-9));
        CHECK(shifted.solutions[i].type == centred.solutions[i].type);
    }
}

TEST_CASE("constant weight gives a flat curve") {
    const GroundState& g = reference_ground();
    const PerturbationWeight w = constant_weight(g.grid, 1.0);
    const double eps = 0.05;
    const ReducedCurve curve = reduced_curve(g, eps, w, t_log_range(-3.0, 3.0, 7));
    CHECK(curve.degenerate);
    for (const auto& p : curve.points) CHECK(p.energy == doctest::Approx(curve.reference_energy).epsilon(1e-9));
    const SolutionSearch found = find_solutions(curve, g, eps, w);
    REQUIRE(found.solutions.size() == 1);
    CHECK(found.solutions[0].degenerate);
    CHECK(found.solutions[0].t_log == 0.0);
    CHECK(found.solutions[0].residual <= 1e-8);
}

TEST_CASE("input validation") {
    const GroundState& g = reference_ground();
    const PerturbationWeight w = gaussian_weight(g.grid, 0.0, 1.0, 1.0);
    CHECK_THROWS_AS(solve_reduced_point(g, 0.6, w, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(reduced_curve(g, 0.01, w, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(reduced_curve(g, 0.01, w, {0.0, 1.0, 0.5}), std::invalid_argument);
    const GroundState hardy = solve_ground(make_params(3, 0.75, 3.0, 0.5), make_grid(30.0, 512));
    CHECK_THROWS_AS(solve_reduced_point(hardy, 0.01, gaussian_weight(hardy.grid, 0.0, 1.0, 1.0), 0.0),
                    std::invalid_argument);
    PerturbOptions starved;
    starved.max_newton = 1;
    starved.tol = 1e-14;
    CHECK_THROWS_AS(solve_reduced_point(g, 0.2, w, 0.0, starved), ConvergenceError);
}
