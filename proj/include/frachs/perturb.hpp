#pragma once

// Lyapunov-Schmidt reduction for (-Delta)^s u = (1 + eps k(x)) |x|^{-bq} u_+^{q-1}
// with a radial weight k. In log-radial variables, with kappa(zeta) = k(e^{-zeta})
// and V = v(. + t_log) the dilated ground state, the constrained problem is
//
//   F1 = Lambda_0 (V + eta) - (1 + eps k)(V + eta)_+^{q-1} + gamma Lambda_0 V' = 0,
//   F2 = <Lambda_0 V', eta> = 0,
//
// and critical points of phi(t_log) = E_eps[V + eta] are solutions of the full
// equation (gamma = 0 there).

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "frachs/groundstate.hpp"

namespace frachs {

/// Radial weight k, stored as kappa(zeta) = k(e^{-zeta}) - gauge.
struct PerturbationWeight {
    Profile kappa;             ///< zero limits at both ends
    double gauge = 0.0;        ///< common limit of k at 0 and infinity
    double sup_norm = 0.0;     ///< sup |k| (before the gauge shift)
    double limit_zero = 0.0;   ///< kappa at zeta -> +infinity (x -> 0)
    double limit_infinity = 0.0;  ///< kappa at zeta -> -infinity

    /// gauge + kappa, the weight entering the equation.
    Profile full() const;
};

/// Splits raw samples of k into gauge + kappa. The end values of the grid are
/// taken as the limits; they must agree to limit_tol * max(1, sup|k|).
/// Throws std::invalid_argument on non-finite samples or unequal limits.
PerturbationWeight make_weight(const Profile& raw, double limit_tol = 1e-8);

/// base + height * exp(-(zeta - center)^2 / (2 width^2)).
PerturbationWeight gaussian_weight(const EFGrid& grid, double center, double width,
                                   double height, double base = 0.0);

/// Constant weight k = c.
PerturbationWeight constant_weight(const EFGrid& grid, double c);

struct PerturbOptions {
    double tol = 1e-10;       ///< Newton stops at relative ||F|| <= tol
    int max_newton = 30;
    double krylov_tol = 1e-13;
    int krylov_restart = 120;
    int krylov_max_iter = 2000;
};

struct ReducedPoint {
    ReducedPoint(double t, Profile correction) : t_log(t), eta(std::move(correction)) {}

    double t_log = 0.0;
    Profile eta;
    double gamma = 0.0;
    double energy = 0.0;       ///< E_eps[V + eta]
    double residual = 0.0;     ///< relative ||F|| at exit
    double eta_norm = 0.0;     ///< D^s norm of eta
    double constraint = 0.0;   ///< <Lambda_0 V', eta> / ||Lambda_0 V'||
    double envelope = 0.0;     ///< g(t_log) = (sphere * int |kappa| V^q)^{(q-1)/q}
    int newton_steps = 0;
    bool converged = false;
    bool positive = false;     ///< V + eta > 0 up to roundoff
    std::string error;         ///< set when the point failed inside a curve

    /// V + eta on the grid of the ground state.
    Profile solution(const GroundState& ground) const;
};

/// V = v(. + t_log) on the ground-state grid.
Profile dilated_ground(const GroundState& ground, double t_log);

/// Newton solve of the bordered system at one dilation. `start` is a warm
/// start (eta, gamma); eps = 0 returns eta = 0, gamma = 0 without iterating.
/// Throws std::invalid_argument when the ground state has lambda != 0, is not
/// converged, or |eps| sup|k| > 0.5; ConvergenceError when Newton stalls.
ReducedPoint solve_reduced_point(const GroundState& ground, double eps,
                                 const PerturbationWeight& weight, double t_log,
                                 const PerturbOptions& options = {},
                                 const ReducedPoint* start = nullptr);

struct CriticalPoint {
    double t_log = 0.0;
    double energy = 0.0;
    std::string type;  ///< "min" or "max"
};

struct ReducedCurve {
    double eps = 0.0;
    std::vector<ReducedPoint> points;
    std::vector<CriticalPoint> critical_points;
    double reference_energy = 0.0;  ///< E_eps of the scaled ground state (E_0[v] when gauge = 0)
    double total_variation = 0.0;
    bool degenerate = false;        ///< total variation below 100 tol
};

/// Evaluates phi over t_log_grid (ascending), warm-starting each point from the
/// previous one. Failed points are kept with converged = false.
ReducedCurve reduced_curve(const GroundState& ground, double eps, const PerturbationWeight& weight,
                           const std::vector<double>& t_log_grid,
                           const PerturbOptions& options = {});

/// Evenly spaced t_log values, count >= 2.
std::vector<double> t_log_range(double lo, double hi, int count);

struct VerifiedSolution {
    double t_log = 0.0;
    double energy = 0.0;
    double gamma = 0.0;
    double residual = 0.0;  ///< full equation, relative sup norm
    bool positive = false;
    bool degenerate = false;
    std::string type;
    Profile u;
};

struct SolutionSearch {
    std::vector<VerifiedSolution> solutions;
    std::vector<std::string> spurious;  ///< rejected candidates with the reason
};

/// ||Lambda_0 u - (1 + eps k) u_+^{q-1}||_inf / ||(1 + eps k) u_+^{q-1}||_inf
double full_residual(const GroundState& ground, double eps, const PerturbationWeight& weight,
                     const Profile& u);

/// Refines every discrete critical point of the curve (golden section on phi,
/// then a root of gamma) and keeps those with full residual and |gamma| at
/// most 10 tol. A degenerate curve yields a single solution at the grid point
/// nearest t_log = 0, tagged degenerate.
SolutionSearch find_solutions(const ReducedCurve& curve, const GroundState& ground, double eps,
                              const PerturbationWeight& weight, const PerturbOptions& options = {});

}  // namespace frachs
