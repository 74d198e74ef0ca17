#pragma once

#include <optional>

#include "frachs/efgrid.hpp"

namespace frachs {

/// Positive even solution of (Lambda_0(D) + lambda) v = v^{q-1} on a grid.
struct GroundState {
    ProblemParams params;
    EFGrid grid;
    Profile v;
    double best_constant = 0.0;  ///< S_q (lambda = 0) or S^lambda_q
    double residual = 0.0;       ///< relative sup-norm equation residual
    double decay_rate = 0.0;     ///< fitted exponential tail rate of v; NaN if the tail underflows
    int iterations = 0;
    bool converged = false;
};

struct GroundOptions {
    double tol = 1e-10;
    int max_iter = 2000;
    /// Starting profile; symmetrized before use. Defaults to initial_guess(params, grid, 1).
    std::optional<Profile> initial;
    /// Return the last iterate with converged = false instead of throwing.
    bool allow_unconverged = false;
};

/// sech(a zeta / scale)^scale with a = (n-2s)/2: unit amplitude, correct tail class.
Profile initial_guess(const ProblemParams& params, const EFGrid& grid, double scale = 1.0);

/// Petviashvili iteration
///   v <- even( S^gamma (Lambda_0 + lambda)^{-1} v_+^{q-1} ),
///   S = <(Lambda_0+lambda) v, v> / <v_+^{q-1}, v>,  gamma = (q-1)/(q-2).
/// Throws ConvergenceError after max_iter (unless allow_unconverged) and
/// SolverFailure when the iterate loses positivity.
GroundState solve_ground(const ProblemParams& params, const EFGrid& grid,
                         const GroundOptions& options = {});
GroundState solve_ground(const ProblemParams& params, const EFGrid& grid, double tol,
                         int max_iter);

/// || (Lambda_0 + lambda) v - v_+^{q-1} ||_inf / || v_+^{q-1} ||_inf
double equation_residual(const ProblemParams& params, const Profile& v);

/// Least-squares slope of -ln v against |zeta|, averaged over both tails, on
/// the nodes with |zeta|/L in [1 - edge - window, 1 - edge].
/// Throws std::invalid_argument on nonpositive samples in the window.
double fit_decay(const Profile& v, double window, double edge = 0.05);

/// Window used for the GroundState::decay_rate diagnostic: |zeta|/L in [0.4, 0.75].
inline constexpr double kDecayWindow = 0.35;
inline constexpr double kDecayEdge = 0.25;

/// sphere_measure * ( 1/2 <(Lambda_0 + lambda) v, v> - 1/q int v_+^q )
double energy_e0(const Profile& v, const ProblemParams& params);

/// energy_e0 - eps * sphere_measure / q * int kappa v_+^q
double energy_e_eps(const Profile& v, double eps, const Profile& kappa,
                    const ProblemParams& params);

/// Rayleigh quotient sphere_measure <(Lambda_0+lambda) v, v> / (sphere_measure int v^q)^{2/q}.
double rayleigh_quotient(const Profile& v, const ProblemParams& params);

/// (sphere_measure <(Lambda_0+lambda) v, v>)^{(q-2)/q}; equals the best
/// constant when v solves the equation with unit coefficient.
double normalization_constant(const Profile& v, const ProblemParams& params);

/// r^{-(n-2s)/2} v(-ln r) at the grid radii, ordered by increasing radius.
std::vector<double> radial_profile(const GroundState& ground);

struct BubbleCheck {
    double amplitude = 0.0;  ///< c in c (2 cosh zeta)^{-(n-2s)/2}
    double residual = 0.0;   ///< relative sup-norm residual of the discrete equation
    Profile bubble;
};

/// Critical-exponent bubble c (2 cosh zeta)^{-(n-2s)/2}, with c fixed so the
/// discrete equation holds exactly at zeta = 0. Requires params.critical.
BubbleCheck critical_bubble_check(const ProblemParams& params, const EFGrid& grid);

}  // namespace frachs
