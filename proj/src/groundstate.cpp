#include "frachs/groundstate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "frachs/error.hpp"

namespace frachs {

namespace {

Profile positive_power(const Profile& v, double p) {
    Profile out(v.grid());
    for (std::size_t j = 0; j < v.size(); ++j) out[j] = v[j] > 0.0 ? std::pow(v[j], p) : 0.0;
    return out;
}

double relative_residual(const Profile& lhs, const Profile& rhs) {
    double diff = 0.0;
    for (std::size_t j = 0; j < lhs.size(); ++j) diff = std::max(diff, std::abs(lhs[j] - rhs[j]));
    const double scale = sup_norm(rhs);
    return scale > 0.0 ? diff / scale : diff;
}

// Negative values at roundoff level appear in tails decaying below 1e-16.
constexpr double kPositivityFloor = 1e-10;

void check_positive(const Profile& v, int iteration) {
    const double vmax = sup_norm(v);
    const double vmin = *std::min_element(v.values().begin(), v.values().end());
    if (!(vmax > 0.0) || vmin < -kPositivityFloor * vmax) {
        std::ostringstream msg;
        msg << "ground-state iterate lost positivity at iteration " << iteration
            << " (min " << vmin << ", max " << vmax << "); try a larger grid";
        throw SolverFailure(msg.str());
    }
}

double tail_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace

Profile initial_guess(const ProblemParams& params, const EFGrid& grid, double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("initial_guess: scale must be positive");
    const double a = params.decay_exponent();
    return Profile::from_function(grid, [a, scale](double z) {
        return std::pow(1.0 / std::cosh(a * z / scale), scale);
    });
}

double equation_residual(const ProblemParams& params, const Profile& v) {
    SectorMultiplier op(v.grid(), params, 0, params.lambda);
    return relative_residual(op.apply(v), positive_power(v, params.q - 1.0));
}

GroundState solve_ground(const ProblemParams& params, const EFGrid& grid,
                         const GroundOptions& options) {
    if (!(options.tol > 1e-14 && options.tol < 1e-4))
        throw std::invalid_argument("ground-state tolerance must lie in (1e-14, 1e-4)");
    if (options.max_iter < 1) throw std::invalid_argument("max_iter must be positive");

    const SectorMultiplier op(grid, params, 0, params.lambda);
    if (op.min_value() <= 0.0)
        throw SingularOperatorError("Lambda_0 + lambda is not positive on this grid");

    const double q = params.q;
    const double gamma = (q - 1.0) / (q - 2.0);

    Profile v = options.initial ? *options.initial : initial_guess(params, grid, 1.0);
    require_same_grid(grid, v.grid());
    v = symmetrize_even(v);
    check_positive(v, 0);

    GroundState out{params, grid, v};
    double residual = 0.0;
    int iter = 0;
    for (;; ++iter) {
        const Profile nonlinear = positive_power(v, q - 1.0);
        const Profile av = op.apply(v);
        residual = relative_residual(av, nonlinear);
        if (residual <= options.tol || iter >= options.max_iter) break;

        const double stab = inner(av, v) / inner(nonlinear, v);
        if (!(stab > 0.0) || !std::isfinite(stab))
            throw SolverFailure("ground-state stabilizing factor is not positive");
        Profile next = op.invert(nonlinear);
        next *= std::pow(stab, gamma);
        v = symmetrize_even(next);
        check_positive(v, iter + 1);
    }

    out.v = v;
    out.residual = residual;
    out.iterations = iter;
    out.converged = residual <= options.tol;
    out.best_constant = rayleigh_quotient(v, params);
    try {
        out.decay_rate = fit_decay(v, kDecayWindow, kDecayEdge);
    } catch (const std::invalid_argument&) {
        out.decay_rate = std::nan("");
    }
    if (!out.converged && !options.allow_unconverged) {
        std::ostringstream msg;
        msg << "ground-state iteration did not converge in " << options.max_iter
            << " iterations (residual " << residual << ")";
        throw ConvergenceError(msg.str(), residual);
    }
    return out;
}

GroundState solve_ground(const ProblemParams& params, const EFGrid& grid, double tol,
                         int max_iter) {
    GroundOptions options;
    options.tol = tol;
    options.max_iter = max_iter;
    return solve_ground(params, grid, options);
}

double fit_decay(const Profile& v, double window, double edge) {
    if (!(window > 0.0 && window < 0.4)) throw std::invalid_argument("fit_decay: window must lie in (0, 0.4)");
    if (!(edge >= 0.0 && edge + window < 1.0)) throw std::invalid_argument("fit_decay: bad edge fraction");
    const EFGrid& grid = v.grid();
    const double L = grid.half_length();
    const double lo = (1.0 - edge - window) * L, hi = (1.0 - edge) * L;
    std::vector<double> xl, yl, xr, yr;
    for (int j = 0; j < grid.size(); ++j) {
        const double z = grid.node(j);
        const double az = std::abs(z);
        if (az < lo || az > hi) continue;
        if (!(v[j] > 0.0)) throw std::invalid_argument("fit_decay: nonpositive tail value");
        auto& x = z < 0 ? xl : xr;
        auto& y = z < 0 ? yl : yr;
        x.push_back(az);
        y.push_back(-std::log(v[j]));
    }
    if (xl.size() < 2 || xr.size() < 2) throw std::invalid_argument("fit_decay: window too narrow");
    return 0.5 * (tail_slope(xl, yl) + tail_slope(xr, yr));
}

double energy_e0(const Profile& v, const ProblemParams& params) {
    const SectorMultiplier op(v.grid(), params, 0, params.lambda);
    double pot = 0.0;
    for (double x : v.values())
        if (x > 0.0) pot += std::pow(x, params.q);
    pot *= v.grid().spacing();
    return params.sphere_measure * (0.5 * op.quadratic_form(v, v) - pot / params.q);
}

double energy_e_eps(const Profile& v, double eps, const Profile& kappa,
                    const ProblemParams& params) {
    require_same_grid(v.grid(), kappa.grid());
    double pert = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j)
        if (v[j] > 0.0) pert += kappa[j] * std::pow(v[j], params.q);
    pert *= v.grid().spacing();
    return energy_e0(v, params) - eps * params.sphere_measure * pert / params.q;
}

double rayleigh_quotient(const Profile& v, const ProblemParams& params) {
    const SectorMultiplier op(v.grid(), params, 0, params.lambda);
    const double form = params.sphere_measure * op.quadratic_form(v, v);
    const double lq = weighted_integral(v, params.q, params);
    return form / std::pow(lq, 2.0 / params.q);
}

double normalization_constant(const Profile& v, const ProblemParams& params) {
    const SectorMultiplier op(v.grid(), params, 0, params.lambda);
    const double form = params.sphere_measure * op.quadratic_form(v, v);
    return std::pow(form, (params.q - 2.0) / params.q);
}

std::vector<double> radial_profile(const GroundState& ground) {
    auto z = profile_to_radial(ground.params, ground.v);
    // Nodes run from zeta = -L (largest radius) upwards; flip to increasing r.
    std::reverse(z.begin(), z.end());
    return z;
}

BubbleCheck critical_bubble_check(const ProblemParams& params, const EFGrid& grid) {
    if (!params.critical)
        throw std::invalid_argument("critical_bubble_check requires critical-exponent params");
    const double a = params.decay_exponent();
    const Profile shape =
        Profile::from_function(grid, [a](double z) { return std::pow(2.0 * std::cosh(z), -a); });
    const SectorMultiplier op(grid, params, 0, params.lambda);
    const Profile lhs = op.apply(shape);
    const int mid = grid.size() / 2;  // zeta = 0
    // c^{q-2} = (Lambda shape)(0) / shape(0)^{q-1}
    const double c = std::pow(lhs[mid] / std::pow(shape[mid], params.q - 1.0), 1.0 / (params.q - 2.0));
    BubbleCheck out{c, 0.0, c * shape};
    out.residual = equation_residual(params, out.bubble);
    return out;
}

}  // namespace frachs
