#include "frachs/perturb.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "frachs/error.hpp"

namespace frachs {

namespace {

using Vec = Eigen::VectorXd;

constexpr double kPositivityFloor = 1e-10;

// Restarted GMRES with modified Gram-Schmidt. Solves M x = b to a relative
// residual of tol; returns the achieved relative residual.
double gmres(const std::function<Vec(const Vec&)>& apply, const Vec& b, Vec& x, double tol,
             int restart, int max_iter) {
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x.setZero();
        return 0.0;
    }
    int total = 0;
    double rel = 1.0;
    while (total < max_iter) {
        Vec r = b - apply(x);
        double beta = r.norm();
        rel = beta / bnorm;
        if (rel <= tol) break;
        const int m = std::min(restart, max_iter - total);
        std::vector<Vec> basis{r / beta};
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m + 1, m);
        Vec cs = Vec::Zero(m), sn = Vec::Zero(m), g = Vec::Zero(m + 1);
        g[0] = beta;
        int k = 0;
        for (; k < m; ++k, ++total) {
            Vec w = apply(basis[k]);
            for (int i = 0; i <= k; ++i) {
                hess(i, k) = basis[i].dot(w);
                w -= hess(i, k) * basis[i];
            }
            const double wnorm = w.norm();
            hess(k + 1, k) = wnorm;
            for (int i = 0; i < k; ++i) {
                const double t = cs[i] * hess(i, k) + sn[i] * hess(i + 1, k);
                hess(i + 1, k) = -sn[i] * hess(i, k) + cs[i] * hess(i + 1, k);
                hess(i, k) = t;
            }
            const double denom = std::hypot(hess(k, k), hess(k + 1, k));
            cs[k] = hess(k, k) / denom;
            sn[k] = hess(k + 1, k) / denom;
            hess(k, k) = denom;
            hess(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            rel = std::abs(g[k + 1]) / bnorm;
            if (rel <= tol || wnorm <= 1e-300) {
                ++k;
                ++total;
                break;
            }
            basis.push_back(w / wnorm);
        }
        const Vec y = hess.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        for (int i = 0; i < k; ++i) x += y[i] * basis[i];
        if (rel <= tol) break;
    }
    return (b - apply(x)).norm() / bnorm;
}

Profile positive_power(const Profile& v, double p) {
    Profile out(v.grid());
    for (std::size_t j = 0; j < v.size(); ++j) out[j] = v[j] > 0.0 ? std::pow(v[j], p) : 0.0;
    return out;
}

void check_inputs(const GroundState& ground, double eps, const PerturbationWeight& weight) {
    if (ground.params.lambda != 0.0)
        throw std::invalid_argument("perturbation analysis requires the ground state at lambda = 0");
    if (!ground.converged) throw std::invalid_argument("ground state is not converged");
    require_same_grid(ground.grid, weight.kappa.grid());
    if (!std::isfinite(eps)) throw std::invalid_argument("eps must be finite");
    if (std::abs(eps) * weight.sup_norm > 0.5) {
        std::ostringstream msg;
        msg << "|eps| sup|k| = " << std::abs(eps) * weight.sup_norm << " exceeds 0.5";
        throw std::invalid_argument(msg.str());
    }
}

// The bordered system at a fixed dilation.
class Bordered {
public:
    Bordered(const GroundState& ground, double eps, const PerturbationWeight& weight, double t_log)
        : params_(ground.params),
          op_(ground.grid, ground.params, 0, 0.0),
          v_(dilated_ground(ground, t_log)),
          e_(derivative(v_)),
          ae_(op_.apply(e_)),
          coef_(ground.grid),
          n_(ground.grid.size()),
          h_(ground.grid.spacing()) {
        const Profile k = weight.full();
        for (int j = 0; j < n_; ++j) coef_[j] = 1.0 + eps * k[j];
        scale1_ = sup_norm(positive_power(v_, params_.q - 1.0));
        scale2_ = std::sqrt(inner(ae_, ae_));
    }

    const Profile& base() const { return v_; }
    const Profile& tangent_form() const { return ae_; }
    double constraint_scale() const { return scale2_; }

    // F1 and F2 at (eta, gamma) packed in one vector.
    Vec residual(const Vec& x) const {
        Profile u = unknown_profile(x);
        u += v_;
        const Profile au = op_.apply(u);
        Vec f(n_ + 1);
        double pair = 0.0;
        for (int j = 0; j < n_; ++j) {
            const double nl = u[j] > 0.0 ? coef_[j] * std::pow(u[j], params_.q - 1.0) : 0.0;
            f[j] = au[j] - nl + x[n_] * ae_[j];
            pair += ae_[j] * x[j];
        }
        f[n_] = h_ * pair;
        return f;
    }

    double norm(const Vec& f) const {
        return std::max(f.head(n_).lpNorm<Eigen::Infinity>() / scale1_, std::abs(f[n_]) / scale2_);
    }

    // Jacobian at x, preconditioned on the left by diag(Lambda_0^{-1}, 1/scale2).
    void linearize(const Vec& x) {
        diag_ = Profile(v_.grid());
        for (int j = 0; j < n_; ++j) {
            const double u = v_[j] + x[j];
            diag_[j] = u > 0.0 ? (params_.q - 1.0) * coef_[j] * std::pow(u, params_.q - 2.0) : 0.0;
        }
    }

    Vec apply_jacobian(const Vec& d) const {
        const Profile dp = unknown_profile(d);
        Profile r(v_.grid());
        for (int j = 0; j < n_; ++j) r[j] = -diag_[j] * dp[j] + d[n_] * ae_[j];
        r = op_.invert(r);
        Vec out(n_ + 1);
        double pair = 0.0;
        for (int j = 0; j < n_; ++j) {
            out[j] = dp[j] + r[j];
            pair += ae_[j] * dp[j];
        }
        out[n_] = h_ * pair / scale2_;
        return out;
    }

    Vec precondition(const Vec& f) const {
        const Profile r = op_.invert(unknown_profile(f));
        Vec out(n_ + 1);
        for (int j = 0; j < n_; ++j) out[j] = r[j];
        out[n_] = f[n_] / scale2_;
        return out;
    }

    Profile unknown_profile(const Vec& x) const {
        return Profile(v_.grid(), std::vector<double>(x.data(), x.data() + n_));
    }

private:
    ProblemParams params_;
    SectorMultiplier op_;
    Profile v_, e_, ae_, coef_;
    Profile diag_{v_.grid()};
    int n_;
    double h_;
    double scale1_ = 1.0, scale2_ = 1.0;
};

double envelope(const Profile& v, const Profile& kappa, const ProblemParams& params) {
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j)
        if (v[j] > 0.0) s += std::abs(kappa[j]) * std::pow(v[j], params.q);
    s *= params.sphere_measure * v.grid().spacing();
    return std::pow(s, (params.q - 1.0) / params.q);
}

bool is_positive(const Profile& u) {
    const double top = sup_norm(u);
    const double low = *std::min_element(u.values().begin(), u.values().end());
    return top > 0.0 && low >= -kPositivityFloor * top;
}

}  // namespace

Profile PerturbationWeight::full() const {
    Profile k = kappa;
    for (double& x : k.data()) x += gauge;
    return k;
}

PerturbationWeight make_weight(const Profile& raw, double limit_tol) {
    double top = 0.0;
    for (double x : raw.values()) {
        if (!std::isfinite(x)) throw std::invalid_argument("weight samples must be finite");
        top = std::max(top, std::abs(x));
    }
    const double at_zero = raw[raw.size() - 1];  // zeta -> +infinity
    const double at_infinity = raw[0];
    if (std::abs(at_zero - at_infinity) > limit_tol * std::max(1.0, top)) {
        std::ostringstream msg;
        msg << "weight limits differ: k(0) ~ " << at_zero << ", k(infinity) ~ " << at_infinity;
        throw std::invalid_argument(msg.str());
    }
    PerturbationWeight w{raw, 0.5 * (at_zero + at_infinity), top};
    for (double& x : w.kappa.data()) x -= w.gauge;
    w.limit_zero = w.kappa[w.kappa.size() - 1];
    w.limit_infinity = w.kappa[0];
    return w;
}

PerturbationWeight gaussian_weight(const EFGrid& grid, double center, double width, double height,
                                   double base) {
    if (!(width > 0.0) || !std::isfinite(center) || !std::isfinite(height) || !std::isfinite(base))
        throw std::invalid_argument("gaussian weight needs finite parameters and width > 0");
    return make_weight(Profile::from_function(grid, [=](double z) {
        const double x = (z - center) / width;
        return base + height * std::exp(-0.5 * x * x);
    }));
}

PerturbationWeight constant_weight(const EFGrid& grid, double c) {
    return make_weight(Profile::from_function(grid, [c](double) { return c; }));
}

Profile dilated_ground(const GroundState& ground, double t_log) {
    return translate(ground.v, -t_log);
}

Profile ReducedPoint::solution(const GroundState& ground) const {
    Profile u = dilated_ground(ground, t_log);
    u += eta;
    return u;
}

ReducedPoint solve_reduced_point(const GroundState& ground, double eps,
                                 const PerturbationWeight& weight, double t_log,
                                 const PerturbOptions& options, const ReducedPoint* start) {
    check_inputs(ground, eps, weight);
    if (!std::isfinite(t_log)) throw std::invalid_argument("t_log must be finite");
    if (!(options.tol > 0.0)) throw std::invalid_argument("Newton tolerance must be positive");
    const int n = ground.grid.size();
    Bordered sys(ground, eps, weight, t_log);

    Vec x = Vec::Zero(n + 1);
    if (start && eps != 0.0) {
        require_same_grid(ground.grid, start->eta.grid());
        for (int j = 0; j < n; ++j) x[j] = start->eta[j];
        x[n] = start->gamma;
    }

    Vec f = sys.residual(x);
    double r = sys.norm(f);
    int steps = 0;
    // F(0, t; 0, 0) = 0: the unperturbed point needs no correction.
    if (eps != 0.0) {
        while (r > options.tol) {
            if (steps >= options.max_newton) {
                std::ostringstream msg;
                msg << "Newton did not converge in " << options.max_newton
                    << " steps at t_log = " << t_log << " (residual " << r << ")";
                throw ConvergenceError(msg.str(), r);
            }
            sys.linearize(x);
            Vec d = Vec::Zero(n + 1);
            gmres([&sys](const Vec& y) { return sys.apply_jacobian(y); }, -sys.precondition(f), d,
                  options.krylov_tol, options.krylov_restart, options.krylov_max_iter);
            double damping = 1.0;
            Vec trial;
            Vec ft;
            double rt = std::numeric_limits<double>::infinity();
            for (int halving = 0; halving <= 12; ++halving, damping *= 0.5) {
                trial = x + damping * d;
                ft = sys.residual(trial);
                rt = sys.norm(ft);
                if (std::isfinite(rt) && rt < r) break;
            }
            ++steps;
            if (!(rt < r)) {
                std::ostringstream msg;
                msg << "Newton stagnated at t_log = " << t_log << " (residual " << r << ")";
                throw ConvergenceError(msg.str(), r);
            }
            x = std::move(trial);
            f = std::move(ft);
            r = rt;
        }
    }

    ReducedPoint out(t_log, sys.unknown_profile(x));
    out.gamma = x[n];
    out.residual = r;
    out.newton_steps = steps;
    out.converged = r <= options.tol || eps == 0.0;
    const SectorMultiplier op(ground.grid, ground.params, 0, 0.0);
    out.eta_norm = std::sqrt(std::max(0.0, ground.params.sphere_measure * op.quadratic_form(out.eta, out.eta)));
    out.constraint = inner(sys.tangent_form(), out.eta) / sys.constraint_scale();
    out.envelope = envelope(sys.base(), weight.kappa, ground.params);
    Profile u = sys.base();
    u += out.eta;
    out.positive = is_positive(u);
    out.energy = energy_e_eps(u, eps, weight.full(), ground.params);
    return out;
}

std::vector<double> t_log_range(double lo, double hi, int count) {
    if (count < 2 || !(hi > lo)) throw std::invalid_argument("t_log range needs lo < hi and count >= 2");
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = lo + (hi - lo) * i / (count - 1);
    return out;
}

ReducedCurve reduced_curve(const GroundState& ground, double eps, const PerturbationWeight& weight,
                           const std::vector<double>& t_log_grid, const PerturbOptions& options) {
    check_inputs(ground, eps, weight);
    if (t_log_grid.size() < 3) throw std::invalid_argument("reduced curve needs at least 3 points");
    if (!std::is_sorted(t_log_grid.begin(), t_log_grid.end()) ||
        std::adjacent_find(t_log_grid.begin(), t_log_grid.end()) != t_log_grid.end())
        throw std::invalid_argument("t_log grid must be strictly increasing");

    ReducedCurve curve;
    curve.eps = eps;
    const double q = ground.params.q;
    const double scale = std::pow(1.0 + eps * weight.gauge, -1.0 / (q - 2.0));
    curve.reference_energy =
        energy_e_eps(scale * ground.v, eps, constant_weight(ground.grid, weight.gauge).full(),
                     ground.params);

    const ReducedPoint* previous = nullptr;
    for (double t : t_log_grid) {
        std::optional<ReducedPoint> p;
        try {
            p = solve_reduced_point(ground, eps, weight, t, options, previous);
        } catch (const ConvergenceError&) {
            try {
                p = solve_reduced_point(ground, eps, weight, t, options, nullptr);
            } catch (const ConvergenceError& e) {
                p.emplace(t, Profile(ground.grid));
                p->energy = p->gamma = std::nan("");
                p->residual = e.last_residual();
                p->error = e.what();
            }
        }
        curve.points.push_back(std::move(*p));
        previous = curve.points.back().converged ? &curve.points.back() : nullptr;
    }

    const auto& pts = curve.points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        if (pts[i].converged && pts[i + 1].converged)
            curve.total_variation += std::abs(pts[i + 1].energy - pts[i].energy);
    curve.degenerate = curve.total_variation < 100.0 * options.tol;
    if (curve.degenerate) return curve;

    const double noise = 100.0 * options.tol;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        if (!pts[i - 1].converged || !pts[i].converged || !pts[i + 1].converged) continue;
        const double d1 = pts[i].energy - pts[i - 1].energy;
        const double d2 = pts[i + 1].energy - pts[i].energy;
        if (std::max(std::abs(d1), std::abs(d2)) <= noise) continue;
        if (d1 > 0.0 && d2 < 0.0)
            curve.critical_points.push_back({pts[i].t_log, pts[i].energy, "max"});
        else if (d1 < 0.0 && d2 > 0.0)
            curve.critical_points.push_back({pts[i].t_log, pts[i].energy, "min"});
    }
    return curve;
}

double full_residual(const GroundState& ground, double eps, const PerturbationWeight& weight,
                     const Profile& u) {
    require_same_grid(ground.grid, u.grid());
    const SectorMultiplier op(ground.grid, ground.params, 0, 0.0);
    const Profile au = op.apply(u);
    const Profile k = weight.full();
    double diff = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double nl = u[j] > 0.0 ? (1.0 + eps * k[j]) * std::pow(u[j], ground.params.q - 1.0) : 0.0;
        diff = std::max(diff, std::abs(au[j] - nl));
        scale = std::max(scale, std::abs(nl));
    }
    return scale > 0.0 ? diff / scale : diff;
}

namespace {

struct Refiner {
    const GroundState& ground;
    double eps;
    const PerturbationWeight& weight;
    const PerturbOptions& options;
    ReducedPoint last;

    ReducedPoint at(double t) {
        last = solve_reduced_point(ground, eps, weight, t, options, &last);
        return last;
    }
};

}  // namespace

SolutionSearch find_solutions(const ReducedCurve& curve, const GroundState& ground, double eps,
                              const PerturbationWeight& weight, const PerturbOptions& options) {
    check_inputs(ground, eps, weight);
    SolutionSearch out;
    const double accept = 10.0 * options.tol;

    auto verify = [&](const ReducedPoint& p, const std::string& type, bool degenerate) {
        Profile u = p.solution(ground);
        const double residual = full_residual(ground, eps, weight, u);
        VerifiedSolution s{p.t_log, p.energy, p.gamma, residual, p.positive, degenerate, type,
                           std::move(u)};
        std::ostringstream why;
        why.precision(6);
        if (!(s.residual <= accept)) why << "full residual " << s.residual << " exceeds " << accept;
        else if (!(std::abs(s.gamma) <= accept)) why << "|gamma| = " << std::abs(s.gamma) << " exceeds " << accept;
        if (why.str().empty()) {
            out.solutions.push_back(std::move(s));
        } else {
            std::ostringstream msg;
            msg << "t_log = " << p.t_log << ": " << why.str();
            out.spurious.push_back(msg.str());
        }
    };

    if (curve.degenerate) {
        const ReducedPoint* best = nullptr;
        for (const auto& p : curve.points)
            if (p.converged && (!best || std::abs(p.t_log) < std::abs(best->t_log))) best = &p;
        if (best) verify(*best, "degenerate", true);
        return out;
    }

    for (const CriticalPoint& cp : curve.critical_points) {
        std::size_t i = 0;
        while (i < curve.points.size() && curve.points[i].t_log != cp.t_log) ++i;
        if (i == 0 || i + 1 >= curve.points.size()) continue;
        double a = curve.points[i - 1].t_log, b = curve.points[i + 1].t_log;
        const double sign = cp.type == "max" ? -1.0 : 1.0;  // minimize sign * phi
        Refiner ref{ground, eps, weight, options, curve.points[i]};
        try {
            const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
            double c = b - ratio * (b - a), d = a + ratio * (b - a);
            double fc = sign * ref.at(c).energy, fd = sign * ref.at(d).energy;
            while (b - a > 1e-4) {
                if (fc < fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - ratio * (b - a);
                    fc = sign * ref.at(c).energy;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + ratio * (b - a);
                    fd = sign * ref.at(d).energy;
                }
            }
            // gamma changes sign across the critical point; polish with Illinois regula falsi.
            ReducedPoint pa = ref.at(a), pb = ref.at(b);
            ReducedPoint best = std::abs(pa.gamma) < std::abs(pb.gamma) ? pa : pb;
            if ((pa.gamma > 0.0) != (pb.gamma > 0.0)) {
                double ga = pa.gamma, gb = pb.gamma;
                int side = 0;
                for (int it = 0; it < 100 && std::abs(best.gamma) > 0.1 * options.tol; ++it) {
                    const double t = (a * gb - b * ga) / (gb - ga);
                    const ReducedPoint p = ref.at(t);
                    if (std::abs(p.gamma) < std::abs(best.gamma)) best = p;
                    if ((p.gamma > 0.0) == (ga > 0.0)) {
                        a = t;
                        ga = p.gamma;
                        if (side == -1) gb *= 0.5;
                        side = -1;
                    } else {
                        b = t;
                        gb = p.gamma;
                        if (side == 1) ga *= 0.5;
                        side = 1;
                    }
                    if (b - a <= 1e-15 * (1.0 + std::abs(a))) break;
                }
            }
            verify(best, cp.type, false);
        } catch (const ConvergenceError& e) {
            std::ostringstream msg;
            msg << "t_log = " << cp.t_log << ": refinement failed (" << e.what() << ")";
            out.spurious.push_back(msg.str());
        }
    }
    return out;
}

}  // namespace frachs
