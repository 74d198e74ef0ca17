#include "frachs/spectrum.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "frachs/error.hpp"
#include "frachs/specfun.hpp"

namespace frachs {

namespace {

// Flip the sign so the entry of largest magnitude is positive (first wins on ties).
void fix_sign(std::vector<double>& f) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < f.size(); ++j)
        if (std::abs(f[j]) > std::abs(f[arg])) arg = j;
    if (f[arg] < 0.0)
        for (double& x : f) x = -x;
}

using Vec = Eigen::VectorXd;

struct RitzPairs {
    std::vector<double> values;  // descending
    std::vector<Vec> vectors;    // unit Euclidean norm
};

// Top m eigenpairs of a symmetric positive operator by Lanczos with full
// reorthogonalization.
RitzPairs lanczos_top(const std::function<Vec(const Vec&)>& apply, int n, int m) {
    const int max_steps = std::min(n, std::max(8 * m + 80, 300));
    std::vector<Vec> basis;
    std::vector<double> alpha, beta;

    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vec x(n);
    for (int j = 0; j < n; ++j) x[j] = uni(rng);
    x.normalize();
    basis.push_back(x);

    RitzPairs out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small;
    bool done = false;
    for (int k = 0; k < max_steps && !done; ++k) {
        Vec w = apply(basis[k]);
        alpha.push_back(basis[k].dot(w));
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& b : basis) w -= b.dot(w) * b;
        const double bnorm = w.norm();
        const int size = k + 1;
        const bool breakdown = bnorm <= 1e-14 * std::abs(alpha[0]);
        if (size >= m && (size % 10 == 0 || breakdown || size == max_steps)) {
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(size, size);
            for (int i = 0; i < size; ++i) {
                t(i, i) = alpha[i];
                if (i + 1 < size) t(i, i + 1) = t(i + 1, i) = beta[i];
            }
            small.compute(t);
            const auto& theta = small.eigenvalues();
            const double scale = std::abs(theta[size - 1]);
            done = breakdown;
            if (!done) {
                done = true;
                for (int i = 0; i < m; ++i)
                    if (bnorm * std::abs(small.eigenvectors()(size - 1, size - 1 - i)) >
                        1e-14 * scale)
                        done = false;
            }
            if (done) {
                for (int i = 0; i < m; ++i) {
                    Vec y = Vec::Zero(n);
                    const auto s = small.eigenvectors().col(size - 1 - i);
                    for (int r = 0; r < size; ++r) y += s[r] * basis[r];
                    y.normalize();
                    out.values.push_back(theta[size - 1 - i]);
                    out.vectors.push_back(std::move(y));
                }
                return out;
            }
        }
        if (breakdown) break;
        beta.push_back(bnorm);
        basis.push_back(w / bnorm);
    }
    throw EigensolverError("Lanczos iteration did not converge");
}

}  // namespace

SectorSpectrum sector_spectrum(const GroundState& ground, int ell, int m) {
    const EFGrid& grid = ground.grid;
    const int n = grid.size();
    if (ell < 0) throw std::invalid_argument("sector_spectrum: ell must be >= 0");
    if (m < 1 || m > n / 4) throw std::invalid_argument("sector_spectrum: need 1 <= m <= N/4");
    const ProblemParams& params = ground.params;
    const double q = params.q;

    const SectorMultiplier op(grid, params, ell, params.lambda);
    if (op.min_value() <= 0.0)
        throw SingularOperatorError("sector operator is not positive; lambda too small");

    Profile weight(grid);
    for (int j = 0; j < n; ++j)
        weight[j] = ground.v[j] > 0.0 ? std::pow(ground.v[j], q - 2.0) : 0.0;

    auto half_inverse = [&](const Vec& y) {
        return op.apply_power(Profile(grid, std::vector<double>(y.data(), y.data() + n)), -0.5);
    };
    auto green = [&](const Vec& y) {
        Profile g = half_inverse(y);
        for (int j = 0; j < n; ++j) g[j] *= weight[j];
        g = op.apply_power(g, -0.5);
        return Vec(Eigen::Map<const Vec>(g.data().data(), n));
    };
    const RitzPairs ritz = lanczos_top(green, n, m);

    SectorSpectrum out{ell, harmonic_multiplicity(params.n, ell), q, {}, {}, weight};
    const double h = grid.spacing();
    for (int i = 0; i < m; ++i) {
        const double kappa = ritz.values[i];
        if (!(kappa > 0.0)) throw EigensolverError("nonpositive Green-operator eigenvalue");
        const double defect = (green(ritz.vectors[i]) - kappa * ritz.vectors[i]).norm();
        if (defect > 1e-10 * ritz.values[0]) {
            std::ostringstream msg;
            msg << "eigenpair " << i + 1 << " for ell = " << ell << " has residual " << defect;
            throw EigensolverError(msg.str());
        }
        Profile f = half_inverse(ritz.vectors[i]);
        f *= 1.0 / std::sqrt(kappa * h);
        fix_sign(f.data());
        const double mu = 1.0 / kappa;
        double wnorm = 0.0;
        for (int j = 0; j < n; ++j) wnorm += weight[j] * f[j] * f[j];
        const double rayleigh = op.quadratic_form(f, f) / (wnorm * h);
        out.rayleigh_defect = std::max(out.rayleigh_defect, std::abs(rayleigh - mu) / mu);
        out.eigenvalues.push_back(mu);
        out.eigenfunctions.push_back(std::move(f));
    }
    if (ell == 0)
        out.gap_to_qminus1 = m >= 3 ? out.eigenvalues[2] - (q - 1.0) : std::nan("");
    else
        out.gap_to_qminus1 = out.eigenvalues[0] - (q - 1.0);
    return out;
}

NondegeneracyReport nondegeneracy_report(const GroundState& ground, int ell_max, int m) {
    if (ell_max < 1) throw std::invalid_argument("nondegeneracy_report: ell_max must be >= 1");
    if (m < 3) throw std::invalid_argument("nondegeneracy_report: need m >= 3");
    const double q = ground.params.q;
    NondegeneracyReport report;
    auto fail = [&report](const std::string& msg) { report.failures.push_back(msg); };

    const SectorSpectrum radial = sector_spectrum(ground, 0, m);
    const auto& mu = radial.eigenvalues;
    report.mu1 = mu[0];
    report.mu2 = mu[1];
    report.mu3 = mu[2];
    int near_one = 0, near_q1 = 0;
    for (double x : mu) {
        if (std::abs(x - 1.0) <= kMu1Tolerance) ++near_one;
        if (std::abs(x - (q - 1.0)) <= kMu2Tolerance) ++near_q1;
    }
    std::ostringstream msg;
    msg.precision(12);
    if (near_one != 1) {
        msg << "ell=0: " << near_one << " eigenvalues within " << kMu1Tolerance
            << " of 1 (mu_1 = " << mu[0] << ")";
        fail(msg.str());
        msg.str("");
    }
    if (near_q1 != 1) {
        msg << "ell=0: " << near_q1 << " eigenvalues within " << kMu2Tolerance
            << " of q-1 (mu_2 = " << mu[1] << ")";
        fail(msg.str());
        msg.str("");
    }
    report.mu2_simple = (mu[1] - mu[0] > kMu2Tolerance) && (mu[2] - mu[1] > kMu2Tolerance);
    if (!report.mu2_simple) fail("ell=0: eigenvalue q-1 is not separated from its neighbours");
    {
        const Profile& f = radial.eigenfunctions[1];
        const Profile g = kelvin_reflect(f);
        double defect = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j) defect = std::max(defect, std::abs(f[j] + g[j]));
        report.mu2_odd = defect <= 1e-6 * sup_norm(f);
        if (!report.mu2_odd) fail("ell=0: second eigenfunction is not odd");
    }
    report.kappa = 1.0 - (q - 1.0) / mu[2];
    SectorSummary s0{0, radial.multiplicity, mu, radial.gap_to_qminus1, mu[2] / (q - 1.0) - 1.0};
    report.min_margin = s0.margin;
    report.sectors.push_back(std::move(s0));

    for (int ell = 1; ell <= ell_max; ++ell) {
        const SectorSpectrum sec = sector_spectrum(ground, ell, m);
        SectorSummary summary{ell, sec.multiplicity, sec.eigenvalues, sec.gap_to_qminus1,
                              sec.eigenvalues[0] / (q - 1.0) - 1.0};
        for (std::size_t i = 0; i < sec.eigenvalues.size(); ++i) {
            if (!(sec.eigenvalues[i] > q - 1.0 + kMu2Tolerance)) {
                msg << "ell=" << ell << ": eigenvalue #" << i + 1 << " = " << sec.eigenvalues[i]
                    << " does not exceed q-1 = " << q - 1.0;
                fail(msg.str());
                msg.str("");
            }
        }
        report.min_margin = std::min(report.min_margin, summary.margin);
        report.sectors.push_back(std::move(summary));
    }
    if (!(report.min_margin > 0.0)) fail("nonpositive spectral margin");
    report.passed = report.failures.empty();
    return report;
}

int default_thread_count() {
    if (const char* env = std::getenv("FRACHS_THREADS")) {
        const int t = std::atoi(env);
        if (t > 0) return t;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

ScanRow scan_point(const ProblemParams& base, double lambda, const EFGrid& grid,
                   const ScanOptions& options) {
    ScanRow row;
    row.lambda = lambda;
    try {
        const ProblemParams params = make_params(base.n, base.s, base.q, lambda, base.critical);
        GroundOptions go;
        go.tol = options.ground_tol;
        go.max_iter = options.max_iter;
        const GroundState ground = solve_ground(params, grid, go);
        const SectorSpectrum sec = sector_spectrum(ground, 1, 1);
        row.best_constant = ground.best_constant;
        row.nu1 = sec.eigenvalues[0];
        row.indicator = row.nu1 - (params.q - 1.0);
        row.converged = true;
    } catch (const std::exception& e) {
        row.error = e.what();
        row.best_constant = row.nu1 = row.indicator = std::nan("");
    }
    return row;
}

}  // namespace

ScanResult stability_scan(const ProblemParams& base, const std::vector<double>& lambdas,
                          const EFGrid& grid, const ScanOptions& options) {
    ScanResult result;
    result.rows.resize(lambdas.size());
    const int threads = std::clamp(options.threads > 0 ? options.threads : default_thread_count(), 1,
                                   std::max<int>(1, static_cast<int>(lambdas.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < lambdas.size(); i = next++)
            result.rows[i] = scan_point(base, lambdas[i], grid, options);
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    // First sign change between consecutive converged rows, in input order.
    for (std::size_t i = 0; i + 1 < result.rows.size(); ++i) {
        const ScanRow& a = result.rows[i];
        const ScanRow& b = result.rows[i + 1];
        if (!a.converged || !b.converged) continue;
        if ((a.indicator > 0.0) == (b.indicator > 0.0)) continue;

        ThresholdEstimate est;
        double lo = a.lambda, hi = b.lambda, flo = a.indicator;
        ScanRow best = std::abs(a.indicator) < std::abs(b.indicator) ? a : b;
        while (std::abs(best.indicator) > options.threshold_tol &&
               est.bisection_steps < options.max_bisection && std::abs(hi - lo) > 1e-14 * (1.0 + std::abs(lo))) {
            const double mid = 0.5 * (lo + hi);
            const ScanRow r = scan_point(base, mid, grid, options);
            ++est.bisection_steps;
            if (!r.converged) break;
            if (std::abs(r.indicator) < std::abs(best.indicator)) best = r;
            if ((r.indicator > 0.0) == (flo > 0.0)) {
                lo = mid;
                flo = r.indicator;
            } else {
                hi = mid;
            }
        }
        est.lambda_star = best.lambda;
        est.indicator = best.indicator;
        est.bracket_lo = std::min(lo, hi);
        est.bracket_hi = std::max(lo, hi);
        result.threshold = est;
        break;
    }
    return result;
}

}  // namespace frachs
