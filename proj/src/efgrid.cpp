#include "frachs/efgrid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "frachs/error.hpp"
#include "frachs/specfun.hpp"

namespace frachs {

// ---------------------------------------------------------------------------
// Parameters

ProblemParams make_params(int n, double s, double q, double lambda, bool allow_critical) {
    if (n < 2) throw std::invalid_argument("dimension n must be >= 2");
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("order s must lie in (0,1)");
    ProblemParams p;
    p.n = n;
    p.s = s;
    p.q = q;
    p.lambda = lambda;
    const double crit = p.critical_exponent();
    std::ostringstream msg;
    msg.precision(17);
    if (!std::isfinite(q) || q <= 2.0) {
        msg << "exponent q = " << q << " violates 2 < q < 2n/(n-2s) = " << crit;
        throw std::invalid_argument(msg.str());
    }
    // Within a few ulps of 2n/(n-2s) counts as the critical exponent.
    const bool at_critical = std::abs(q - crit) <= 8.0 * std::numeric_limits<double>::epsilon() * crit;
    if (at_critical && allow_critical) {
        p.q = crit;
        p.critical = true;
    } else if (q >= crit) {
        msg << "exponent q = " << q << " violates 2 < q < 2n/(n-2s) = " << crit
            << " (n = " << n << ", s = " << s << ")";
        throw std::invalid_argument(msg.str());
    }
    p.b = p.critical ? 0.0 : n / p.q - 0.5 * (n - 2.0 * s);
    p.hardy = hardy_constant(n, s);
    if (!std::isfinite(lambda) || lambda <= -p.hardy) {
        msg << "lambda = " << lambda << " must exceed -H_s = " << -p.hardy;
        throw std::invalid_argument(msg.str());
    }
    p.sphere_measure = sphere_measure(n);
    return p;
}

// ---------------------------------------------------------------------------
// FFT plans, shared per size; planning is serialized by a mutex.

struct FftPlans {
    int size = 0;
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;

    explicit FftPlans(int n) : size(n) {
        std::vector<double> real(n);
        std::vector<std::complex<double>> spec(n / 2 + 1);
        auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        r2c = fftw_plan_dft_r2c_1d(n, real.data(), cplx, flags);
        c2r = fftw_plan_dft_c2r_1d(n, cplx, real.data(), flags);
        if (!r2c || !c2r) throw std::runtime_error("FFTW planning failed");
    }
    ~FftPlans() {
        fftw_destroy_plan(r2c);
        fftw_destroy_plan(c2r);
    }
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;
};

namespace {

std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

std::shared_ptr<const FftPlans> plans_for(int n) {
    static std::map<int, std::shared_ptr<const FftPlans>> cache;
    std::lock_guard lock(fftw_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto plans = std::make_shared<const FftPlans>(n);
    cache.emplace(n, plans);
    return plans;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

// ---------------------------------------------------------------------------
// Grid

EFGrid::EFGrid(double half_length, int size) : half_length_(half_length), size_(size) {
    if (!(half_length >= 5.0) || !std::isfinite(half_length))
        throw std::invalid_argument("grid half-length L must be >= 5");
    if (size < 64 || !is_power_of_two(size))
        throw std::invalid_argument("grid size N must be a power of two >= 64");
    plans_ = plans_for(size);
}

EFGrid make_grid(double half_length, int size) { return EFGrid(half_length, size); }

double default_half_length(const ProblemParams& params) {
    return std::max(30.0, 60.0 / (params.n - 2.0 * params.s));
}

std::vector<double> EFGrid::nodes() const {
    std::vector<double> z(size_);
    for (int j = 0; j < size_; ++j) z[j] = node(j);
    return z;
}

double EFGrid::frequency(int k) const { return std::numbers::pi * k / half_length_; }

std::vector<double> EFGrid::frequencies() const {
    std::vector<double> t(size_);
    for (int m = -size_ / 2; m < size_ / 2; ++m) t[m + size_ / 2] = frequency(m);
    return t;
}

std::vector<std::complex<double>> EFGrid::forward(std::span<const double> values) const {
    if (static_cast<int>(values.size()) != size_)
        throw std::invalid_argument("forward transform: length mismatch");
    std::vector<double> in(values.begin(), values.end());
    std::vector<std::complex<double>> out(spectrum_size());
    fftw_execute_dft_r2c(plans_->r2c, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

std::vector<double> EFGrid::inverse(std::span<const std::complex<double>> coeffs) const {
    if (static_cast<int>(coeffs.size()) != spectrum_size())
        throw std::invalid_argument("inverse transform: length mismatch");
    // c2r overwrites its input.
    std::vector<std::complex<double>> in(coeffs.begin(), coeffs.end());
    std::vector<double> out(size_);
    fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(in.data()), out.data());
    const double scale = 1.0 / size_;
    for (double& x : out) x *= scale;
    return out;
}

void require_same_grid(const EFGrid& a, const EFGrid& b) {
    if (!(a == b)) throw std::invalid_argument("profiles live on different grids");
}

// ---------------------------------------------------------------------------
// Profile

Profile::Profile(EFGrid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

Profile::Profile(EFGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != grid_.size())
        throw std::invalid_argument("profile length does not match grid size");
    for (double x : values_)
        if (!std::isfinite(x)) throw std::invalid_argument("profile contains non-finite values");
}

Profile Profile::from_function(const EFGrid& grid, const std::function<double(double)>& f) {
    std::vector<double> v(grid.size());
    for (int j = 0; j < grid.size(); ++j) v[j] = f(grid.node(j));
    return Profile(grid, std::move(v));
}

Profile& Profile::operator+=(const Profile& other) {
    require_same_grid(grid_, other.grid_);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += other.values_[j];
    return *this;
}

Profile& Profile::operator-=(const Profile& other) {
    require_same_grid(grid_, other.grid_);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= other.values_[j];
    return *this;
}

Profile& Profile::operator*=(double c) {
    for (double& x : values_) x *= c;
    return *this;
}

Profile operator+(Profile a, const Profile& b) { return a += b; }
Profile operator-(Profile a, const Profile& b) { return a -= b; }
Profile operator*(double c, Profile a) { return a *= c; }

double inner(const Profile& f, const Profile& g) {
    require_same_grid(f.grid(), g.grid());
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) acc += f[j] * g[j];
    return acc * f.grid().spacing();
}

double sup_norm(std::span<const double> f) {
    double m = 0.0;
    for (double x : f) m = std::max(m, std::abs(x));
    return m;
}

double sup_norm(const Profile& f) { return sup_norm(f.values()); }

// ---------------------------------------------------------------------------
// Sector multipliers

namespace {

using SymbolKey = std::tuple<double, int, int, double, int>;

std::shared_ptr<const std::vector<double>> symbol_table(const EFGrid& grid, int n, double s,
                                                        int ell) {
    static std::mutex mutex;
    static std::map<SymbolKey, std::shared_ptr<const std::vector<double>>> cache;
    const SymbolKey key{grid.half_length(), grid.size(), n, s, ell};
    {
        std::lock_guard lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto table = std::make_shared<std::vector<double>>(grid.spectrum_size());
    for (int k = 0; k < grid.spectrum_size(); ++k)
        (*table)[k] = sector_symbol_unchecked(ell, grid.frequency(k), n, s);
    std::lock_guard lock(mutex);
    return cache.emplace(key, std::move(table)).first->second;
}

Profile multiply_spectrum(const Profile& f, std::span<const double> factors) {
    const EFGrid& grid = f.grid();
    auto coeffs = grid.forward(f.values());
    for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] *= factors[k];
    return Profile(grid, grid.inverse(coeffs));
}

}  // namespace

SectorMultiplier::SectorMultiplier(const EFGrid& grid, const ProblemParams& params, int ell,
                                   double shift)
    : grid_(grid), ell_(ell), shift_(shift) {
    if (ell < 0) throw std::invalid_argument("harmonic degree ell must be >= 0");
    symbol_ = symbol_table(grid, params.n, params.s, ell);
    values_.resize(symbol_->size());
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] = (*symbol_)[k] + shift;
}

double SectorMultiplier::min_value() const {
    return *std::min_element(values_.begin(), values_.end());
}

Profile SectorMultiplier::apply(const Profile& f) const {
    require_same_grid(grid_, f.grid());
    return multiply_spectrum(f, values_);
}

Profile SectorMultiplier::invert(const Profile& rhs) const {
    require_same_grid(grid_, rhs.grid());
    if (min_value() <= 0.0) {
        std::ostringstream msg;
        msg << "sector multiplier (ell = " << ell_ << ", shift = " << shift_
            << ") has nonpositive value " << min_value();
        throw SingularOperatorError(msg.str());
    }
    std::vector<double> recip(values_.size());
    for (std::size_t k = 0; k < recip.size(); ++k) recip[k] = 1.0 / values_[k];
    return multiply_spectrum(rhs, recip);
}

Profile SectorMultiplier::apply_power(const Profile& f, double power) const {
    require_same_grid(grid_, f.grid());
    if (power == 1.0) return apply(f);
    if (min_value() <= 0.0)
        throw SingularOperatorError("fractional power of a nonpositive sector multiplier");
    std::vector<double> factors(values_.size());
    for (std::size_t k = 0; k < factors.size(); ++k) factors[k] = std::pow(values_[k], power);
    return multiply_spectrum(f, factors);
}

std::vector<double> SectorMultiplier::circulant_column(double power) const {
    Profile unit(grid_);
    unit[0] = 1.0;
    return apply_power(unit, power).data();
}

double SectorMultiplier::quadratic_form(const Profile& f, const Profile& g) const {
    return inner(f, apply(g));
}

Profile apply_multiplier(const EFGrid& grid, int ell, const ProblemParams& params,
                         const Profile& f, double shift) {
    require_same_grid(grid, f.grid());
    return SectorMultiplier(grid, params, ell, shift).apply(f);
}

Profile invert_multiplier(const EFGrid& grid, int ell, const ProblemParams& params,
                          const Profile& rhs, double shift) {
    require_same_grid(grid, rhs.grid());
    return SectorMultiplier(grid, params, ell, shift).invert(rhs);
}

// ---------------------------------------------------------------------------
// Reflection, quadrature, spectral calculus

Profile kelvin_reflect(const Profile& f) {
    const EFGrid& grid = f.grid();
    std::vector<double> g(f.size());
    for (int j = 0; j < grid.size(); ++j) g[j] = f[grid.mirror(j)];
    return Profile(grid, std::move(g));
}

Profile symmetrize_even(const Profile& f) {
    const EFGrid& grid = f.grid();
    std::vector<double> g(f.size());
    for (int j = 0; j < grid.size(); ++j) g[j] = 0.5 * (f[j] + f[grid.mirror(j)]);
    return Profile(grid, std::move(g));
}

bool is_even(const Profile& f, double tol) {
    const EFGrid& grid = f.grid();
    for (int j = 0; j < grid.size(); ++j)
        if (std::abs(f[j] - f[grid.mirror(j)]) > tol) return false;
    return true;
}

double weighted_integral(const Profile& f, double p, const ProblemParams& params) {
    if (!(p >= 1.0)) throw std::invalid_argument("weighted_integral: p must be >= 1");
    double acc = 0.0;
    for (double x : f.values()) acc += std::pow(std::abs(x), p);
    return params.sphere_measure * f.grid().spacing() * acc;
}

Profile derivative(const Profile& f) {
    const EFGrid& grid = f.grid();
    auto coeffs = grid.forward(f.values());
    const int nyquist = grid.size() / 2;
    for (int k = 0; k < grid.spectrum_size(); ++k)
        coeffs[k] *= (k == nyquist) ? std::complex<double>{} : std::complex<double>{0.0, grid.frequency(k)};
    return Profile(grid, grid.inverse(coeffs));
}

Profile translate(const Profile& f, double delta) {
    const EFGrid& grid = f.grid();
    if (delta == 0.0) return f;
    auto coeffs = grid.forward(f.values());
    const int nyquist = grid.size() / 2;
    for (int k = 0; k < grid.spectrum_size(); ++k) {
        const double phase = -grid.frequency(k) * delta;
        if (k == nyquist)
            coeffs[k] *= std::cos(phase);
        else
            coeffs[k] *= std::complex<double>{std::cos(phase), std::sin(phase)};
    }
    return Profile(grid, grid.inverse(coeffs));
}

// ---------------------------------------------------------------------------
// Log-radial transform pair

std::vector<double> radii(const EFGrid& grid) {
    std::vector<double> r(grid.size());
    for (int j = 0; j < grid.size(); ++j) r[j] = std::exp(-grid.node(j));
    return r;
}

Profile radial_to_profile(const ProblemParams& params, const EFGrid& grid,
                          std::span<const double> radial_values) {
    if (static_cast<int>(radial_values.size()) != grid.size())
        throw std::invalid_argument("radial samples: length does not match grid");
    const double a = params.decay_exponent();
    std::vector<double> v(grid.size());
    // r^{(n-2s)/2} = e^{-a zeta}
    for (int j = 0; j < grid.size(); ++j) v[j] = std::exp(-a * grid.node(j)) * radial_values[j];
    return Profile(grid, std::move(v));
}

Profile radial_to_profile(const ProblemParams& params, const EFGrid& grid,
                          std::span<const double> r, std::span<const double> radial_values) {
    if (static_cast<int>(r.size()) != grid.size())
        throw std::invalid_argument("radii: length does not match grid");
    for (int j = 0; j < grid.size(); ++j) {
        if (!(r[j] > 0.0)) throw std::invalid_argument("radial samples need positive radii");
        const double expected = std::exp(-grid.node(j));
        if (std::abs(r[j] - expected) > 1e-12 * expected)
            throw std::invalid_argument("radii must be the grid radii e^{-zeta_j}");
    }
    return radial_to_profile(params, grid, radial_values);
}

std::vector<double> profile_to_radial(const ProblemParams& params, const Profile& v) {
    const EFGrid& grid = v.grid();
    const double a = params.decay_exponent();
    std::vector<double> z(grid.size());
    for (int j = 0; j < grid.size(); ++j) z[j] = std::exp(a * grid.node(j)) * v[j];
    return z;
}

}  // namespace frachs
