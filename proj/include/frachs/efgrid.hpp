#pragma once

// Log-radial (Emden-Fowler) workspace.
//
// A radial function u(r) on R^n is represented by
//   v(zeta) = e^{(2s-n) zeta / 2} u(e^{-zeta}),   r = e^{-zeta},
// which turns dilations u -> t^{(2s-n)/2} u(./t) into translations
// v -> v(. + ln t), and (-Delta)^s on the degree-ell harmonic sector into the
// Fourier multiplier Lambda_ell(D). The line is truncated to the periodic
// interval [-L, L) sampled at N points.

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace frachs {

struct ProblemParams {
    int n = 3;
    double s = 0.75;
    double q = 3.0;
    double b = 0.25;       ///< n/q - (n-2s)/2
    double lambda = 0.0;   ///< coefficient of the Hardy term |x|^{-2s} u
    double sphere_measure = 0.0;
    double hardy = 0.0;    ///< H_s, cached
    bool critical = false; ///< q == 2n/(n-2s) validation mode

    double critical_exponent() const { return 2.0 * n / (n - 2.0 * s); }
    /// (n-2s)/2, the decay rate of the ground state in log-radial variables.
    double decay_exponent() const { return 0.5 * (n - 2.0 * s); }
};

/// Validates and completes the parameter tuple. With allow_critical the upper
/// bound on q becomes inclusive (closed-form validation only).
/// Throws std::invalid_argument with the violated constraint spelled out.
ProblemParams make_params(int n, double s, double q, double lambda = 0.0,
                          bool allow_critical = false);

struct FftPlans;

class EFGrid {
public:
    EFGrid(double half_length, int size);

    double half_length() const { return half_length_; }
    int size() const { return size_; }
    double spacing() const { return 2.0 * half_length_ / size_; }
    double node(int j) const { return -half_length_ + spacing() * j; }
    std::vector<double> nodes() const;
    /// tau_k = pi k / L for the half spectrum k = 0..N/2.
    double frequency(int k) const;
    /// The full frequency set pi m / L, m = -N/2..N/2-1, ascending.
    std::vector<double> frequencies() const;
    int spectrum_size() const { return size_ / 2 + 1; }

    /// Unnormalized real-to-complex DFT, N/2+1 coefficients.
    std::vector<std::complex<double>> forward(std::span<const double> values) const;
    /// Inverse of forward (includes the 1/N factor).
    std::vector<double> inverse(std::span<const std::complex<double>> coeffs) const;

    /// Index of the node mirrored through zeta = 0 (periodic convention).
    int mirror(int j) const { return (size_ - j) % size_; }

    bool operator==(const EFGrid& other) const {
        return half_length_ == other.half_length_ && size_ == other.size_;
    }

private:
    double half_length_;
    int size_;
    std::shared_ptr<const FftPlans> plans_;
};

/// Requires N a power of two with N >= 64 and L >= 5.
EFGrid make_grid(double half_length, int size);

/// max(30, 60/(n-2s)): keeps e^{-(n-2s)L/2} far below solver tolerances.
double default_half_length(const ProblemParams& params);

class Profile {
public:
    explicit Profile(EFGrid grid);
    Profile(EFGrid grid, std::vector<double> values);

    static Profile from_function(const EFGrid& grid, const std::function<double(double)>& f);

    const EFGrid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::vector<double>& data() { return values_; }
    double operator[](std::size_t j) const { return values_[j]; }
    double& operator[](std::size_t j) { return values_[j]; }

    Profile& operator+=(const Profile& other);
    Profile& operator-=(const Profile& other);
    Profile& operator*=(double c);

private:
    EFGrid grid_;
    std::vector<double> values_;
};

Profile operator+(Profile a, const Profile& b);
Profile operator-(Profile a, const Profile& b);
Profile operator*(double c, Profile a);

/// h * sum f_j g_j, the trapezoid L^2(dzeta) pairing.
double inner(const Profile& f, const Profile& g);
double sup_norm(const Profile& f);
double sup_norm(std::span<const double> f);

/// Throws std::invalid_argument when the profiles live on different grids.
void require_same_grid(const EFGrid& a, const EFGrid& b);

/// Precomputed Lambda_ell(tau_k) + shift on the half spectrum of a grid.
class SectorMultiplier {
public:
    SectorMultiplier(const EFGrid& grid, const ProblemParams& params, int ell, double shift);

    const EFGrid& grid() const { return grid_; }
    int ell() const { return ell_; }
    double shift() const { return shift_; }
    std::span<const double> values() const { return values_; }
    double min_value() const;

    Profile apply(const Profile& f) const;
    /// Division by the symbol. Throws SingularOperatorError on a nonpositive entry.
    Profile invert(const Profile& rhs) const;
    /// Multiplication by (Lambda_ell + shift)^power; power < 0 needs a positive symbol.
    Profile apply_power(const Profile& f, double power) const;
    /// First column c of the circulant matrix: (A f)_j = sum_k c[(j-k) mod N] f_k.
    std::vector<double> circulant_column(double power = 1.0) const;
    /// h * sum f_j (A g)_j
    double quadratic_form(const Profile& f, const Profile& g) const;

private:
    EFGrid grid_;
    int ell_;
    double shift_;
    std::shared_ptr<const std::vector<double>> symbol_;  // shared per (grid, n, s, ell)
    std::vector<double> values_;
};

Profile apply_multiplier(const EFGrid& grid, int ell, const ProblemParams& params,
                         const Profile& f, double shift);
Profile invert_multiplier(const EFGrid& grid, int ell, const ProblemParams& params,
                          const Profile& rhs, double shift);

/// g(zeta_j) = f(-zeta_j); the s-Kelvin transform in log-radial variables.
Profile kelvin_reflect(const Profile& f);
/// (f + kelvin_reflect(f)) / 2, exactly even.
Profile symmetrize_even(const Profile& f);
bool is_even(const Profile& f, double tol = 0.0);

/// sphere_measure * h * sum |f_j|^p
double weighted_integral(const Profile& f, double p, const ProblemParams& params);

/// Spectral derivative d/dzeta (Nyquist mode dropped).
Profile derivative(const Profile& f);
/// g(zeta) = f(zeta - delta), by band-limited (spectral) interpolation.
Profile translate(const Profile& f, double delta);

/// Radii r_j = e^{-zeta_j} of the grid nodes.
std::vector<double> radii(const EFGrid& grid);
/// v_j = r_j^{(n-2s)/2} z(r_j), samples given at r_j = e^{-zeta_j}.
Profile radial_to_profile(const ProblemParams& params, const EFGrid& grid,
                          std::span<const double> radial_values);
/// Same with explicit radii; they must be positive and match e^{-zeta_j}.
Profile radial_to_profile(const ProblemParams& params, const EFGrid& grid,
                          std::span<const double> radii, std::span<const double> radial_values);
/// z(r_j) = r_j^{-(n-2s)/2} v_j
std::vector<double> profile_to_radial(const ProblemParams& params, const Profile& v);

}  // namespace frachs
