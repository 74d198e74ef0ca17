#include "frachs/specfun.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace frachs {

namespace {

// Lanczos approximation, g = 7, nine terms.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoef = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

std::complex<double> lanczos_log_gamma(std::complex<double> z) {
    // Valid for Re z >= 1/2.
    const std::complex<double> zm1 = z - 1.0;
    std::complex<double> series = kLanczosCoef[0];
    for (std::size_t i = 1; i < kLanczosCoef.size(); ++i)
        series += kLanczosCoef[i] / (zm1 + static_cast<double>(i));
    const std::complex<double> t = zm1 + kLanczosG + 0.5;
    const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
    return half_log_two_pi + (zm1 + 0.5) * std::log(t) - t + std::log(series);
}

void check_params(int n, double s) {
    if (n < 2) throw std::invalid_argument("dimension n must be >= 2, got " + std::to_string(n));
    if (!(s > 0.0 && s < 1.0))
        throw std::invalid_argument("order s must lie in (0,1), got " + std::to_string(s));
}

}  // namespace

std::complex<double> log_gamma_complex(std::complex<double> z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("log_gamma_complex: non-finite argument");
    if (!(z.real() > 0.0))
        throw std::invalid_argument("log_gamma_complex: requires Re z > 0");
    if (z.real() < 0.5) return lanczos_log_gamma(z + 1.0) - std::log(z);
    return lanczos_log_gamma(z);
}

void validate(const SymbolQuery& query) {
    if (query.ell < 0)
        throw std::invalid_argument("harmonic degree ell must be >= 0, got " +
                                    std::to_string(query.ell));
    check_params(query.n, query.s);
    if (!std::isfinite(query.tau)) throw std::invalid_argument("frequency tau must be finite");
}

double sector_symbol_unchecked(int ell, double tau, int n, double s) {
    const std::complex<double> a{0.5 * (ell + 0.5 * n + s), 0.5 * std::abs(tau)};
    const std::complex<double> b{0.5 * (ell + 0.5 * n - s), 0.5 * std::abs(tau)};
    // |Gamma(z)|^2 = exp(2 Re log Gamma(z)).
    const double log_ratio = 2.0 * (log_gamma_complex(a).real() - log_gamma_complex(b).real());
    return std::exp(2.0 * s * std::numbers::ln2 + log_ratio);
}

double sector_symbol(const SymbolQuery& query) {
    validate(query);
    return sector_symbol_unchecked(query.ell, query.tau, query.n, query.s);
}

double hardy_constant(int n, double s) {
    check_params(n, s);
    const double la = std::lgamma(0.25 * (n + 2.0 * s));
    const double lb = std::lgamma(0.25 * (n - 2.0 * s));
    return std::exp(2.0 * s * std::numbers::ln2 + 2.0 * (la - lb));
}

double sphere_measure(int n) {
    if (n < 1) throw std::invalid_argument("sphere_measure: n must be >= 1");
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

long harmonic_multiplicity(int n, int ell) {
    if (n < 2 || ell < 0) throw std::invalid_argument("harmonic_multiplicity: bad arguments");
    if (n == 2) return ell == 0 ? 1 : 2;
    // C(ell+n-1, n-1) - C(ell+n-3, n-1)
    auto binom = [](long top, long k) -> long {
        if (top < k || k < 0) return 0;
        long r = 1;
        for (long i = 1; i <= k; ++i) r = r * (top - k + i) / i;
        return r;
    };
    return binom(ell + n - 1, n - 1) - binom(ell + n - 3, n - 1);
}

}  // namespace frachs
