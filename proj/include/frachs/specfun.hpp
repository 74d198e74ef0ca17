#pragma once

// Special functions behind the sector multipliers of the fractional Laplacian.
//
// On functions |x|^{-(n-2s)/2 - i tau} Y_ell(x/|x|) the operator (-Delta)^s acts
// as multiplication by
//
//   Lambda_ell(tau) = 2^{2s} |Gamma(A)|^2 / |Gamma(B)|^2,
//   A = (ell + (n+2s)/2 + i tau)/2,   B = (ell + (n-2s)/2 + i tau)/2,
//
// times |x|^{-2s}. In log-radial variables this is a Fourier multiplier.

#include <complex>

namespace frachs {

/// log Gamma(z) for Re z > 0, principal branch.
/// Throws std::invalid_argument for non-finite input or Re z <= 0.
std::complex<double> log_gamma_complex(std::complex<double> z);

struct SymbolQuery {
    int ell = 0;
    double tau = 0.0;
    int n = 3;
    double s = 0.5;
};

/// Checks ell >= 0, n >= 2, 0 < s < 1 and a finite tau.
void validate(const SymbolQuery& query);

/// Lambda_ell(tau); strictly positive and even in tau.
double sector_symbol(const SymbolQuery& query);

/// Same as sector_symbol without re-validating; used by cached multipliers.
double sector_symbol_unchecked(int ell, double tau, int n, double s);

/// Fractional Hardy constant 2^{2s} Gamma^2((n+2s)/4) / Gamma^2((n-2s)/4).
double hardy_constant(int n, double s);

/// Area of the unit sphere S^{n-1}.
double sphere_measure(int n);

/// Dimension of the space of degree-ell spherical harmonics in R^n.
long harmonic_multiplicity(int n, int ell);

}  // namespace frachs
