#pragma once

#include <optional>
#include <string>
#include <vector>

#include "frachs/groundstate.hpp"

namespace frachs {

/// Lowest eigenpairs of (Lambda_ell(D) + lambda) f = mu v^{q-2} f.
struct SectorSpectrum {
    int ell = 0;
    long multiplicity = 1;          ///< dimension of degree-ell harmonics (metadata)
    double q = 0.0;
    std::vector<double> eigenvalues;  ///< ascending
    std::vector<Profile> eigenfunctions;  ///< h sum w f_i f_j = delta_ij
    Profile weight;                 ///< v_+^{q-2}
    double gap_to_qminus1 = 0.0;    ///< mu_3 - (q-1) for ell = 0, mu_1 - (q-1) otherwise
    double rayleigh_defect = 0.0;   ///< max |Rayleigh(f_i) - mu_i| / mu_i
};

/// The m smallest eigenvalues, from the largest eigenvalues 1/mu of the
/// sector Green operator K = A^{-1/2} W A^{-1/2}.
/// Throws std::invalid_argument for m outside [1, N/4] and EigensolverError
/// when the Lanczos iteration fails.
SectorSpectrum sector_spectrum(const GroundState& ground, int ell, int m);

struct SectorSummary {
    int ell = 0;
    long multiplicity = 1;
    std::vector<double> eigenvalues;
    double gap_to_qminus1 = 0.0;
    double margin = 0.0;  ///< mu_next/(q-1) - 1
};

struct NondegeneracyReport {
    bool passed = false;
    std::vector<std::string> failures;
    double mu1 = 0.0, mu2 = 0.0, mu3 = 0.0;
    bool mu2_simple = false;
    bool mu2_odd = false;
    double kappa = 0.0;        ///< 1 - (q-1)/mu_3
    double min_margin = 0.0;   ///< min over sectors of mu_next/(q-1) - 1
    std::vector<SectorSummary> sectors;
};

inline constexpr double kMu1Tolerance = 1e-5;
inline constexpr double kMu2Tolerance = 1e-4;

/// Checks mu_1 = 1 and a simple mu_2 = q-1 with odd eigenfunction in ell = 0,
/// and mu > q-1 in every sector 1 <= ell <= ell_max. Failures are collected,
/// not thrown.
NondegeneracyReport nondegeneracy_report(const GroundState& ground, int ell_max, int m);

struct ScanRow {
    double lambda = 0.0;
    double best_constant = 0.0;
    double nu1 = 0.0;        ///< first ell = 1 eigenvalue
    double indicator = 0.0;  ///< nu1 - (q-1)
    bool converged = false;
    std::string error;
};

struct ThresholdEstimate {
    double lambda_star = 0.0;
    double indicator = 0.0;
    double bracket_lo = 0.0, bracket_hi = 0.0;
    int bisection_steps = 0;
};

struct ScanResult {
    std::vector<ScanRow> rows;
    std::optional<ThresholdEstimate> threshold;
};

struct ScanOptions {
    double ground_tol = 1e-10;
    int max_iter = 4000;
    double threshold_tol = 1e-6;  ///< |nu1(lambda*) - (q-1)| target
    int max_bisection = 80;
    int threads = 0;              ///< 0: FRACHS_THREADS or hardware concurrency
};

/// Solves the radial ground state and the first ell = 1 eigenvalue at every
/// lambda. A sign change of the indicator is bisected to a threshold estimate.
ScanResult stability_scan(const ProblemParams& base, const std::vector<double>& lambdas,
                          const EFGrid& grid, const ScanOptions& options = {});

/// Worker count for parallel scans: FRACHS_THREADS if set, else hardware concurrency.
int default_thread_count();

}  // namespace frachs
