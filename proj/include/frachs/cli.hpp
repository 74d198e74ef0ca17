#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace frachs {

struct RunConfig {
    std::string command;  ///< symbol | ground | spectrum | stability-scan | perturb
    int n = 3;
    double s = 0.75;
    double q = 3.0;
    double lambda = 0.0;
    bool critical = false;
    std::optional<double> L;  ///< default_half_length when unset
    int N = 2048;
    double tol = 1e-10;
    int max_iter = 2000;

    int ell_max = 3;
    int m = 5;
    double tau_max = 10.0;  ///< symbol table range [0, tau_max]
    double tau_step = 0.1;

    std::vector<double> lambdas;  ///< empty: 25 points on [-0.9 H_s, 20]

    double eps = 0.01;
    std::string weight = "gaussian";  ///< "gaussian" or a CSV path (zeta,kappa)
    double weight_center = 0.0;
    double weight_width = 1.0;
    double weight_height = 1.0;
    double weight_base = 0.0;
    double t_log_min = -8.0;
    double t_log_max = 8.0;
    int t_log_count = 33;

    std::string out_dir = ".";

    bool operator==(const RunConfig&) const = default;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidConfig = 1;
inline constexpr int kExitNotConverged = 2;

/// Executes one subcommand, writes its artifacts under out_dir and prints a
/// one-line summary to out. Errors go to err; the return value is the exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Config echo as a JSON object keyed by long flag names.
std::string config_to_json(const RunConfig& config);
/// Inverse of config_to_json; accepts the "config" object of any summary.
/// Throws std::invalid_argument on unknown keys or wrong types.
RunConfig config_from_json(const std::string& json);

/// Parses argv (flags override a --config key=value file) and runs.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace frachs
