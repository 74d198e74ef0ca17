#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "frachs/groundstate.hpp"

namespace frachs::test {

// The reference configuration used throughout: (n, s, q) = (3, 0.75, 3).
inline const GroundState& reference_ground(int N = 2048, double L = 30.0) {
    static GroundState g2048 = solve_ground(make_params(3, 0.75, 3.0), make_grid(30.0, 2048));
    if (N == 2048 && L == 30.0) return g2048;
    static GroundState g4096 = solve_ground(make_params(3, 0.75, 3.0), make_grid(30.0, 4096));
    return g4096;
}

inline Profile random_profile(const EFGrid& grid, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    Profile f(grid);
    for (double& x : f.data()) x = nd(rng);
    return f;
}

// Smooth localized random profile: a sum of a few gaussians.
inline Profile random_bumps(const EFGrid& grid, unsigned seed, int count = 4) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> centre(-6.0, 6.0), width(0.5, 3.0), amp(-1.0, 1.0);
    std::vector<double> c(count), w(count), a(count);
    for (int i = 0; i < count; ++i) {
        c[i] = centre(rng);
        w[i] = width(rng);
        a[i] = amp(rng);
    }
    return Profile::from_function(grid, [&](double z) {
        double s = 0.0;
        for (int i = 0; i < count; ++i) s += a[i] * std::exp(-std::pow((z - c[i]) / w[i], 2));
        return s;
    });
}

inline double cosine(const Profile& a, const Profile& b) {
    return inner(a, b) / std::sqrt(inner(a, a) * inner(b, b));
}

}  // namespace frachs::test
