#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "wcascade/rng.hpp"

namespace testsupport {

inline std::vector<double> normals(std::uint64_t seed, std::size_t n, double sd = 1.0) {
    wcascade::CounterRng rng(seed, 0x7e57);
    std::vector<double> v(n);
    for (auto& x : v) x = sd * rng.normal();
    return v;
}

inline std::vector<double> brownian(std::uint64_t seed, std::size_t n) {
    auto v = normals(seed, n);
    for (std::size_t i = 1; i < n; ++i) v[i] += v[i - 1];
    return v;
}

// Inverse-CDF draws, independent of the library's density code.
inline std::vector<double> cauchy_samples(std::uint64_t seed, std::size_t n, double s) {
    wcascade::CounterRng rng(seed, 0xca);
    std::vector<double> v(n);
    for (auto& x : v) x = s * std::tan(M_PI * (rng.uniform() - 0.5));
    return v;
}

// t with 2 degrees of freedom: F^{-1}(u) = (2u - 1) / sqrt(2 u (1 - u)).
inline std::vector<double> t2_samples(std::uint64_t seed, std::size_t n, double sigma) {
    wcascade::CounterRng rng(seed, 0x72);
    std::vector<double> v(n);
    for (auto& x : v) {
        const double u = rng.uniform();
        x = sigma * (2.0 * u - 1.0) / std::sqrt(2.0 * u * (1.0 - u));
    }
    return v;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace testsupport
