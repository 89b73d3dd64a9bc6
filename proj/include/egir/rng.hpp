#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace egir {

/// Deterministic draws on top of mt19937_64. std::uniform_real_distribution
/// is implementation-defined, so seeded runs would not reproduce across
/// standard libraries; these do.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53; // [0, 1)
}

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

inline int64_t uniform_index(std::mt19937_64& rng, int64_t n) {
    return static_cast<int64_t>(uniform_unit(rng) * static_cast<double>(n));
}

/// Box-Muller standard normal.
inline double normal_unit(std::mt19937_64& rng) {
    double u1 = uniform_unit(rng);
    while (u1 <= 0.0) u1 = uniform_unit(rng);
    double u2 = uniform_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// In-place Fisher-Yates.
template <typename T>
void shuffle_indices(std::vector<T>& v, std::mt19937_64& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(uniform_index(rng, static_cast<int64_t>(i)));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace egir
