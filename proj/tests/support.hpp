#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "cavlab/geometry.hpp"

namespace testing {

inline constexpr double pi = std::numbers::pi;

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

inline double l2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double order(double coarse_error, double fine_error) { return std::log2(coarse_error / fine_error); }

/// Seeded uniform draws for hand-rolled property tests.
class Draw {
public:
    explicit Draw(std::uint64_t seed) : rng_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline cavlab::Grid squares_grid(double h) { return cavlab::Grid::make(0.25, 2.0, 0.25, 2.0, h); }

inline const cavlab::AxisRectangle kD1{0.5, 0.5, 1.0, 1.0};
inline const cavlab::AxisRectangle kD2{0.5, 0.5, 1.5, 1.5};

}  // namespace testing
