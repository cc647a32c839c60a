#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace vedar {

// Linear-interpolation quantile over a copy of the data (q in [0,1]).
inline double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("quantile of empty set");
    std::sort(xs.begin(), xs.end());
    if (xs.size() == 1) return xs[0];
    double pos = q * static_cast<double>(xs.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo >= xs.size() - 1) return xs.back();
    double frac = pos - static_cast<double>(lo);
    return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

inline double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

inline double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean of empty set");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

// Unbiased sample variance; zero for fewer than two points.
inline double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

inline double sample_stddev(const std::vector<double>& xs) {
    return std::sqrt(sample_variance(xs));
}

}  // namespace vedar
