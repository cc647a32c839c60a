#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "vedar/core.hpp"
#include "vedar/stats.hpp"

namespace vedar {

struct EmptySupport : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class KdeNorm {
    Density,   // (1/Nh) sum of standard-normal kernels; integrates to 1
    PaperSum,  // bare kernel sum, no normalizer
};

// Silverman's rule over the support, floored so near-duplicate supports
// still yield a positive bandwidth.
inline double silverman_bandwidth(const std::vector<double>& support) {
    if (support.empty()) throw EmptySupport("bandwidth over empty support");
    double sd = sample_stddev(support);
    double iqr = quantile(support, 0.75) - quantile(support, 0.25);
    double a = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    double bw = a > 0.0 ? 0.9 * a * std::pow(static_cast<double>(support.size()), -0.2) : 0.0;
    auto [mn, mx] = std::minmax_element(support.begin(), support.end());
    double floor = 1e-6 * (*mx - *mn + 1e-12);
    return std::max({bw, floor, 1e-12});
}

struct KdeModel {
    std::vector<double> support;
    double bandwidth{1.0};
    KdeNorm norm{KdeNorm::Density};
};

inline KdeModel fit_kde(const std::vector<double>& memory_samples,
                        const std::vector<double>& buffer, AutoValue bandwidth,
                        KdeNorm norm = KdeNorm::Density) {
    KdeModel m;
    m.support.reserve(memory_samples.size() + buffer.size());
    m.support.insert(m.support.end(), memory_samples.begin(), memory_samples.end());
    m.support.insert(m.support.end(), buffer.begin(), buffer.end());
    if (m.support.empty()) throw EmptySupport("fit_kde with no support points");
    m.bandwidth = bandwidth.is_auto ? silverman_bandwidth(m.support) : bandwidth.value;
    m.norm = norm;
    return m;
}

inline double kde_likelihood(const KdeModel& model, double y) {
    const double h = model.bandwidth;
    double acc = 0.0;
    for (double x : model.support) {
        double z = (y - x) / h;
        acc += std::exp(-0.5 * z * z);
    }
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    if (model.norm == KdeNorm::PaperSum) return acc * inv_sqrt_2pi;
    return acc * inv_sqrt_2pi / (static_cast<double>(model.support.size()) * h);
}

}  // namespace vedar
