#pragma once

#include <cmath>
#include <cstdlib>
#include <vector>

#include "vedar/core.hpp"
#include "vedar/stats.hpp"

namespace vedar {

struct AutoFactorResult {
    double factor{1.0};
    bool all_zero{false};
};

// Data-driven normalization factor: the power of ten under the 95th
// percentile of |x|. A percentile resists the outliers we are trying to
// detect; the power of ten keeps scaled values readable. Never below 1.
inline AutoFactorResult auto_factor(const std::vector<double>& observations) {
    if (observations.empty()) return {1.0, true};
    std::vector<double> mags;
    mags.reserve(observations.size());
    bool any_nonzero = false;
    for (double v : observations) {
        double a = std::fabs(v);
        if (a != 0.0) any_nonzero = true;
        mags.push_back(a);
    }
    if (!any_nonzero) return {1.0, true};
    double p95 = quantile(std::move(mags), 0.95);
    if (p95 < 10.0) return {1.0, false};
    return {std::pow(10.0, std::floor(std::log10(p95))), false};
}

class Scaler {
public:
    Scaler(AutoValue factor_config, std::size_t observation_capacity, int recompute_interval,
           int warmup_points)
        : auto_mode_(factor_config.is_auto),
          factor_(factor_config.is_auto ? 1.0 : factor_config.value),
          observations_(observation_capacity),
          recompute_interval_(recompute_interval),
          warmup_points_(warmup_points) {}

    double factor() const { return factor_; }
    bool auto_mode() const { return auto_mode_; }

    double scale(double x) const { return x / factor_; }

    void observe(double raw) { observations_.push(raw); }

    // At recompute boundaries in auto mode, re-estimate the factor from the
    // raw-value buffer. Returns old/new when the factor changed so the
    // detector can rescale downstream state, nullopt otherwise.
    std::optional<double> maybe_recompute(long points_seen) {
        if (!auto_mode_ || points_seen < warmup_points_) return std::nullopt;
        if (last_recompute_ >= 0 && points_seen - last_recompute_ < recompute_interval_)
            return std::nullopt;
        last_recompute_ = points_seen;
        double next = auto_factor(observations_.to_vector()).factor;
        if (next == factor_) return std::nullopt;
        double ratio = factor_ / next;
        factor_ = next;
        return ratio;  // multiplier that maps old scaled values onto the new scale
    }

private:
    bool auto_mode_;
    double factor_;
    RingBuffer observations_;
    int recompute_interval_;
    int warmup_points_;
    long last_recompute_ = -1;
};

}  // namespace vedar
