#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "vedar/core.hpp"

namespace vedar {

struct LagOutOfRange : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InsufficientHistory : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Squared-difference function of the frame against itself shifted by rho.
inline double yin_difference(std::span<const double> frame, int rho) {
    if (rho < 1 || static_cast<std::size_t>(rho) + 1 > frame.size())
        throw LagOutOfRange("yin lag " + std::to_string(rho) + " out of range");
    double acc = 0.0;
    std::size_t n = frame.size() - static_cast<std::size_t>(rho);
    for (std::size_t k = 0; k < n; ++k) {
        double d = frame[k] - frame[k + static_cast<std::size_t>(rho)];
        acc += d * d;
    }
    return acc;
}

// Cumulative-mean-normalized difference for lags 1..max_lag (index 0 unused,
// set to 1). Lags with a zero cumulative sum normalize to 1, so a constant
// frame has no trough and reads as aperiodic.
inline std::vector<double> yin_cmnd(std::span<const double> frame, int max_lag) {
    if (max_lag < 1) throw LagOutOfRange("max_lag must be >= 1");
    if (frame.size() < static_cast<std::size_t>(max_lag) + 1)
        throw LagOutOfRange("frame shorter than max_lag + 1");
    std::vector<double> out(static_cast<std::size_t>(max_lag) + 1, 1.0);
    double csum = 0.0;
    for (int rho = 1; rho <= max_lag; ++rho) {
        double d = yin_difference(frame, rho);
        csum += d;
        out[static_cast<std::size_t>(rho)] =
            csum == 0.0 ? 1.0 : d * static_cast<double>(rho) / csum;
    }
    return out;
}

struct PeriodicityEstimate {
    std::optional<int> period;   // samples; nullopt = aperiodic
    double trough_value{1.0};    // un-detrended D' at the chosen lag
    long computed_at{0};         // sample count when estimated
};

// Period detection: CMND over the most recent frame, linear de-trend of the
// correlation curve over the lag axis, then the deepest local minimum with a
// smallest-lag tie break. The un-detrended trough must clear the
// aperiodicity threshold for a period to be declared.
inline PeriodicityEstimate detect_period(std::span<const double> history, int min_lag = 4,
                                         double aperiodicity_threshold = 0.3,
                                         double tie_tol = 1e-6) {
    int max_lag = static_cast<int>(history.size() / 2);
    if (max_lag < min_lag + 2)
        throw InsufficientHistory("history supports no lags in [min_lag, max_lag]");
    std::span<const double> frame =
        history.subspan(history.size() - static_cast<std::size_t>(2 * max_lag));
    std::vector<double> dprime = yin_cmnd(frame, max_lag);

    // least-squares ramp over [min_lag, max_lag]
    int n = max_lag - min_lag + 1;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int lag = min_lag; lag <= max_lag; ++lag) {
        double y = dprime[static_cast<std::size_t>(lag)];
        sx += lag;
        sy += y;
        sxx += static_cast<double>(lag) * lag;
        sxy += lag * y;
    }
    double denom = n * sxx - sx * sx;
    double slope = denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / n;

    std::vector<double> detr(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int lag = min_lag + i;
        detr[static_cast<std::size_t>(i)] =
            dprime[static_cast<std::size_t>(lag)] - (intercept + slope * lag);
    }

    std::vector<int> minima;
    for (int i = 1; i + 1 < n; ++i) {
        if (detr[static_cast<std::size_t>(i)] <= detr[static_cast<std::size_t>(i - 1)] &&
            detr[static_cast<std::size_t>(i)] <= detr[static_cast<std::size_t>(i + 1)])
            minima.push_back(i);
    }
    if (minima.empty()) return {std::nullopt, 1.0, 0};

    double lowest = detr[static_cast<std::size_t>(minima.front())];
    for (int i : minima) lowest = std::min(lowest, detr[static_cast<std::size_t>(i)]);
    int pick = -1;
    for (int i : minima) {
        if (detr[static_cast<std::size_t>(i)] <= lowest + tie_tol) {
            pick = i;
            break;  // minima are in ascending lag order: first tie = smallest lag
        }
    }
    int lag = min_lag + pick;
    double trough = dprime[static_cast<std::size_t>(lag)];
    if (trough < aperiodicity_threshold) return {lag, trough, 0};
    return {std::nullopt, trough, 0};
}

// Layer 1b state: scaled-history ring, exponential trend level, and the
// current periodicity estimate with its recompute schedule.
class SeasonalModel {
public:
    SeasonalModel(std::size_t history_capacity, int recompute_interval, int trend_span,
                  int seasonal_window_w, int min_period, double aperiodicity_threshold,
                  std::optional<int> period_override)
        : history_(history_capacity),
          recompute_interval_(recompute_interval),
          trend_lambda_(2.0 / (static_cast<double>(trend_span) + 1.0)),
          window_w_(seasonal_window_w),
          min_period_(min_period),
          aperiodicity_threshold_(aperiodicity_threshold),
          period_override_(period_override) {
        if (period_override_ && *period_override_ > 0)
            estimate_.period = *period_override_;
    }

    std::optional<int> period() const { return estimate_.period; }
    const PeriodicityEstimate& estimate() const { return estimate_; }
    double trend_level() const { return trend_; }
    const RingBuffer& history() const { return history_; }

    struct Decomposition {
        double residual;
        double expected;
        bool seasonal_path;  // false = trend fallback
    };

    // Subtract the most similar observation in a window of size w around the
    // point one period back; fall back to the trend level when no period is
    // active or history is too short. Must be called before push().
    Decomposition deseasonalize(double x_scaled) {
        if (!initialized_) return {0.0, x_scaled, false};
        auto p = estimate_.period;
        int half = window_w_ / 2;
        if (p && history_.size() >= static_cast<std::size_t>(*p + half + 1)) {
            // history_[size] would be the incoming point; its seasonal twin
            // sits one period back from that position.
            long anchor = static_cast<long>(history_.size()) - *p;
            long lo = std::max<long>(0, anchor - half);
            long hi = std::min<long>(static_cast<long>(history_.size()) - 1, anchor + half);
            double best = history_[static_cast<std::size_t>(lo)];
            for (long i = lo + 1; i <= hi; ++i) {
                double cand = history_[static_cast<std::size_t>(i)];
                if (std::fabs(x_scaled - cand) < std::fabs(x_scaled - best)) best = cand;
            }
            return {x_scaled - best, best, true};
        }
        return {x_scaled - trend_, trend_, false};
    }

    void push(double x_scaled) {
        if (!initialized_) {
            trend_ = x_scaled;
            initialized_ = true;
        } else {
            trend_ = (1.0 - trend_lambda_) * trend_ + trend_lambda_ * x_scaled;
        }
        history_.push(x_scaled);
    }

    // Daily re-estimation over the trailing history (capped at two weeks by
    // the ring capacity). The first estimate happens once enough history for
    // a meaningful lag range exists.
    void maybe_recompute(long points_seen) {
        if (period_override_) return;  // fixed or forced-aperiodic
        bool due;
        if (last_recompute_ < 0)
            due = history_.size() >= 128;
        else
            due = points_seen - last_recompute_ >= recompute_interval_;
        if (!due) return;
        last_recompute_ = points_seen;
        if (history_.size() < 128) return;
        std::vector<double> h = history_.to_vector();
        estimate_ = detect_period(h, min_period_, aperiodicity_threshold_);
        estimate_.computed_at = points_seen;
    }

    void rescale(double m) {
        history_.scale_all(m);
        trend_ *= m;
    }

private:
    RingBuffer history_;
    int recompute_interval_;
    double trend_lambda_;
    int window_w_;
    int min_period_;
    double aperiodicity_threshold_;
    std::optional<int> period_override_;
    PeriodicityEstimate estimate_{};
    double trend_ = 0.0;
    bool initialized_ = false;
    long last_recompute_ = -1;
};

}  // namespace vedar
