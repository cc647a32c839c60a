#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vedar {

// Epoch seconds, UTC. NAB data is second-resolution.
using Timestamp = std::int64_t;

struct TimedValue {
    Timestamp timestamp{0};
    double value{0.0};
};

enum class ChangeType { SeasonalInterruption, Erratic, Linear };

inline const char* to_string(ChangeType t) {
    switch (t) {
    case ChangeType::SeasonalInterruption: return "seasonal_interruption";
    case ChangeType::Erratic: return "erratic";
    case ChangeType::Linear: return "linear";
    }
    return "unknown";
}

// Accountability payload: what happened, what was expected instead, and the
// likelihood evidence behind the decision. Values are in raw input units.
struct ChangeAlert {
    Timestamp timestamp{0};
    double actual{0.0};
    double expected{0.0};
    ChangeType change_type{ChangeType::Erratic};
    double likelihood{0.0};
    double prior_likelihood{0.0};
};

struct StreamError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonMonotonicTimestamp : StreamError {
    using StreamError::StreamError;
};
struct NonFiniteValue : StreamError {
    using StreamError::StreamError;
};
struct MalformedRow : StreamError {
    MalformedRow(const std::string& msg, std::size_t line)
        : StreamError(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    std::size_t line_number;
};
struct MalformedWindows : StreamError {
    using StreamError::StreamError;
};

// Fixed-capacity FIFO over doubles, newest last. All rolling state in the
// pipeline sits on top of this, which is what keeps memory constant for
// arbitrarily long streams.
class RingBuffer {
public:
    explicit RingBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("RingBuffer capacity must be positive");
    }

    void push(double x) {
        if (!std::isfinite(x)) throw NonFiniteValue("RingBuffer rejects non-finite value");
        data_.push_back(x);
        if (data_.size() > capacity_) data_.pop_front();
    }

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return data_.empty(); }
    bool full() const { return data_.size() == capacity_; }

    double operator[](std::size_t i) const { return data_[i]; }
    double back() const { return data_.back(); }
    double front() const { return data_.front(); }

    void clear() { data_.clear(); }

    std::vector<double> to_vector() const { return {data_.begin(), data_.end()}; }

    template <class F>
    void for_each(F&& f) const {
        for (double v : data_) f(v);
    }

    // In-place multiply; used when the scaling factor is re-estimated.
    void scale_all(double m) {
        for (double& v : data_) v *= m;
    }

    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

private:
    std::size_t capacity_;
    std::deque<double> data_;
};

inline RingBuffer& ring_push(RingBuffer& buffer, double x) {
    buffer.push(x);
    return buffer;
}

// Ingest-side validation: strictly increasing timestamps, finite values.
inline TimedValue validate_point(std::optional<Timestamp> prev_ts, const TimedValue& p) {
    if (prev_ts && p.timestamp <= *prev_ts)
        throw NonMonotonicTimestamp("timestamp " + std::to_string(p.timestamp) +
                                    " does not advance past " + std::to_string(*prev_ts));
    if (!std::isfinite(p.value)) throw NonFiniteValue("non-finite value in stream");
    return p;
}

struct AutoValue {
    double value{0.0};
    bool is_auto{true};
    static AutoValue automatic() { return {0.0, true}; }
    static AutoValue explicit_value(double v) { return {v, false}; }
};

// Every knob the pipeline has. Defaults run all NAB streams unmodified.
struct DetectorConfig {
    AutoValue scaling_factor = AutoValue::automatic();
    int warmup_points = 300;
    int seasonal_window_w = 5;
    double pewma_alpha = 0.97;
    double pewma_beta = 0.5;
    double substitute_sigmas = 3.0;        // PEWMA substitution band
    AutoValue kde_bandwidth = AutoValue::automatic();
    AutoValue dbscan_eps = AutoValue::automatic();
    int dbscan_min_pts = 4;
    double sigma_multiplier = 3.0;         // empirical (three-sigma) rule
    double linear_scale_orders = 4.0;      // decades of likelihood drop
    int linear_scale_window = 20;
    int samples_per_day = 288;             // 5-minute sampling by default
    int periodicity_recompute_days = 1;
    int periodicity_history_days = 14;
    int trend_span_days = 1;
    int sample_budget = 500;
    int kde_buffer_size = 100;
    int min_period = 4;
    double aperiodicity_threshold = 0.3;
    double kalman_q_fraction = 0.125;      // process noise as a fraction of r
    double bandwidth_noise_fraction = 1.0; // floor on h, in units of raw residual sigma
    double delta_ew_lambda = 0.02;
    int delta_warmup = 30;
    double novelty_margin = 0.72;          // drop must beat margin * decayed max drop
    int novelty_halflife = 1200;           // samples
    double novelty_cap = 45.0;             // decades
    double quarantine_orders = 3.0;        // buffer admission gate
    int quarantine_timeout = 200;          // samples until a suspicious point is adopted
    int event_guard = 20;                  // samples between any two alerts
    bool cooldown_enabled = true;
    std::uint64_t seed = 1234;
    // Periodicity override: nullopt = auto-detect, 0 = force aperiodic, >0 = fixed.
    std::optional<int> period_override;

    int recompute_interval_samples() const { return periodicity_recompute_days * samples_per_day; }
    int history_samples() const { return periodicity_history_days * samples_per_day; }
    int trend_span_samples() const { return trend_span_days * samples_per_day; }

    void validate() const {
        if (warmup_points <= 0) throw std::invalid_argument("warmup_points must be positive");
        if (pewma_alpha <= 0.0 || pewma_alpha >= 1.0)
            throw std::invalid_argument("pewma_alpha must be in (0,1)");
        if (pewma_beta < 0.0 || pewma_beta > 1.0)
            throw std::invalid_argument("pewma_beta must be in [0,1]");
        if (!scaling_factor.is_auto && scaling_factor.value <= 0.0)
            throw std::invalid_argument("scaling factor must be positive");
        if (!kde_bandwidth.is_auto && kde_bandwidth.value <= 0.0)
            throw std::invalid_argument("kde bandwidth must be positive");
        if (dbscan_min_pts < 1) throw std::invalid_argument("dbscan_min_pts must be >= 1");
        if (sigma_multiplier <= 0.0) throw std::invalid_argument("sigma_multiplier must be positive");
        if (linear_scale_orders <= 0.0) throw std::invalid_argument("linear_scale_orders must be positive");
        if (linear_scale_window < 2) throw std::invalid_argument("linear_scale_window must be >= 2");
        if (samples_per_day < 1) throw std::invalid_argument("samples_per_day must be >= 1");
        if (sample_budget < 1) throw std::invalid_argument("sample_budget must be >= 1");
    }
};

}  // namespace vedar
