#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "vedar/core.hpp"
#include "vedar/likelihood.hpp"
#include "vedar/memory.hpp"
#include "vedar/scaling.hpp"
#include "vedar/seasonality.hpp"
#include "vedar/smoothing.hpp"
#include "vedar/stats.hpp"

namespace vedar {

inline constexpr double kLogGuard = 1e-300;  // guards log10 of an underflowed density

// Rolling view of the likelihood stream: the recent-window ring for the
// scale-change baseline and exponentially weighted moments of successive
// differences for the empirical rule.
class LikelihoodTrack {
public:
    LikelihoodTrack(int window, double ew_lambda, int delta_warmup)
        : recent_(static_cast<std::size_t>(std::max(window, 2))),
          lambda_(ew_lambda),
          delta_warmup_(delta_warmup) {}

    std::optional<double> previous() const { return prev_; }
    bool window_full() const { return recent_.full(); }
    long deltas_seen() const { return deltas_; }

    double delta_sigma() const { return std::sqrt(std::max(dm2_ - dmu_ * dmu_, 0.0)); }

    // Decades between the current likelihood and the median of the oldest
    // half of the recent window. Positive = the likelihood fell.
    std::optional<double> log_drop(double lik) const {
        if (!recent_.full()) return std::nullopt;
        std::size_t half = recent_.capacity() / 2;
        std::vector<double> oldest;
        oldest.reserve(half);
        for (std::size_t i = 0; i < half; ++i) oldest.push_back(recent_[i]);
        double base = median(std::move(oldest));
        return std::log10(base + kLogGuard) - std::log10(lik + kLogGuard);
    }

    bool delta_warmed() const { return deltas_ >= delta_warmup_; }

    // Record the transition to `lik`. A delta that fired the empirical rule
    // is excluded so an anomaly cannot inflate its own threshold.
    void update(double lik, bool exclude_delta) {
        if (prev_ && !exclude_delta) {
            double d = lik - *prev_;
            if (deltas_ == 0) {
                dmu_ = d;
                dm2_ = d * d;
            } else {
                dmu_ = (1.0 - lambda_) * dmu_ + lambda_ * d;
                dm2_ = (1.0 - lambda_) * dm2_ + lambda_ * d * d;
            }
            ++deltas_;
        }
        prev_ = lik;
        recent_.push(lik);
    }

    // A model refit changes the density scale; the next delta is meaningless.
    void skip_next_delta() { skip_ = true; }
    bool consume_skip() {
        bool s = skip_;
        skip_ = false;
        return s;
    }

    void reset() {
        prev_.reset();
        dmu_ = dm2_ = 0.0;
        deltas_ = 0;
        recent_.clear();
        skip_ = false;
    }

private:
    RingBuffer recent_;
    double lambda_;
    int delta_warmup_;
    std::optional<double> prev_;
    double dmu_ = 0.0;
    double dm2_ = 0.0;
    long deltas_ = 0;
    bool skip_ = false;
};

// Rule (1): the likelihood moved away from the previous point's likelihood
// by more than sigma_multiplier standard deviations of typical differences.
inline bool empirical_rule(const LikelihoodTrack& track, double lik, double sigma_multiplier) {
    if (!track.previous() || !track.delta_warmed()) return false;
    return std::fabs(lik - *track.previous()) > sigma_multiplier * track.delta_sigma();
}

// Rule (2): the likelihood scale collapsed by at least `orders` decades
// relative to the recent baseline.
inline bool scale_change_rule(const LikelihoodTrack& track, double lik, double orders) {
    auto drop = track.log_drop(lik);
    return drop && *drop >= orders;
}

inline ChangeType classify(bool period_active, bool fired_empirical, bool fired_scale) {
    if (period_active) return ChangeType::SeasonalInterruption;
    if (fired_empirical) return ChangeType::Erratic;
    (void)fired_scale;
    return ChangeType::Linear;
}

// Same-type alert suppression; one physical event should not produce a
// train of point alerts (NAB windows count one detection each).
class CooldownFilter {
public:
    bool admit(long sample_index, ChangeType type, long cooldown_samples) {
        auto& last = last_[static_cast<std::size_t>(type)];
        if (last >= 0 && sample_index - last < cooldown_samples) return false;
        last = sample_index;
        return true;
    }

private:
    std::array<long, 3> last_{-1, -1, -1};
};

struct DetectorOutput {
    std::optional<ChangeAlert> alert;
    double likelihood{0.0};
    double smoothed_residual{0.0};
    double expected_raw{0.0};
    bool period_active{false};
    bool fired_empirical{false};
    bool fired_scale{false};
};

// The full six-layer pipeline for one stream. Strictly sequential; one
// instance per stream.
class Detector {
public:
    explicit Detector(DetectorConfig cfg = {})
        : cfg_(std::move(cfg)),
          scaler_(cfg_.scaling_factor, static_cast<std::size_t>(cfg_.history_samples()),
                  cfg_.recompute_interval_samples(), cfg_.warmup_points),
          seasonal_(static_cast<std::size_t>(cfg_.history_samples()),
                    cfg_.recompute_interval_samples(), cfg_.trend_span_samples(),
                    cfg_.seasonal_window_w, cfg_.min_period, cfg_.aperiodicity_threshold,
                    cfg_.period_override),
          smoother_(cfg_.pewma_alpha, cfg_.pewma_beta, cfg_.substitute_sigmas,
                    cfg_.kalman_q_fraction, cfg_.warmup_points),
          memory_(static_cast<std::size_t>(cfg_.history_samples()), cfg_.sample_budget,
                  cfg_.dbscan_min_pts, cfg_.dbscan_eps, cfg_.recompute_interval_samples(),
                  cfg_.warmup_points, cfg_.seed),
          track_(cfg_.linear_scale_window, cfg_.delta_ew_lambda, cfg_.delta_warmup),
          novelty_decay_(std::pow(0.5, 1.0 / static_cast<double>(cfg_.novelty_halflife))) {
        cfg_.validate();
    }

    const DetectorConfig& config() const { return cfg_; }
    long points_seen() const { return count_; }
    std::optional<int> period() const { return seasonal_.period(); }
    double scaling_factor() const { return scaler_.factor(); }
    const PeriodicityEstimate& periodicity() const { return seasonal_.estimate(); }

    DetectorOutput process_point(const TimedValue& p) {
        validate_point(prev_ts_, p);
        prev_ts_ = p.timestamp;
        ++count_;

        // layer 1a: scaling
        scaler_.observe(p.value);
        if (auto ratio = scaler_.maybe_recompute(count_)) rescale_state(*ratio);
        double x = scaler_.scale(p.value);

        // layer 1b: seasonality and trend
        auto decomp = seasonal_.deseasonalize(x);
        seasonal_.push(x);
        seasonal_.maybe_recompute(count_);

        // layer 2: two-stage smoothing
        auto sm = smoother_.process(decomp.residual, count_);

        // layer 3: memorization
        memory_.observe(sm.smoothed);
        if (memory_.maybe_rebuild(count_)) {
            refit_kde();
            track_.skip_next_delta();
        }

        DetectorOutput out;
        out.smoothed_residual = sm.smoothed;
        out.expected_raw = decomp.expected * scaler_.factor();
        out.period_active = seasonal_.period().has_value();

        if (!memory_.has_samples()) return out;

        // layer 4: likelihood under the memorized distribution
        kde_.support.assign(memory_.samples().begin(), memory_.samples().end());
        kde_.support.insert(kde_.support.end(), kde_buffer_.begin(), kde_buffer_.end());
        double lik = kde_likelihood(kde_, sm.smoothed);
        out.likelihood = lik;

        auto drop_now = track_.log_drop(lik);
        bool skip = track_.consume_skip();

        // layer 5: the two empirical rules
        double prior_lik = track_.previous().value_or(lik);
        bool fired_emp = false;
        bool fired_scale = false;
        if (track_.previous() && !skip) {
            fired_emp = empirical_rule(track_, lik, cfg_.sigma_multiplier);
            double effective_orders =
                std::max(cfg_.linear_scale_orders, cfg_.novelty_margin * drop_max_);
            fired_scale = scale_change_rule(track_, lik, effective_orders);
            if (drop_now)
                drop_max_ = std::max(std::min(*drop_now, cfg_.novelty_cap),
                                     drop_max_ * novelty_decay_);
        }
        track_.update(lik, fired_emp);
        out.fired_empirical = fired_emp;
        out.fired_scale = fired_scale;

        // buffer admission: suspicious points wait out the quarantine
        admit_to_buffer(sm.smoothed, drop_now);

        // layer 6: accountability
        if (count_ > cfg_.warmup_points && fired_scale) {
            ChangeType type = classify(out.period_active, fired_emp, fired_scale);
            long cooldown = std::max<long>(seasonal_.period().value_or(0) / 4, 50);
            bool admit = !cfg_.cooldown_enabled ||
                         ((last_emit_ < 0 || count_ - last_emit_ >= cfg_.event_guard) &&
                          cooldown_.admit(count_, type, cooldown));
            if (admit) {
                last_emit_ = count_;
                ChangeAlert alert;
                alert.timestamp = p.timestamp;
                alert.actual = p.value;
                alert.expected = out.expected_raw;
                alert.change_type = type;
                alert.likelihood = lik;
                alert.prior_likelihood = prior_lik;
                out.alert = alert;
            }
        }
        return out;
    }

    // Stored doubles across all rolling state; constant once every buffer
    // has filled, independent of stream length.
    std::size_t state_footprint() const {
        return seasonal_.history().size() + memory_.reservoir().size() +
               memory_.samples().size() + kde_buffer_.size() + pending_.size() +
               static_cast<std::size_t>(cfg_.linear_scale_window) +
               static_cast<std::size_t>(cfg_.warmup_points) +
               static_cast<std::size_t>(cfg_.history_samples());
    }

private:
    void refit_kde() {
        std::vector<double> support(memory_.samples());
        support.insert(support.end(), kde_buffer_.begin(), kde_buffer_.end());
        if (support.empty()) return;
        double bw;
        if (cfg_.kde_bandwidth.is_auto) {
            double sd = sample_stddev(support);
            double iqr = quantile(support, 0.75) - quantile(support, 0.25);
            double a = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
            if (a < 0.25 * sd) a = sd;  // dense-core supports make the IQR useless
            bw = a > 0.0 ? 0.9 * a * std::pow(static_cast<double>(support.size()), -0.2) : 0.0;
            auto [mn, mx] = std::minmax_element(support.begin(), support.end());
            bw = std::max(bw, 1e-6 * (*mx - *mn + 1e-12));
            // never resolve finer than the raw residual noise
            bw = std::max(bw, cfg_.bandwidth_noise_fraction * smoother_.raw_residual_sigma());
            bw = std::max(bw, 1e-12);
        } else {
            bw = cfg_.kde_bandwidth.value;
        }
        kde_.bandwidth = bw;
        kde_.norm = KdeNorm::Density;
    }

    void admit_to_buffer(double smoothed, std::optional<double> drop_now) {
        if (drop_now && *drop_now >= cfg_.quarantine_orders)
            pending_.push_back({smoothed, 0});
        else
            push_buffer(smoothed);
        std::size_t kept = 0;
        for (auto& ent : pending_) {
            ++ent.age;
            if (ent.age >= cfg_.quarantine_timeout)
                push_buffer(ent.value);
            else
                pending_[kept++] = ent;
        }
        pending_.resize(kept);
    }

    void push_buffer(double v) {
        kde_buffer_.push_back(v);
        while (kde_buffer_.size() > static_cast<std::size_t>(cfg_.kde_buffer_size))
            kde_buffer_.erase(kde_buffer_.begin());
    }

    void rescale_state(double m) {
        seasonal_.rescale(m);
        smoother_.rescale(m);
        memory_.rescale(m);
        for (double& v : kde_buffer_) v *= m;
        for (auto& ent : pending_) ent.value *= m;
        kde_.bandwidth *= m;
        track_.reset();
        drop_max_ = 0.0;
    }

    DetectorConfig cfg_;
    Scaler scaler_;
    SeasonalModel seasonal_;
    TwoStageSmoother smoother_;
    SampleMemory memory_;
    LikelihoodTrack track_;
    CooldownFilter cooldown_;
    KdeModel kde_{};

    struct Pending {
        double value;
        int age;
    };
    std::vector<double> kde_buffer_;
    std::vector<Pending> pending_;

    std::optional<Timestamp> prev_ts_;
    long count_ = 0;
    long last_emit_ = -1;
    double drop_max_ = 0.0;
    double novelty_decay_;
};

}  // namespace vedar
