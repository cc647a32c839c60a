#pragma once

#include <cmath>

#include "vedar/core.hpp"
#include "vedar/stats.hpp"

namespace vedar {

// Probabilistic EWMA. The weight on history shrinks for probable points and
// stays near alpha for improbable ones, so outliers barely move the mean.
// The second moment is maintained with the same effective weight.
struct PewmaState {
    double mu{0.0};
    double moment2{0.0};
    double alpha{0.97};
    double beta{0.5};
    long count{0};

    double sigma() const { return std::sqrt(std::max(moment2 - mu * mu, 0.0)); }

    // Probability of x under N(mu, sigma), normalized to [0,1] by the peak.
    double probability(double x) const {
        double s = sigma();
        if (s <= 0.0) return x == mu ? 1.0 : 0.0;
        double z = (x - mu) / s;
        return std::exp(-0.5 * z * z);
    }
};

inline PewmaState pewma_update(PewmaState state, double x, double p_t) {
    if (p_t < 0.0) p_t = 0.0;
    if (p_t > 1.0) p_t = 1.0;
    if (state.count == 0) {
        state.mu = x;
        state.moment2 = x * x;
        state.count = 1;
        return state;
    }
    double a_eff = state.alpha * (1.0 - state.beta * p_t);
    state.mu = a_eff * state.mu + (1.0 - a_eff) * x;
    state.moment2 = a_eff * state.moment2 + (1.0 - a_eff) * x * x;
    ++state.count;
    return state;
}

// Observations within k sigma of the local mean are replaced by the mean;
// anything farther out is a candidate behavior change and passes untouched.
inline double pewma_substitute(const PewmaState& state, double x, double k = 3.0) {
    double s = state.sigma();
    if (std::fabs(x - state.mu) < k * s) return state.mu;
    return x;
}

// Scalar Kalman filter, F = H = 1. Process noise q keeps the covariance from
// collapsing to zero, without which the filter stops tracking entirely.
struct KalmanState {
    double x_hat{0.0};
    double p_cov{0.0};
    double q{0.0};
    double r{1.0};
    bool initialized{false};
};

struct KalmanPrediction {
    double x_pred;
    double p_pred;
};

inline KalmanPrediction kalman_predict(const KalmanState& state) {
    return {state.x_hat, state.p_cov + state.q};
}

struct KalmanCorrection {
    KalmanState state;
    double x_smoothed;
};

inline KalmanCorrection kalman_correct(KalmanState state, const KalmanPrediction& pred, double z) {
    double s = pred.p_pred + state.r;
    if (s == 0.0) throw std::domain_error("zero innovation covariance");
    double gain = pred.p_pred / s;
    state.x_hat = pred.x_pred + gain * (z - pred.x_pred);
    state.p_cov = (1.0 - gain) * pred.p_pred;
    return {state, state.x_hat};
}

// Both smoothing stages wired together. Stage 1 substitutes small
// fluctuations with the PEWMA mean; stage 2 runs the Kalman cycle on the
// stage-1 output. The measurement noise r is calibrated once, from the
// variance of stage-1 outputs over the warmup window.
class TwoStageSmoother {
public:
    TwoStageSmoother(double alpha, double beta, double substitute_k, double q_fraction,
                     int calibration_window)
        : substitute_k_(substitute_k),
          q_fraction_(q_fraction),
          calibration_(static_cast<std::size_t>(std::max(calibration_window, 2))) {
        pewma_.alpha = alpha;
        pewma_.beta = beta;
        kalman_.r = 1.0;
        kalman_.q = q_fraction;
    }

    struct Result {
        double smoothed;
        double stage1;
        double p_t;
    };

    Result process(double residual, long points_seen) {
        double p_t;
        double stage1;
        if (pewma_.count == 0) {
            p_t = 1.0;
            stage1 = residual;
        } else {
            p_t = pewma_.probability(residual);
            stage1 = pewma_substitute(pewma_, residual, substitute_k_);
        }
        pewma_ = pewma_update(pewma_, residual, p_t);

        calibration_.push(stage1);
        double smoothed;
        if (!kalman_.initialized) {
            kalman_.x_hat = stage1;
            kalman_.p_cov = kalman_.r;
            kalman_.initialized = true;
            smoothed = stage1;
        } else {
            if (points_seen == static_cast<long>(calibration_.capacity())) {
                double var = sample_variance(calibration_.to_vector());
                kalman_.r = std::max(var, 1e-12);
                kalman_.q = q_fraction_ * kalman_.r;
            }
            auto corrected = kalman_correct(kalman_, kalman_predict(kalman_), stage1);
            kalman_ = corrected.state;
            smoothed = corrected.x_smoothed;
        }
        return {smoothed, stage1, p_t};
    }

    const PewmaState& pewma() const { return pewma_; }
    const KalmanState& kalman() const { return kalman_; }
    double raw_residual_sigma() const { return pewma_.sigma(); }

    void rescale(double m) {
        pewma_.mu *= m;
        pewma_.moment2 *= m * m;
        kalman_.x_hat *= m;
        kalman_.p_cov *= m * m;
        kalman_.r *= m * m;
        kalman_.q *= m * m;
        calibration_.scale_all(m);
    }

private:
    PewmaState pewma_{};
    KalmanState kalman_{};
    double substitute_k_;
    double q_fraction_;
    RingBuffer calibration_;
};

}  // namespace vedar
