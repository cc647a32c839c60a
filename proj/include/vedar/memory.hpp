#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "vedar/core.hpp"
#include "vedar/random.hpp"

namespace vedar {

inline constexpr int kNoise = -1;

struct ClusterLabeling {
    std::vector<int> labels;  // per input point: cluster id >= 0, or kNoise
    double eps{0.0};
    int min_pts{0};
    int cluster_count{0};
};

// DBSCAN specialized to one dimension: sort, mark core points with a
// two-pointer neighbor count, then sweep left-to-right. A point joins the
// open cluster only if it is within eps of the cluster's nearest core
// point, which keeps border points from bridging two separate clusters.
inline ClusterLabeling dbscan_1d(const std::vector<double>& points, double eps, int min_pts) {
    if (points.empty()) throw std::invalid_argument("dbscan_1d on empty input");
    if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
    if (min_pts < 1) throw std::invalid_argument("min_pts must be >= 1");

    std::size_t n = points.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = points[order[i]];

    std::vector<bool> core(n, false);
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (s[i] - s[lo] > eps) ++lo;
        while (hi + 1 < n && s[hi + 1] - s[i] <= eps) ++hi;
        core[i] = (hi - lo + 1) >= static_cast<std::size_t>(min_pts);
    }

    std::vector<int> slabel(n, kNoise);
    int next_id = 0;
    std::size_t i = 0;
    while (i < n) {
        if (!core[i]) {
            ++i;
            continue;
        }
        int cid = next_id++;
        slabel[i] = cid;
        double reach = s[i];  // rightmost core point adopted into this cluster
        std::size_t j = i;
        while (j + 1 < n && s[j + 1] - reach <= eps) {
            slabel[j + 1] = cid;
            if (core[j + 1]) reach = s[j + 1];
            ++j;
        }
        i = j + 1;
    }
    // border points to the left of a cluster's first core point
    for (std::size_t k = n; k-- > 1;) {
        if (slabel[k - 1] == kNoise && slabel[k] != kNoise && core[k] && s[k] - s[k - 1] <= eps)
            slabel[k - 1] = slabel[k];
    }

    ClusterLabeling out;
    out.labels.assign(n, kNoise);
    for (std::size_t k = 0; k < n; ++k) out.labels[order[k]] = slabel[k];
    out.eps = eps;
    out.min_pts = min_pts;
    out.cluster_count = next_id;
    return out;
}

// Epsilon from the knee of the sorted min_pts-NN distance curve (largest
// distance to the chord between the curve's endpoints). Floor of 1e-9 keeps
// duplicate-heavy data from collapsing eps to zero.
inline double auto_eps(const std::vector<double>& points, int min_pts) {
    std::size_t n = points.size();
    if (n < static_cast<std::size_t>(min_pts) + 1)
        throw std::invalid_argument("auto_eps needs at least min_pts + 1 points");
    std::vector<double> s(points);
    std::sort(s.begin(), s.end());
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(min_pts), n - 1);

    std::vector<double> kdist;
    kdist.reserve(n);
    std::vector<double> cand;
    for (std::size_t i = 0; i < n; ++i) {
        cand.clear();
        std::size_t lo = i >= k ? i - k : 0;
        std::size_t hi = std::min(n - 1, i + k);
        for (std::size_t j = lo; j <= hi; ++j)
            if (j != i) cand.push_back(std::fabs(s[j] - s[i]));
        std::sort(cand.begin(), cand.end());
        kdist.push_back(cand[std::min(k - 1, cand.size() - 1)]);
    }
    std::sort(kdist.begin(), kdist.end());

    double x1 = static_cast<double>(kdist.size() - 1);
    double y0 = kdist.front(), y1 = kdist.back();
    double norm = std::hypot(x1, y1 - y0);
    if (norm < 1e-30) return std::max(kdist.back(), 1e-9);
    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < kdist.size(); ++i) {
        double d = std::fabs((y1 - y0) * static_cast<double>(i) - x1 * (kdist[i] - y0)) / norm;
        if (d > best) {
            best = d;
            best_i = i;
        }
    }
    return std::max(kdist[best_i], 1e-9);
}

// Layer 3: a reservoir of smoothed residuals, periodically clustered; the
// representative sample excludes DBSCAN noise so one-off anomalies are not
// memorized as normal behavior. All-noise reservoirs fall back to a uniform
// sample.
class SampleMemory {
public:
    SampleMemory(std::size_t reservoir_capacity, int sample_budget, int min_pts,
                 AutoValue eps_config, int rebuild_interval, int warmup_points,
                 std::uint64_t seed)
        : reservoir_(reservoir_capacity),
          budget_(sample_budget),
          min_pts_(min_pts),
          eps_config_(eps_config),
          rebuild_interval_(rebuild_interval),
          warmup_points_(warmup_points),
          rng_(seed) {}

    void observe(double smoothed) { reservoir_.push(smoothed); }

    bool has_samples() const { return !samples_.empty(); }
    const std::vector<double>& samples() const { return samples_; }
    const RingBuffer& reservoir() const { return reservoir_; }

    // Returns true when a rebuild ran at this point.
    bool maybe_rebuild(long points_seen) {
        if (reservoir_.empty() || points_seen < warmup_points_) return false;
        if (last_rebuild_ >= 0 && points_seen - last_rebuild_ < rebuild_interval_) return false;
        last_rebuild_ = points_seen;
        rebuild();
        return true;
    }

    void rebuild() {
        std::vector<double> pts = reservoir_.to_vector();
        if (pts.empty()) return;
        if (pts.size() <= static_cast<std::size_t>(min_pts_) + 1) {
            samples_ = pts;
            if (samples_.size() > static_cast<std::size_t>(budget_))
                samples_.resize(static_cast<std::size_t>(budget_));
            return;
        }
        double eps = eps_config_.is_auto ? auto_eps(pts, min_pts_) : eps_config_.value;
        ClusterLabeling labeling = dbscan_1d(pts, eps, min_pts_);

        std::vector<std::vector<double>> clusters(
            static_cast<std::size_t>(labeling.cluster_count));
        std::size_t clustered = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            int l = labeling.labels[i];
            if (l >= 0) {
                clusters[static_cast<std::size_t>(l)].push_back(pts[i]);
                ++clustered;
            }
        }
        samples_.clear();
        if (clustered == 0) {
            samples_ = sample_without_replacement(pts, static_cast<std::size_t>(budget_));
            return;
        }
        for (auto& c : clusters) {
            if (c.empty()) continue;
            double share = static_cast<double>(budget_) * static_cast<double>(c.size()) /
                           static_cast<double>(clustered);
            auto take = static_cast<std::size_t>(std::llround(share));
            take = std::max<std::size_t>(take, 1);
            take = std::min(take, c.size());
            auto drawn = sample_without_replacement(c, take);
            samples_.insert(samples_.end(), drawn.begin(), drawn.end());
        }
        if (samples_.size() > static_cast<std::size_t>(budget_))
            samples_.resize(static_cast<std::size_t>(budget_));
    }

    void rescale(double m) {
        reservoir_.scale_all(m);
        for (double& v : samples_) v *= m;
    }

private:
    std::vector<double> sample_without_replacement(std::vector<double> pool, std::size_t take) {
        take = std::min(take, pool.size());
        // partial Fisher-Yates
        for (std::size_t i = 0; i < take; ++i) {
            std::size_t j = i + rng_.next_index(pool.size() - i);
            std::swap(pool[i], pool[j]);
        }
        pool.resize(take);
        return pool;
    }

    RingBuffer reservoir_;
    int budget_;
    int min_pts_;
    AutoValue eps_config_;
    int rebuild_interval_;
    int warmup_points_;
    Rng rng_;
    std::vector<double> samples_;
    long last_rebuild_ = -1;
};

}  // namespace vedar
