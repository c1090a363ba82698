#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "erw/observables.hpp"

namespace erw {

struct HistogramSpec {
    double lo = 0.0;
    double hi = 1.0;
    int bins = 0;  // 0 disables the histogram

    bool operator==(const HistogramSpec&) const = default;
};

// Streaming aggregator: count, central moments to order 4, min/max, direct
// absolute-moment registers about a fixed center, optional fixed-bin
// histogram. merge() combines two aggregates; update() is exactly a merge
// with a singleton, so the two can never drift apart.
class MomentAccumulator {
public:
    MomentAccumulator() = default;

    MomentAccumulator(double center, std::vector<double> abs_orders,
                      HistogramSpec hist = HistogramSpec{})
        : center_(center), abs_orders_(std::move(abs_orders)), hist_(hist) {
        abs_sums_.resize(abs_orders_.size());
        if (hist_.bins > 0) {
            if (!(hist_.hi > hist_.lo))
                throw std::invalid_argument("accumulator: histogram needs hi > lo");
            hist_counts_.assign(static_cast<std::size_t>(hist_.bins) + 2, 0);
        }
    }

    void update(double x) {
        merge_moments(1, x, 0.0, 0.0, 0.0);
        min_ = std::min(min_, x);
        max_ = std::max(max_, x);
        for (std::size_t i = 0; i < abs_orders_.size(); ++i)
            abs_sums_[i].add(abs_power(std::abs(x - center_), abs_orders_[i]));
        if (hist_.bins > 0) ++hist_counts_[bin_index(x)];
    }

    // Pooled statistics. Requires identical center, orders and binning.
    void merge(const MomentAccumulator& other) {
        if (other.count_ == 0) return;
        if (center_ != other.center_ || abs_orders_ != other.abs_orders_ || hist_ != other.hist_)
            throw std::invalid_argument("accumulator: merge with mismatched configuration");
        if (count_ == 0) {
            *this = other;
            return;
        }
        merge_moments(other.count_, other.mean_, other.m2_, other.m3_, other.m4_);
        min_ = std::min(min_, other.min_);
        max_ = std::max(max_, other.max_);
        for (std::size_t i = 0; i < abs_sums_.size(); ++i) {
            abs_sums_[i].add(other.abs_sums_[i].sum);
            if (other.abs_sums_[i].comp != 0.0) abs_sums_[i].add(-other.abs_sums_[i].comp);
        }
        for (std::size_t i = 0; i < hist_counts_.size(); ++i)
            hist_counts_[i] += other.hist_counts_[i];
    }

    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }

    // Population variance (divides by count, not count - 1).
    double variance() const { return count_ == 0 ? 0.0 : m2_ / static_cast<double>(count_); }
    double central_moment(int order) const {
        if (count_ == 0) return 0.0;
        switch (order) {
            case 2: return m2_ / static_cast<double>(count_);
            case 3: return m3_ / static_cast<double>(count_);
            case 4: return m4_ / static_cast<double>(count_);
            default: throw std::invalid_argument("accumulator: central moments cover orders 2..4");
        }
    }

    double min() const { return min_; }
    double max() const { return max_; }
    double center() const { return center_; }
    const std::vector<double>& abs_orders() const { return abs_orders_; }

    // Mean of |x - center|^m for one of the configured orders.
    double abs_moment(double order) const {
        for (std::size_t i = 0; i < abs_orders_.size(); ++i)
            if (abs_orders_[i] == order)
                return count_ == 0 ? 0.0 : abs_sums_[i].value() / static_cast<double>(count_);
        throw std::invalid_argument("accumulator: order was not configured");
    }

    const HistogramSpec& histogram_spec() const { return hist_; }
    const std::vector<std::uint64_t>& histogram() const { return hist_counts_; }

private:
    static double abs_power(double t, double m) {
        if (m == 1.0) return t;
        if (m == 2.0) return t * t;
        if (m == 1.5) return t * std::sqrt(t);
        if (m == 3.0) return t * t * t;
        if (m == 4.0) return (t * t) * (t * t);
        return std::pow(t, m);
    }

    // Pairwise central-moment combination; with nb = 1 this is the classic
    // single-value update.
    void merge_moments(std::uint64_t nb, double mean_b, double m2b, double m3b, double m4b) {
        const auto na_u = count_;
        const double na = static_cast<double>(na_u);
        const double nbf = static_cast<double>(nb);
        const double n = na + nbf;
        const double delta = mean_b - mean_;
        const double delta_n = delta / n;
        const double m4 = m4_ + m4b +
                          delta * delta_n * delta_n * delta_n * na * nbf *
                              (na * na - na * nbf + nbf * nbf) +
                          6.0 * delta_n * delta_n * (na * na * m2b + nbf * nbf * m2_) +
                          4.0 * delta_n * (na * m3b - nbf * m3_);
        const double m3 = m3_ + m3b + delta * delta_n * delta_n * na * nbf * (na - nbf) +
                          3.0 * delta_n * (na * m2b - nbf * m2_);
        const double m2 = m2_ + m2b + delta * delta_n * na * nbf;
        mean_ += delta_n * nbf;
        m2_ = m2;
        m3_ = m3;
        m4_ = m4;
        count_ = na_u + nb;
    }

    std::size_t bin_index(double x) const {
        if (x < hist_.lo) return 0;
        if (x >= hist_.hi) return static_cast<std::size_t>(hist_.bins) + 1;
        const double frac = (x - hist_.lo) / (hist_.hi - hist_.lo);
        auto b = static_cast<std::size_t>(frac * hist_.bins);
        if (b >= static_cast<std::size_t>(hist_.bins)) b = static_cast<std::size_t>(hist_.bins) - 1;
        return b + 1;
    }

    double center_ = 0.0;
    std::vector<double> abs_orders_;
    HistogramSpec hist_;

    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double m3_ = 0.0;
    double m4_ = 0.0;
    double min_ = std::numeric_limits<double>::infinity();
    double max_ = -std::numeric_limits<double>::infinity();
    std::vector<KahanSum> abs_sums_;
    std::vector<std::uint64_t> hist_counts_;
};

// Binning used for fluctuation-statistic histograms: 101 uniform bins over
// +/- 5 limit standard deviations, with overflow bins on both ends.
inline HistogramSpec fluctuation_binning(int d) {
    const double sigma = std::sqrt(fluctuation_variance(d));
    return HistogramSpec{-5.0 * sigma, 5.0 * sigma, 101};
}

}  // namespace erw
