#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace erw {

// Standard normal CDF via erfc; absolute error well under 1e-7.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Kolmogorov-Smirnov sup-distance between the sample ECDF and the centered
// normal law with the given variance.
inline double ks_statistic(std::vector<double> samples, double sigma2) {
    if (samples.size() < 100)
        throw std::invalid_argument("ks_statistic: needs at least 100 samples");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("ks_statistic: variance must be positive");
    std::sort(samples.begin(), samples.end());
    const double sigma = std::sqrt(sigma2);
    const auto n = static_cast<double>(samples.size());
    double dist = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = normal_cdf(samples[i] / sigma);
        const double lo = f - static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n - f;
        dist = std::max({dist, lo, hi});
    }
    return dist;
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double residual_stderr = 0.0;
    std::size_t points = 0;
};

// Ordinary least squares of log(value) on log(n). Rejects nonpositive
// values, which cannot appear in a genuine power law anyway.
inline SlopeFit estimate_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 5) throw std::invalid_argument("estimate_slope: needs at least 5 points");
    std::vector<double> xs, ys;
    xs.reserve(points.size());
    ys.reserve(points.size());
    for (const auto& [n, v] : points) {
        if (!(n > 0.0) || !(v > 0.0))
            throw std::invalid_argument("estimate_slope: nonpositive input cannot be fit");
        xs.push_back(std::log(n));
        ys.push_back(std::log(v));
    }
    const auto k = static_cast<double>(xs.size());
    double xbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xbar += xs[i];
        ybar += ys[i];
    }
    xbar /= k;
    ybar /= k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    if (sxx == 0.0) throw std::invalid_argument("estimate_slope: abscissae are all equal");
    SlopeFit fit;
    fit.points = xs.size();
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += r * r;
    }
    fit.residual_stderr = xs.size() > 2 ? std::sqrt(ss_res / (k - 2.0)) : 0.0;
    fit.slope_stderr = fit.residual_stderr / std::sqrt(sxx);
    return fit;
}

// Upper critical value of chi-square with df degrees of freedom via the
// Wilson-Hilferty cube approximation; good to a few percent for df >= 2.
inline double chi_square_critical(int df, double significance) {
    double z = 0.0;
    if (significance == 0.05)
        z = 1.64485362695147;
    else if (significance == 0.01)
        z = 2.32634787404084;
    else if (significance == 0.001)
        z = 3.09023230616781;
    else
        throw std::invalid_argument("chi_square_critical: supported levels are 0.05, 0.01, 0.001");
    const double k = df;
    const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    return k * t * t * t;
}

// Pearson statistic against given expected counts (all positive).
inline double chi_square_statistic(const std::vector<double>& observed,
                                   const std::vector<double>& expected) {
    if (observed.size() != expected.size() || observed.empty())
        throw std::invalid_argument("chi_square_statistic: size mismatch");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (!(expected[i] > 0.0))
            throw std::invalid_argument("chi_square_statistic: expected counts must be positive");
        const double diff = observed[i] - expected[i];
        stat += diff * diff / expected[i];
    }
    return stat;
}

}  // namespace erw
