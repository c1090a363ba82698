#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "erw/io.hpp"
#include "erw/observables.hpp"
#include "erw/stats.hpp"

namespace erw {

struct FitReport {
    bool fitted = false;
    SlopeFit fit;
    double theoretical = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool asserted = true;  // false = reported for information only
};

struct AnalysisReport {
    int d = 0;
    double p_effective = 0.0;
    std::string regime;
    std::uint64_t burn_in = 0;
    bool p_excluded = false;   // p = 1 has no rate theory; nothing is fitted
    bool critical_log_caveat = false;

    FitReport moment_m1;  // decay of E|speed - (d-2)/d|
    FitReport moment_m2;  // informational: the m = 2 bound carries a log factor
    FitReport urn_dev;    // decay of E|N_n(a)/n - 1/d|, from summary results

    bool ks_computed = false;
    double ks_distance = 0.0;
    std::uint64_t ks_samples = 0;
    double ks_sigma2 = 0.0;
    double ks_threshold = 0.0;
    bool ks_pass = false;

    bool all_pass = false;
};

// Expected log-log slope of E|Delta_n/n - (d-2)/d|^m: the reciprocal scale
// r_n^-1 raised to the m-th power.
inline double theoretical_slope(double p, int d, double m) { return -m * rate_exponent(p, d); }

inline double slope_tolerance_for(Regime regime) {
    return regime == Regime::Supercritical ? 0.07 : 0.05;
}

inline double ks_threshold_for(std::uint64_t samples) {
    return std::max(0.02, 2.0 / std::sqrt(static_cast<double>(samples)));
}

namespace detail {

inline FitReport fit_against(const std::vector<std::pair<double, double>>& pts, double theoretical,
                             double tolerance, bool asserted) {
    FitReport rep;
    rep.theoretical = theoretical;
    rep.tolerance = tolerance;
    rep.asserted = asserted;
    if (pts.size() < 5)
        throw std::invalid_argument("analyze: only " + std::to_string(pts.size()) +
                                    " usable checkpoints past burn-in; need 5 to fit");
    rep.fit = estimate_slope(pts);
    rep.fitted = true;
    rep.pass = std::abs(rep.fit.slope - theoretical) <= tolerance;
    return rep;
}

}  // namespace detail

// Builds the diagnostics for one finished run: moment-decay exponents vs the
// r_n prediction, and normality of the fluctuation statistic. fluct_samples
// may be empty (KS is skipped).
inline AnalysisReport analyze_checkpoints(const std::vector<CheckpointCsvRow>& rows,
                                          const std::vector<double>& urn_dev_means, double p_eff,
                                          int d, std::uint64_t burn_in,
                                          const std::vector<double>& fluct_samples) {
    AnalysisReport rep;
    rep.d = d;
    rep.p_effective = p_eff;
    rep.burn_in = burn_in;
    if (p_eff >= 1.0) {
        rep.p_excluded = true;
        rep.regime = "degenerate";
        return rep;
    }
    const Regime regime = classify_regime(p_eff, d);
    rep.regime = regime_name(regime);
    rep.critical_log_caveat = regime == Regime::Critical;
    const double tol = slope_tolerance_for(regime);

    std::vector<std::pair<double, double>> m1_pts, m2_pts, urn_pts;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].n < burn_in) continue;
        const auto x = static_cast<double>(rows[i].n);
        if (rows[i].abs_m1 > 0.0) m1_pts.emplace_back(x, rows[i].abs_m1);
        if (rows[i].abs_m2 > 0.0) m2_pts.emplace_back(x, rows[i].abs_m2);
        if (i < urn_dev_means.size() && urn_dev_means[i] > 0.0)
            urn_pts.emplace_back(x, urn_dev_means[i]);
    }
    rep.moment_m1 = detail::fit_against(m1_pts, theoretical_slope(p_eff, d, 1.0), tol, true);
    // The m = 2 rate carries a possibly spurious log factor; never asserted.
    if (m2_pts.size() >= 5)
        rep.moment_m2 = detail::fit_against(m2_pts, theoretical_slope(p_eff, d, 2.0), tol, false);
    if (urn_pts.size() >= 5)
        rep.urn_dev = detail::fit_against(urn_pts, theoretical_slope(p_eff, d, 1.0), 0.07, true);

    if (fluct_samples.size() >= 100) {
        rep.ks_computed = true;
        rep.ks_sigma2 = fluctuation_variance(d);
        rep.ks_samples = fluct_samples.size();
        rep.ks_distance = ks_statistic(fluct_samples, rep.ks_sigma2);
        rep.ks_threshold = ks_threshold_for(rep.ks_samples);
        rep.ks_pass = rep.ks_distance <= rep.ks_threshold;
    }

    rep.all_pass = rep.moment_m1.pass && (!rep.urn_dev.fitted || rep.urn_dev.pass) &&
                   (!rep.ks_computed || rep.ks_pass);
    return rep;
}

inline nlohmann::ordered_json fit_json(const FitReport& rep) {
    nlohmann::ordered_json j;
    j["fitted"] = rep.fitted;
    if (rep.fitted) {
        j["slope"] = rep.fit.slope;
        j["intercept"] = rep.fit.intercept;
        j["slope_stderr"] = rep.fit.slope_stderr;
        j["residual_stderr"] = rep.fit.residual_stderr;
        j["points"] = rep.fit.points;
        j["theoretical"] = rep.theoretical;
        j["tolerance"] = rep.tolerance;
        j["asserted"] = rep.asserted;
        j["pass"] = rep.pass;
    }
    return j;
}

inline nlohmann::ordered_json analysis_json(const AnalysisReport& rep) {
    nlohmann::ordered_json doc;
    doc["d"] = rep.d;
    doc["p_effective"] = rep.p_effective;
    doc["regime"] = rep.regime;
    doc["burn_in"] = rep.burn_in;
    doc["p_excluded"] = rep.p_excluded;
    doc["critical_log_caveat"] = rep.critical_log_caveat;
    if (!rep.p_excluded) {
        doc["moment_m1"] = fit_json(rep.moment_m1);
        doc["moment_m2"] = fit_json(rep.moment_m2);
        doc["urn_dev"] = fit_json(rep.urn_dev);
        nlohmann::ordered_json ks;
        ks["computed"] = rep.ks_computed;
        if (rep.ks_computed) {
            ks["distance"] = rep.ks_distance;
            ks["samples"] = rep.ks_samples;
            ks["sigma2"] = rep.ks_sigma2;
            ks["threshold"] = rep.ks_threshold;
            ks["pass"] = rep.ks_pass;
        }
        doc["ks"] = ks;
        doc["all_pass"] = rep.all_pass;
    }
    return doc;
}

}  // namespace erw
