#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "erw/montecarlo.hpp"
#include "erw/observables.hpp"
#include "erw/oracle.hpp"
#include "erw/sampler.hpp"
#include "erw/stats.hpp"

namespace erw {

struct VerifyResult {
    std::string check;
    std::string point;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline std::string point_label(int d1, int d2, double p) {
    return "d1=" + std::to_string(d1) + " d2=" + std::to_string(d2) + " p=" + std::to_string(p);
}

struct GridPoint {
    int d1;
    int d2;
    double p;
};

inline std::vector<GridPoint> verify_grid() {
    const std::vector<std::pair<int, int>> groups = {{0, 3}, {0, 4}, {1, 2}, {2, 0}};
    std::vector<GridPoint> pts;
    for (const auto& [d1, d2] : groups) {
        const int d = 2 * d1 + d2;
        std::vector<double> ps = {0.0, 0.3, 1.0 / d, 0.5, critical_p(d), 0.75, 0.9};
        std::sort(ps.begin(), ps.end());
        ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
        for (const double p : ps) pts.push_back({d1, d2, p});
    }
    return pts;
}

// Oracle distribution basics: normalization, parity support, vanishing
// expected martingale value.
inline VerifyResult check_oracle_sanity(const GroupPresentation& pres, double p, std::uint64_t n) {
    VerifyResult res{"oracle-sanity", point_label(pres.d1(), pres.d2(), p), true, ""};
    const auto dist = enumerate_exact(pres, MemoryConfig::elephant(p), n, {1.0});
    double total = 0.0;
    for (const double v : dist.pmf) total += v;
    if (std::abs(total - 1.0) > 1e-10) {
        res.pass = false;
        res.detail = "pmf mass " + std::to_string(total);
        return res;
    }
    for (std::size_t k = 0; k < dist.pmf.size(); ++k) {
        if ((k % 2) != (n % 2) && dist.pmf[k] != 0.0) {
            res.pass = false;
            res.detail = "parity-violating mass at distance " + std::to_string(k);
            return res;
        }
    }
    if (std::abs(dist.martingale_mean) > 1e-10) {
        res.pass = false;
        res.detail = "E[M] = " + std::to_string(dist.martingale_mean);
        return res;
    }
    if (dist.mean_delta < 0.0 || dist.mean_delta > static_cast<double>(n)) {
        res.pass = false;
        res.detail = "E[Delta] out of range";
    }
    return res;
}

// Simulated law of Delta_n against the exact one, bin by bin.
inline VerifyResult check_mc_vs_oracle(const GroupPresentation& pres, double p, std::uint64_t n,
                                       std::uint64_t replicas, std::uint64_t seed) {
    VerifyResult res{"mc-vs-oracle", point_label(pres.d1(), pres.d2(), p), true, ""};
    const auto exact = enumerate_exact(pres, MemoryConfig::elephant(p), n, {1.0});
    RunConfig cfg;
    cfg.d1 = pres.d1();
    cfg.d2 = pres.d2();
    cfg.memory = MemoryConfig::elephant(p);
    cfg.horizon = n;
    cfg.replicas = replicas;
    cfg.base_seed = seed;
    cfg.checkpoints = {n};
    cfg.track_distance_pmf = true;
    const auto summary = run_ensemble(cfg);
    const auto& counts = summary.checkpoints.back().delta_counts;
    const auto r = static_cast<double>(replicas);
    for (std::size_t k = 0; k < exact.pmf.size(); ++k) {
        const double q = exact.pmf[k];
        const double emp = static_cast<double>(counts[k]) / r;
        // the 5/r floor keeps near-empty bins (expected count < ~1) from
        // tripping a nominal 4-sigma binomial band
        const double tol = 4.0 * std::sqrt(q * (1.0 - q) / r) + 5.0 / r;
        if (std::abs(emp - q) > tol) {
            res.pass = false;
            res.detail = "bin " + std::to_string(k) + ": exact " + std::to_string(q) +
                         " empirical " + std::to_string(emp);
            return res;
        }
    }
    return res;
}

// Per-step invariants along simulated trajectories: count conservation,
// unit distance increments, the retracing-share proximity bound, q and
// bracket ranges, root-visit cap, and the exact distance decomposition.
inline VerifyResult check_path_identities(const GroupPresentation& pres, double p,
                                          std::uint64_t paths, std::uint64_t steps,
                                          std::uint64_t seed) {
    VerifyResult res{"path-identities", point_label(pres.d1(), pres.d2(), p), true, ""};
    const int d = pres.degree();
    const MemoryConfig cfg = MemoryConfig::elephant(p);
    const double q_floor = std::max(0.0, 1.0 - p - (1.0 - p) / (d - 1));
    for (std::uint64_t path = 0; path < paths; ++path) {
        Rng rng = Rng::for_replica(seed, path);
        WalkSession session(pres, cfg, steps);
        std::uint64_t prev_dist = 0;
        for (std::uint64_t k = 0; k < steps; ++k) {
            session.step(rng);
            const auto& trace = session.trace();
            const auto n = trace.n;
            const std::uint64_t dist = session.distance();
            const std::uint64_t diff = dist > prev_dist ? dist - prev_dist : prev_dist - dist;
            if (diff != 1) {
                res.pass = false;
                res.detail = "distance increment != 1 at step " + std::to_string(n);
                return res;
            }
            prev_dist = dist;
            std::uint64_t count_sum = 0;
            double max_dev = 0.0;
            for (int g = 0; g < d; ++g) {
                const auto c = session.urn().count(static_cast<GenId>(g));
                count_sum += c;
                max_dev = std::max(max_dev, std::abs(static_cast<double>(c) /
                                                         static_cast<double>(n) -
                                                     1.0 / d));
            }
            if (count_sum != n) {
                res.pass = false;
                res.detail = "count sum " + std::to_string(count_sum) + " != n";
                return res;
            }
            const auto ell_n = ell(session.walker(), session.urn());
            const double share = static_cast<double>(ell_n) / static_cast<double>(n);
            const double indicator = dist > 0 ? 1.0 / d : 0.0;
            if (std::abs(share - indicator) > max_dev + 1e-15) {
                res.pass = false;
                res.detail = "retracing share escapes the urn deviation bound";
                return res;
            }
            const double q = q_value(ell_n, n, p, d);
            if (q < q_floor - 1e-12 || q > 1.0 + 1e-12) {
                res.pass = false;
                res.detail = "q out of range: " + std::to_string(q);
                return res;
            }
            if (trace.bracket() > static_cast<double>(n) + 1e-9) {
                res.pass = false;
                res.detail = "bracket exceeds n";
                return res;
            }
            if (trace.zero_count > (n + 1) / 2) {
                res.pass = false;
                res.detail = "zero_count exceeds (n+1)/2";
                return res;
            }
            const double lhs = static_cast<double>(dist) -
                               static_cast<double>(n) * escape_rate(d);
            const double rhs = trace.martingale() +
                               (2.0 / d) * static_cast<double>(trace.zero_count) +
                               2.0 * (1.0 - p * d) / (d - 1) * trace.xi_sum.value();
            if (std::abs(lhs - rhs) > 1e-9 * static_cast<double>(n)) {
                res.pass = false;
                res.detail = "decomposition residual " + std::to_string(lhs - rhs) + " at n=" +
                             std::to_string(n);
                return res;
            }
            const double stat = session.fluctuation();
            const double stat_alt = (trace.martingale() +
                                     2.0 * static_cast<double>(trace.zero_count) / d) /
                                    std::sqrt(static_cast<double>(n));
            if (std::abs(stat - stat_alt) > 1e-9) {
                res.pass = false;
                res.detail = "fluctuation statistic mismatch";
                return res;
            }
        }
    }
    return res;
}

// Sampled step frequencies against the conditional law, at the empty urn
// (chi-square) and at a lopsided fixed urn (binomial bands).
inline VerifyResult check_sampler_frequencies(const GroupPresentation& pres, double p,
                                              std::uint64_t draws, std::uint64_t seed) {
    VerifyResult res{"sampler-frequencies", point_label(pres.d1(), pres.d2(), p), true, ""};
    const int d = pres.degree();
    const MemoryConfig cfg = MemoryConfig::elephant(p);
    {
        Rng rng(seed, 0);
        UrnCounts urn(d);
        std::vector<double> observed(static_cast<std::size_t>(d), 0.0);
        for (std::uint64_t i = 0; i < draws; ++i)
            observed[sample_next_step(urn, cfg, rng)] += 1.0;
        const std::vector<double> expected(static_cast<std::size_t>(d),
                                           static_cast<double>(draws) / d);
        const double stat = chi_square_statistic(observed, expected);
        const double crit = chi_square_critical(d - 1, 0.01);
        if (stat > crit) {
            res.pass = false;
            res.detail = "first-step chi-square " + std::to_string(stat) + " > " +
                         std::to_string(crit);
            return res;
        }
    }
    {
        Rng rng(seed, 1);
        UrnCounts urn(d);
        for (int i = 0; i < 3; ++i) urn.record(0);
        urn.record(1);
        std::vector<std::uint64_t> observed(static_cast<std::size_t>(d), 0);
        for (std::uint64_t i = 0; i < draws; ++i) ++observed[sample_next_step(urn, cfg, rng)];
        for (int g = 0; g < d; ++g) {
            const double q = step_probability(urn, cfg, static_cast<GenId>(g));
            const double emp = static_cast<double>(observed[g]) / static_cast<double>(draws);
            const double tol =
                4.0 * std::sqrt(q * (1.0 - q) / static_cast<double>(draws)) +
                5.0 / static_cast<double>(draws);
            if (std::abs(emp - q) > tol) {
                res.pass = false;
                res.detail = "generator " + std::to_string(g) + " frequency " +
                             std::to_string(emp) + " vs law " + std::to_string(q);
                return res;
            }
        }
    }
    return res;
}

inline VerifyResult check_variant_equivalence(const GroupPresentation& pres, Variant variant,
                                              double ptilde, std::uint64_t n) {
    VerifyResult res{variant == Variant::Positive ? "pos-equivalence" : "neg-equivalence",
                     point_label(pres.d1(), pres.d2(), ptilde), true, ""};
    const double diff = compare_variants(pres, ptilde, variant, n);
    if (diff > 1e-12) {
        res.pass = false;
        res.detail = "max pmf difference " + std::to_string(diff);
    }
    return res;
}

// Exponential return-probability bound on its domain of validity.
inline VerifyResult check_return_bound(const GroupPresentation& pres, double p,
                                       std::uint64_t replicas, std::uint64_t seed) {
    VerifyResult res{"return-bound", point_label(pres.d1(), pres.d2(), p), true, ""};
    const int d = pres.degree();
    RunConfig cfg;
    cfg.d1 = pres.d1();
    cfg.d2 = pres.d2();
    cfg.memory = MemoryConfig::elephant(p);
    cfg.horizon = 64;
    cfg.replicas = replicas;
    cfg.base_seed = seed;
    cfg.checkpoints = {32, 64};
    const auto summary = run_ensemble(cfg);
    const double a = alpha(p, d);
    for (const auto& cp : summary.checkpoints) {
        const double emp = cp.return_prob();
        const double bound = std::exp(-static_cast<double>(cp.n) * a * a / 8.0);
        const double se = std::sqrt(emp * (1.0 - emp) / static_cast<double>(replicas));
        if (emp > bound + 4.0 * se) {
            res.pass = false;
            res.detail = "P(return at n=" + std::to_string(cp.n) + ") = " + std::to_string(emp) +
                         " exceeds " + std::to_string(bound);
            return res;
        }
    }
    return res;
}

// A deliberately miscounted k = 0 xi term must break the decomposition at
// every n: proves the identity check has teeth.
inline VerifyResult check_xi_mutation(const GroupPresentation& pres, std::uint64_t seed) {
    VerifyResult res{"xi-mutation", point_label(pres.d1(), pres.d2(), 0.5), true, ""};
    const int d = pres.degree();
    const double p = 0.5;  // needs p != 1/d so the xi coefficient is nonzero
    Rng rng(seed, 0);
    WalkSession session(pres, MemoryConfig::elephant(p), 200);
    const double corruption = 1.0;  // pretend the 0/0 convention gave 1
    for (int k = 0; k < 200; ++k) {
        session.step(rng);
        const auto& trace = session.trace();
        const double corrupted_xi_sum = trace.xi_sum.value() + corruption;
        const double lhs = static_cast<double>(session.distance()) -
                           static_cast<double>(trace.n) * escape_rate(d);
        const double rhs = trace.martingale() +
                           (2.0 / d) * static_cast<double>(trace.zero_count) +
                           2.0 * (1.0 - p * d) / (d - 1) * corrupted_xi_sum;
        if (std::abs(lhs - rhs) <= 1e-9 * static_cast<double>(trace.n)) {
            res.pass = false;
            res.detail = "corrupted xi convention went undetected at n=" + std::to_string(trace.n);
            return res;
        }
    }
    return res;
}

}  // namespace detail

// The cross-module property suite behind the verify command. quick mode
// trims replica counts and skips the slowest grid points.
inline std::vector<VerifyResult> run_verify(bool quick, std::uint64_t seed = 20240817) {
    std::vector<VerifyResult> results;
    const std::uint64_t oracle_n = quick ? 5 : 6;
    const std::uint64_t mc_replicas = quick ? 20000 : 100000;
    const std::uint64_t id_paths = quick ? 4 : 10;
    const std::uint64_t id_steps = quick ? 1500 : 4000;
    const std::uint64_t chi_draws = 100000;
    const std::uint64_t bound_replicas = quick ? 5000 : 20000;

    for (const auto& pt : detail::verify_grid()) {
        const GroupPresentation pres(pt.d1, pt.d2);
        const int d = pres.degree();
        results.push_back(detail::check_oracle_sanity(pres, pt.p, oracle_n));
        results.push_back(detail::check_mc_vs_oracle(pres, pt.p, oracle_n, mc_replicas, seed));
        results.push_back(detail::check_path_identities(pres, pt.p, id_paths, id_steps, seed + 1));
        results.push_back(detail::check_sampler_frequencies(pres, pt.p, chi_draws, seed + 2));
        if (pt.p < 0.5 && !(pt.p == 0.0 && d == 3))
            results.push_back(detail::check_return_bound(pres, pt.p, bound_replicas, seed + 3));
    }

    const std::vector<std::pair<int, int>> groups = {{0, 3}, {0, 4}, {1, 2}, {2, 0}};
    for (const auto& [d1, d2] : groups) {
        const GroupPresentation pres(d1, d2);
        std::vector<double> pos = quick ? std::vector<double>{0.25, 0.5}
                                        : std::vector<double>{0.0, 0.25, 0.5, 0.9};
        std::vector<double> neg = quick ? std::vector<double>{0.25, 0.5}
                                        : std::vector<double>{0.25, 0.5, 1.0};
        for (const double pt : pos)
            results.push_back(detail::check_variant_equivalence(pres, Variant::Positive, pt, 5));
        for (const double pt : neg)
            results.push_back(detail::check_variant_equivalence(pres, Variant::Negative, pt, 5));
    }

    results.push_back(detail::check_xi_mutation(GroupPresentation(0, 4), seed + 4));
    return results;
}

}  // namespace erw
