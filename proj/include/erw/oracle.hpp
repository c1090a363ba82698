#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "erw/group.hpp"
#include "erw/observables.hpp"
#include "erw/sampler.hpp"
#include "erw/walker.hpp"

namespace erw {

// Exact finite-horizon law of the distance, plus exact moments of the
// path functionals, obtained by exhausting all step sequences.
struct ExactDistribution {
    std::uint64_t horizon = 0;
    int d = 0;
    std::vector<double> pmf;                 // index = distance, size horizon + 1
    double mean_delta = 0.0;                 // E[Delta_n]
    std::map<double, double> abs_moments;    // m -> E|Delta_n/n - (d-2)/d|^m
    double return_prob = 0.0;                // P(Delta_n = 0)
    std::map<double, double> xi_moments;     // m -> E|Xi_n|^m
    double martingale_mean = 0.0;            // E[M_n]; 0 up to rounding
};

inline double exact_return_probability(const ExactDistribution& dist) { return dist.pmf.at(0); }

namespace detail {

class Enumerator {
public:
    Enumerator(const GroupPresentation& pres, const MemoryConfig& cfg, std::uint64_t n,
               const std::vector<double>& ms)
        : pres_(pres),
          cfg_(MemoryConfig::validated(cfg)),
          n_(n),
          ms_(ms),
          walker_(pres, n),
          urn_(pres.degree()),
          pmf_(n + 1),
          abs_(ms.size()),
          xi_(ms.size()) {}

    ExactDistribution run() {
        ObservableTrace trace(pres_.degree(), effective_memory(cfg_, pres_.degree()));
        descend(0, 1.0, trace);
        ExactDistribution out;
        out.horizon = n_;
        out.d = pres_.degree();
        out.pmf.reserve(n_ + 1);
        for (const auto& bin : pmf_) out.pmf.push_back(bin.value());
        out.mean_delta = mean_delta_.value();
        out.return_prob = out.pmf[0];
        for (std::size_t i = 0; i < ms_.size(); ++i) {
            out.abs_moments[ms_[i]] = abs_[i].value();
            out.xi_moments[ms_[i]] = xi_[i].value();
        }
        out.martingale_mean = m_mean_.value();
        return out;
    }

private:
    void descend(std::uint64_t depth, double weight, const ObservableTrace& trace) {
        if (depth == n_) {
            record_leaf(weight, trace);
            return;
        }
        const int d = pres_.degree();
        for (int gi = 0; gi < d; ++gi) {
            const auto g = static_cast<GenId>(gi);
            const double prob =
                urn_.total() == 0 ? 1.0 / d : step_probability(urn_, cfg_, g);
            if (prob == 0.0) continue;
            const std::uint64_t dist_before = walker_.distance();
            const std::uint64_t ell_before = ell(walker_, urn_);
            const auto undo = walker_.apply_step_recorded(g);
            ObservableTrace next = trace;
            next.advance(dist_before, ell_before,
                         walker_.distance() > dist_before ? 1 : -1);
            urn_.record(g);
            descend(depth + 1, weight * prob, next);
            urn_.unrecord(g);
            walker_.undo_step(undo);
        }
    }

    void record_leaf(double weight, const ObservableTrace& trace) {
        const std::uint64_t delta = walker_.distance();
        pmf_[delta].add(weight);
        mean_delta_.add(weight * static_cast<double>(delta));
        const double dev =
            std::abs(static_cast<double>(delta) / static_cast<double>(n_) - escape_rate(pres_.degree()));
        const double xi = std::abs(trace.xi());
        for (std::size_t i = 0; i < ms_.size(); ++i) {
            abs_[i].add(weight * std::pow(dev, ms_[i]));
            xi_[i].add(weight * std::pow(xi, ms_[i]));
        }
        m_mean_.add(weight * trace.martingale());
    }

    const GroupPresentation& pres_;
    MemoryConfig cfg_;
    std::uint64_t n_;
    std::vector<double> ms_;
    Walker walker_;
    UrnCounts urn_;
    std::vector<KahanSum> pmf_;
    KahanSum mean_delta_;
    KahanSum m_mean_;
    std::vector<KahanSum> abs_;
    std::vector<KahanSum> xi_;
};

}  // namespace detail

// d^n grows fast; refuse anything past ~1e8 paths instead of truncating.
inline void check_enumeration_budget(int d, std::uint64_t n) {
    const double paths = std::pow(static_cast<double>(d), static_cast<double>(n));
    if (n > 12 || paths > 1e8)
        throw std::invalid_argument("oracle: " + std::to_string(d) + "^" + std::to_string(n) +
                                    " = " + std::to_string(paths) +
                                    " paths exceeds the enumeration budget (n <= 12, d^n <= 1e8)");
}

inline ExactDistribution enumerate_exact(const GroupPresentation& pres, const MemoryConfig& cfg,
                                         std::uint64_t n,
                                         const std::vector<double>& ms = {1.0}) {
    if (n == 0) throw std::invalid_argument("oracle: horizon must be >= 1");
    check_enumeration_budget(pres.degree(), n);
    return detail::Enumerator(pres, cfg, n, ms).run();
}

// Max absolute difference between the distance pmf under a reinforced rule
// and under the equivalent plain rule with the mapped memory parameter.
inline double compare_variants(const GroupPresentation& pres, double ptilde, Variant variant,
                               std::uint64_t n) {
    if (variant == Variant::Elephant)
        throw std::invalid_argument("compare_variants: pick a reinforced variant to compare");
    const MemoryConfig reinforced = MemoryConfig::validated({variant, ptilde});
    const MemoryConfig mapped =
        MemoryConfig::elephant(effective_memory(reinforced, pres.degree()));
    const ExactDistribution a = enumerate_exact(pres, reinforced, n);
    const ExactDistribution b = enumerate_exact(pres, mapped, n);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.pmf.size(); ++k)
        worst = std::max(worst, std::abs(a.pmf[k] - b.pmf[k]));
    return worst;
}

}  // namespace erw
