#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "erw/group.hpp"
#include "erw/rng.hpp"
#include "erw/sampler.hpp"
#include "erw/walker.hpp"

namespace erw {

// Compensated (Kahan) accumulator. The xi sum is multiplied by sqrt(n)
// downstream, so plain summation would surface its rounding error.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }

    double value() const { return sum; }
};

inline double escape_rate(int d) { return (d - 2.0) / d; }

// Variance of the limiting Gaussian for the corrected speed fluctuations.
inline double fluctuation_variance(int d) { return 4.0 * (d - 1.0) / (static_cast<double>(d) * d); }

inline double critical_p(int d) {
    if (d < 3) throw std::invalid_argument("critical_p: requires d >= 3");
    return (d + 1) / (2.0 * d);
}

enum class Regime : std::uint8_t { Subcritical, Critical, Supercritical };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Subcritical: return "subcritical";
        case Regime::Critical: return "critical";
        case Regime::Supercritical: return "supercritical";
    }
    return "unknown";
}

// p and p_d within 1e-12 count as critical, so d with a non-representable
// critical point (e.g. d = 3) still classifies round-tripped inputs.
inline Regime classify_regime(double p, int d) {
    const double pd = critical_p(d);
    if (std::abs(p - pd) <= 1e-12) return Regime::Critical;
    return p < pd ? Regime::Subcritical : Regime::Supercritical;
}

// Scale r_n that renormalizes Delta_n/n - (d-2)/d to a nondegenerate limit.
// Natural log at criticality (the constant factor is a convention).
inline double rate(std::uint64_t n, double p, int d) {
    if (d < 3) throw std::invalid_argument("rate: requires d >= 3");
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("rate: requires p in [0, 1)");
    if (n == 0) throw std::invalid_argument("rate: requires n >= 1");
    const auto x = static_cast<double>(n);
    switch (classify_regime(p, d)) {
        case Regime::Subcritical: return std::sqrt(x);
        case Regime::Critical:
            if (n < 2) throw std::invalid_argument("rate: critical scaling needs n >= 2");
            return std::sqrt(x / std::log(x));
        case Regime::Supercritical: return std::pow(x, d * (1.0 - p) / (d - 1));
    }
    throw std::logic_error("rate: unreachable");
}

inline double rate_exponent(double p, int d) {
    return classify_regime(p, d) == Regime::Supercritical ? d * (1.0 - p) / (d - 1) : 0.5;
}

// Exponential-decay constant for the return probability, defined for
// 0 <= p < 1/2 away from the degenerate pair p = 0, d = 3.
inline double alpha(double p, int d) {
    if (d < 3) throw std::invalid_argument("alpha: requires d >= 3");
    if (!(p >= 0.0 && p < 0.5))
        throw std::invalid_argument("alpha: defined only for p in [0, 1/2)");
    if (p == 0.0 && d == 3)
        throw std::invalid_argument("alpha: undefined for p = 0, d = 3");
    return p <= 1.0 / d ? 1.0 - 2.0 * (1.0 - p) / (d - 1) : 1.0 - 2.0 * p;
}

// Count of steps that have retraced the current last letter: 0 at the root,
// else the urn count of the root-ward generator.
inline std::uint64_t ell(const Walker& state, const UrnCounts& urn) {
    if (state.at_root()) return 0;
    return urn.count(state.toward_root());
}

// Conditional probability that the distance grows on the next step, as a
// function of the retracing share ell_n/n. The n = 0 case uses the 0/0 := 0
// convention.
inline double q_value(std::uint64_t ell_n, std::uint64_t n, double p, int d) {
    if (ell_n > n) throw std::invalid_argument("q_value: requires ell_n <= n");
    if (n == 0 && ell_n != 0) throw std::invalid_argument("q_value: n = 0 needs ell_n = 0");
    const double share = n == 0 ? 0.0 : static_cast<double>(ell_n) / static_cast<double>(n);
    return 1.0 - (1.0 - p) / (d - 1) + (1.0 - p * d) / (d - 1) * share;
}

// Conditional drift of the distance: 1 at the root, else 2q - 1.
inline double g_value(std::uint64_t dist, std::uint64_t ell_n, std::uint64_t n, double p, int d) {
    const double share = n == 0 ? 0.0 : static_cast<double>(ell_n) / static_cast<double>(n);
    const double indicator = dist > 0 ? 1.0 : 0.0;
    return 1.0 - 2.0 * (1.0 - p) / (d - 1) * indicator + 2.0 * (1.0 - p * d) / (d - 1) * share;
}

// Running functionals of one trajectory. Copyable value type so exhaustive
// enumeration can branch it down a search tree.
struct ObservableTrace {
    int d = 0;
    double p = 0.0;  // effective memory parameter of the step law
    std::uint64_t n = 0;
    KahanSum xi_sum;      // sum of ell_k/k - 1(Delta_k > 0)/d over k < n
    std::uint64_t zero_count = 0;  // #{k < n : Delta_k = 0}
    KahanSum m;           // martingale value M_n
    KahanSum qv;          // quadratic variation <M>_n = n - sum G_k^2
    double last_g = 1.0;  // drift used for the most recent increment

    ObservableTrace() = default;
    ObservableTrace(int d_, double p_eff) : d(d_), p(p_eff) {}

    double xi() const { return n == 0 ? 0.0 : xi_sum.value() / static_cast<double>(n); }
    double martingale() const { return m.value(); }
    double bracket() const { return qv.value(); }

    // Fold in one transition, given the pre-step state. G is recomputed from
    // scratch every call so the per-path decomposition stays exact.
    void advance(std::uint64_t dist_before, std::uint64_t ell_before, int delta_increment) {
        const double g = g_value(dist_before, ell_before, n, p, d);
        const double share = n == 0 ? 0.0 : static_cast<double>(ell_before) / static_cast<double>(n);
        xi_sum.add(share - (dist_before > 0 ? 1.0 / d : 0.0));
        if (dist_before == 0) ++zero_count;
        qv.add(1.0 - g * g);
        m.add(static_cast<double>(delta_increment) - g);
        last_g = g;
        ++n;
    }
};

inline void advance(ObservableTrace& trace, const Walker& state_before, const UrnCounts& urn_before,
                    int delta_increment) {
    trace.advance(state_before.distance(), ell(state_before, urn_before), delta_increment);
}

// sqrt(n) * [Delta_n/n - (d-2)/d - 2(1-pd)/(d-1) * Xi_n]; the limit law is
// centered Gaussian with variance 4(d-1)/d^2.
inline double fluctuation_statistic(const ObservableTrace& trace, std::uint64_t delta_n,
                                    std::uint64_t n, double p, int d) {
    if (n == 0) throw std::invalid_argument("fluctuation_statistic: requires n >= 1");
    const auto x = static_cast<double>(n);
    const double speed = static_cast<double>(delta_n) / x;
    const double xi = trace.xi_sum.value() / x;
    return std::sqrt(x) * (speed - escape_rate(d) - 2.0 * (1.0 - p * d) / (d - 1) * xi);
}

// One replica: position, step-type counts and observables advanced in
// lockstep under the configured memory rule.
class WalkSession {
public:
    WalkSession(const GroupPresentation& group, const MemoryConfig& cfg, std::size_t horizon = 0)
        : group_(&group),
          cfg_(MemoryConfig::validated(cfg)),
          walker_(group, horizon),
          urn_(group.degree()),
          trace_(group.degree(), effective_memory(cfg, group.degree())) {}

    void step(Rng& rng) {
        const std::uint64_t dist_before = walker_.distance();
        const std::uint64_t ell_before = ell(walker_, urn_);
        const GenId g = sample_next_step(urn_, cfg_, rng);
        walker_.apply_step(g);
        const int increment = walker_.distance() > dist_before ? 1 : -1;
        trace_.advance(dist_before, ell_before, increment);
        urn_.record(g);
    }

    void run_to(std::uint64_t n, Rng& rng) {
        while (trace_.n < n) step(rng);
    }

    const Walker& walker() const { return walker_; }
    const UrnCounts& urn() const { return urn_; }
    const ObservableTrace& trace() const { return trace_; }
    const GroupPresentation& group() const { return *group_; }
    const MemoryConfig& config() const { return cfg_; }

    std::uint64_t steps() const { return trace_.n; }
    std::uint64_t distance() const { return walker_.distance(); }
    double speed() const { return trace_.n == 0 ? 0.0 : static_cast<double>(walker_.distance()) / static_cast<double>(trace_.n); }
    double fluctuation() const {
        return fluctuation_statistic(trace_, walker_.distance(), trace_.n, trace_.p, trace_.d);
    }

private:
    const GroupPresentation* group_;
    MemoryConfig cfg_;
    Walker walker_;
    UrnCounts urn_;
    ObservableTrace trace_;
};

// Absolute defect of the exact per-path identity
//   Delta_n = n*(d-2)/d + M_n + (2/d)*zero_count + 2(1-pd)/(d-1)*xi_sum.
// It holds path by path, so the defect is floating-point rounding only;
// anything above ~1e-9*n indicates a bookkeeping bug.
inline double decomposition_residual(const WalkSession& session) {
    const ObservableTrace& t = session.trace();
    const double n = static_cast<double>(t.n);
    const double coeff = 2.0 * (1.0 - t.p * t.d) / (t.d - 1);
    const double reconstructed = n * escape_rate(t.d) + t.martingale() +
                                 (2.0 / t.d) * static_cast<double>(t.zero_count) +
                                 coeff * t.xi_sum.value();
    return std::abs(reconstructed - static_cast<double>(session.distance()));
}

}  // namespace erw
