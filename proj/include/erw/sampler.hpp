#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "erw/group.hpp"
#include "erw/rng.hpp"

namespace erw {

// Reinforcement rule for steps after the first.
enum class Variant : std::uint8_t {
    Elephant,   // repeat a recalled step w.p. p, else uniform over the others
    Positive,   // repeat a recalled step w.p. ptilde, else uniform over all
    Negative,   // avoid a recalled step w.p. ptilde, else uniform over all
};

struct MemoryConfig {
    Variant variant = Variant::Elephant;
    double p = 0.5;  // memory parameter: p for Elephant, ptilde otherwise

    static MemoryConfig elephant(double p) { return validated({Variant::Elephant, p}); }
    static MemoryConfig positive(double ptilde) { return validated({Variant::Positive, ptilde}); }
    static MemoryConfig negative(double ptilde) { return validated({Variant::Negative, ptilde}); }

    static MemoryConfig validated(MemoryConfig cfg) {
        switch (cfg.variant) {
            case Variant::Elephant:
                if (!(cfg.p >= 0.0 && cfg.p <= 1.0))
                    throw std::invalid_argument("memory: p must lie in [0, 1]");
                break;
            case Variant::Positive:
                if (!(cfg.p >= 0.0 && cfg.p < 1.0))
                    throw std::invalid_argument("memory: ptilde must lie in [0, 1) for the positive rule");
                break;
            case Variant::Negative:
                if (!(cfg.p > 0.0 && cfg.p <= 1.0))
                    throw std::invalid_argument("memory: ptilde must lie in (0, 1] for the negative rule");
                break;
        }
        return cfg;
    }
};

// Memory parameter of the equivalent Elephant rule on a degree-d tree. All
// limit theory is stated in terms of this value.
inline double effective_memory(const MemoryConfig& cfg, int d) {
    switch (cfg.variant) {
        case Variant::Elephant: return cfg.p;
        case Variant::Positive: return cfg.p + (1.0 - cfg.p) / d;
        case Variant::Negative: return (1.0 - cfg.p) / d;
    }
    throw std::logic_error("memory: unknown variant");
}

// Phase boundary between diffusive and superdiffusive escape fluctuations.
inline double critical_memory(int d) { return (d + 1) / (2.0 * d); }

// Spectral gap parameter of the step chain: governs the r_n scaling.
inline double second_eigenvalue(double p, int d) { return (p * d - 1.0) / (d - 1.0); }

// Step-type counts. The conditional law of the next step depends on the
// history only through these, so no step log is needed for sampling.
class UrnCounts {
public:
    explicit UrnCounts(int d) : counts_(static_cast<std::size_t>(d), 0), total_(0) {}

    void record(GenId g) {
        ++counts_[g];
        ++total_;
    }

    // Exact undo of record(); enables depth-first enumeration over paths.
    void unrecord(GenId g) {
        if (counts_[g] == 0 || total_ == 0)
            throw std::logic_error("urn: unrecord without matching record");
        --counts_[g];
        --total_;
    }

    std::uint64_t count(GenId g) const { return counts_[g]; }
    std::uint64_t total() const { return total_; }
    int degree() const { return static_cast<int>(counts_.size()); }

    void reset() {
        for (auto& c : counts_) c = 0;
        total_ = 0;
    }

private:
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_;
};

inline void record_step(UrnCounts& urn, GenId g) { urn.record(g); }

// P(next step = g | counts). The first step is uniform and is handled by
// sample_next_step, so an empty urn is a caller error here.
inline double step_probability(const UrnCounts& urn, const MemoryConfig& cfg, GenId g) {
    if (urn.total() == 0)
        throw std::invalid_argument("step_probability: urn is empty; the first step is uniform");
    const int d = urn.degree();
    const double n = static_cast<double>(urn.total());
    const double share = static_cast<double>(urn.count(g)) / n;
    switch (cfg.variant) {
        case Variant::Elephant:
            return share * cfg.p + (1.0 - share) * (1.0 - cfg.p) / (d - 1);
        case Variant::Positive:
            return cfg.p * share + (1.0 - cfg.p) / d;
        case Variant::Negative:
            return cfg.p * (1.0 - share) / (d - 1) + (1.0 - cfg.p) / d;
    }
    throw std::logic_error("memory: unknown variant");
}

namespace detail {

// The recalled step g_D for D uniform on past epochs: its law is
// count(g)/total, sampled by an exact integer scan (no floating point).
inline GenId sample_recalled(const UrnCounts& urn, Rng& rng) {
    std::uint64_t r = rng.next_bounded(urn.total());
    const int d = urn.degree();
    for (int g = 0; g < d; ++g) {
        const std::uint64_t c = urn.count(static_cast<GenId>(g));
        if (r < c) return static_cast<GenId>(g);
        r -= c;
    }
    throw std::logic_error("urn: counts do not sum to total");
}

// Uniform over the d-1 generators other than `avoid`.
inline GenId sample_excluding(int d, GenId avoid, Rng& rng) {
    const auto r = rng.next_bounded(static_cast<std::uint64_t>(d - 1));
    const auto g = static_cast<GenId>(r);
    return g < avoid ? g : static_cast<GenId>(g + 1);
}

}  // namespace detail

// Draw the next step. Fixed draw sequence per epoch (first step: one bounded
// draw; later steps: recalled-step draw, one unit double, then at most one
// bounded draw), so streams are stable across code paths.
inline GenId sample_next_step(const UrnCounts& urn, const MemoryConfig& cfg, Rng& rng) {
    const int d = urn.degree();
    if (urn.total() == 0)
        return static_cast<GenId>(rng.next_bounded(static_cast<std::uint64_t>(d)));
    const GenId recalled = detail::sample_recalled(urn, rng);
    const double u = rng.next_unit();
    switch (cfg.variant) {
        case Variant::Elephant:
            if (u < cfg.p) return recalled;
            return detail::sample_excluding(d, recalled, rng);
        case Variant::Positive:
            if (u < cfg.p) return recalled;
            return static_cast<GenId>(rng.next_bounded(static_cast<std::uint64_t>(d)));
        case Variant::Negative:
            if (u < cfg.p) return detail::sample_excluding(d, recalled, rng);
            return static_cast<GenId>(rng.next_bounded(static_cast<std::uint64_t>(d)));
    }
    throw std::logic_error("memory: unknown variant");
}

}  // namespace erw
