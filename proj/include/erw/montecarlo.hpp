#pragma once

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "erw/accumulator.hpp"
#include "erw/group.hpp"
#include "erw/observables.hpp"
#include "erw/rng.hpp"
#include "erw/sampler.hpp"

namespace erw {

struct RunConfig {
    int d1 = 0;
    int d2 = 4;
    MemoryConfig memory{};
    std::uint64_t horizon = 1000;
    std::uint64_t replicas = 1;
    std::uint64_t base_seed = 1;
    std::vector<std::uint64_t> checkpoints;  // empty = geometric default
    std::vector<double> moment_orders = {1.0, 1.5, 2.0};
    int workers = 1;
    bool track_distance_pmf = false;  // per-checkpoint integer law of the distance
    bool record_fluctuations = false; // keep per-replica final-checkpoint rows
};

// Geometric schedule with ratio 2^(1/4), deduplicated, ending at horizon.
// Even spacing in log n keeps the exponent regressions well conditioned.
inline std::vector<std::uint64_t> default_checkpoints(std::uint64_t horizon) {
    std::vector<std::uint64_t> cps;
    for (int k = 0;; ++k) {
        const auto v = static_cast<std::uint64_t>(std::llround(std::pow(2.0, k / 4.0)));
        if (v >= horizon) break;
        if (cps.empty() || v > cps.back()) cps.push_back(v);
    }
    cps.push_back(horizon);
    return cps;
}

// Fills defaults and rejects inconsistent settings; returns the resolved
// config actually used by the run (echoed into every artifact).
inline RunConfig resolve_config(RunConfig cfg) {
    MemoryConfig::validated(cfg.memory);
    GroupPresentation pres(cfg.d1, cfg.d2);  // validates d1/d2
    if (cfg.horizon == 0) throw std::invalid_argument("config: horizon must be >= 1");
    if (cfg.replicas == 0) throw std::invalid_argument("config: replicas must be >= 1");
    if (cfg.workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    if (cfg.checkpoints.empty()) cfg.checkpoints = default_checkpoints(cfg.horizon);
    std::uint64_t prev = 0;
    for (const auto cp : cfg.checkpoints) {
        if (cp <= prev || cp > cfg.horizon)
            throw std::invalid_argument(
                "config: checkpoints must be strictly increasing within [1, horizon]");
        prev = cp;
    }
    if (cfg.checkpoints.back() != cfg.horizon)
        throw std::invalid_argument("config: the last checkpoint must equal the horizon");
    for (const double m : cfg.moment_orders)
        if (!(m >= 1.0 && m <= 4.0))
            throw std::invalid_argument("config: moment orders must lie in [1, 4]");
    if (cfg.track_distance_pmf && cfg.horizon > 65536)
        throw std::invalid_argument("config: distance pmf tracking is capped at horizon 65536");
    return cfg;
}

// Everything aggregated over replicas at one checkpoint.
struct CheckpointAggregate {
    std::uint64_t n = 0;
    MomentAccumulator speed;      // center (d-2)/d with the requested orders
    MomentAccumulator xi;
    MomentAccumulator fluct;      // histogram per fluctuation_binning(d)
    MomentAccumulator urn_dev;    // mean over a of |N_n(a)/n - 1/d|
    MomentAccumulator zero_frac;  // zero_count/n, the running root-visit rate
    std::uint64_t return_count = 0;
    std::vector<std::uint64_t> delta_counts;  // empty unless tracking the pmf

    CheckpointAggregate() = default;

    CheckpointAggregate(std::uint64_t n_, int d, const RunConfig& cfg)
        : n(n_),
          speed(escape_rate(d), cfg.moment_orders),
          xi(0.0, {}),
          fluct(0.0, {}, fluctuation_binning(d)),
          urn_dev(0.0, {}),
          zero_frac(0.0, {}) {
        if (cfg.track_distance_pmf) delta_counts.assign(n_ + 1, 0);
    }

    void update(const WalkSession& s) {
        speed.update(s.speed());
        xi.update(s.trace().xi());
        fluct.update(s.fluctuation());
        const int d = s.group().degree();
        double dev = 0.0;
        const auto steps = static_cast<double>(s.steps());
        for (int g = 0; g < d; ++g)
            dev += std::abs(static_cast<double>(s.urn().count(static_cast<GenId>(g))) / steps -
                            1.0 / d);
        urn_dev.update(dev / d);
        zero_frac.update(static_cast<double>(s.trace().zero_count) / steps);
        if (s.walker().at_root()) ++return_count;
        if (!delta_counts.empty()) ++delta_counts[s.distance()];
    }

    void merge(const CheckpointAggregate& other) {
        if (n != other.n) throw std::invalid_argument("aggregate: checkpoint mismatch");
        speed.merge(other.speed);
        xi.merge(other.xi);
        fluct.merge(other.fluct);
        urn_dev.merge(other.urn_dev);
        zero_frac.merge(other.zero_frac);
        return_count += other.return_count;
        for (std::size_t i = 0; i < delta_counts.size(); ++i)
            delta_counts[i] += other.delta_counts[i];
    }

    std::uint64_t replica_count() const { return speed.count(); }
    double return_prob() const {
        return replica_count() == 0 ? 0.0
                                    : static_cast<double>(return_count) /
                                          static_cast<double>(replica_count());
    }
};

struct FluctuationRow {
    std::uint64_t replica_index = 0;
    std::uint64_t delta = 0;
    double speed = 0.0;
    double xi = 0.0;
    double fluct = 0.0;
};

struct EnsembleSummary {
    RunConfig config;
    int d = 0;
    std::vector<CheckpointAggregate> checkpoints;
    std::vector<FluctuationRow> fluctuations;  // final checkpoint, by replica index
};

// Runs one replica, invoking visit(session) at every checkpoint in order.
template <class Visit>
void run_replica_visit(const GroupPresentation& pres, const RunConfig& cfg,
                       std::uint64_t replica_index, Visit&& visit) {
    Rng rng = Rng::for_replica(cfg.base_seed, replica_index);
    WalkSession session(pres, cfg.memory, cfg.horizon);
    for (const auto cp : cfg.checkpoints) {
        session.run_to(cp, rng);
        visit(session);
    }
}

struct CheckpointRow {
    std::uint64_t n = 0;
    std::uint64_t delta = 0;
    double speed = 0.0;
    double xi = 0.0;
    double martingale = 0.0;
    double bracket = 0.0;
    std::uint64_t zero_count = 0;
    double fluct = 0.0;
    double ell_frac = 0.0;
};

inline std::vector<CheckpointRow> run_replica(const GroupPresentation& pres, const RunConfig& cfg,
                                              std::uint64_t replica_index) {
    std::vector<CheckpointRow> rows;
    rows.reserve(cfg.checkpoints.size());
    run_replica_visit(pres, cfg, replica_index, [&](const WalkSession& s) {
        CheckpointRow row;
        row.n = s.steps();
        row.delta = s.distance();
        row.speed = s.speed();
        row.xi = s.trace().xi();
        row.martingale = s.trace().martingale();
        row.bracket = s.trace().bracket();
        row.zero_count = s.trace().zero_count;
        row.fluct = s.fluctuation();
        row.ell_frac = static_cast<double>(ell(s.walker(), s.urn())) / static_cast<double>(s.steps());
        rows.push_back(row);
    });
    return rows;
}

namespace detail {

// Replicas are grouped into fixed blocks of 256; blocks are computed by any
// worker but merged strictly in block order, so ensemble output is
// byte-identical at every worker count.
inline constexpr std::uint64_t kBlockSize = 256;

}  // namespace detail

inline EnsembleSummary run_ensemble(const RunConfig& raw_cfg) {
    const RunConfig cfg = resolve_config(raw_cfg);
    const GroupPresentation pres(cfg.d1, cfg.d2);
    const int d = pres.degree();

    EnsembleSummary summary;
    summary.config = cfg;
    summary.d = d;
    summary.checkpoints.reserve(cfg.checkpoints.size());
    for (const auto cp : cfg.checkpoints) summary.checkpoints.emplace_back(cp, d, cfg);
    if (cfg.record_fluctuations) summary.fluctuations.resize(cfg.replicas);

    const std::uint64_t num_blocks =
        (cfg.replicas + detail::kBlockSize - 1) / detail::kBlockSize;
    const auto worker_count = static_cast<unsigned>(std::min<std::uint64_t>(
        static_cast<std::uint64_t>(cfg.workers), num_blocks));

    std::atomic<std::uint64_t> next_block{0};
    std::mutex merge_mutex;
    std::condition_variable merge_cv;
    std::uint64_t merge_frontier = 0;
    std::exception_ptr failure;

    auto work = [&]() {
        try {
            for (;;) {
                const std::uint64_t block = next_block.fetch_add(1);
                if (block >= num_blocks) return;
                std::vector<CheckpointAggregate> local;
                local.reserve(cfg.checkpoints.size());
                for (const auto cp : cfg.checkpoints) local.emplace_back(cp, d, cfg);
                const std::uint64_t lo = block * detail::kBlockSize;
                const std::uint64_t hi = std::min(cfg.replicas, lo + detail::kBlockSize);
                for (std::uint64_t r = lo; r < hi; ++r) {
                    std::size_t ci = 0;
                    run_replica_visit(pres, cfg, r, [&](const WalkSession& s) {
                        // Debug builds spot-check every 100th replica against the
                        // exact per-path identity; compiled out under NDEBUG.
                        assert(r % 100 != 0 ||
                               decomposition_residual(s) <=
                                   1e-9 * std::max<double>(1.0, static_cast<double>(s.steps())));
                        local[ci].update(s);
                        if (cfg.record_fluctuations && s.steps() == cfg.horizon)
                            summary.fluctuations[r] = FluctuationRow{
                                r, s.distance(), s.speed(), s.trace().xi(), s.fluctuation()};
                        ++ci;
                    });
                }
                std::unique_lock lock(merge_mutex);
                merge_cv.wait(lock, [&] { return merge_frontier == block || failure; });
                if (failure) return;
                for (std::size_t i = 0; i < local.size(); ++i)
                    summary.checkpoints[i].merge(local[i]);
                ++merge_frontier;
                merge_cv.notify_all();
            }
        } catch (...) {
            std::lock_guard lock(merge_mutex);
            if (!failure) failure = std::current_exception();
            merge_cv.notify_all();
        }
    };

    if (worker_count <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(worker_count);
        for (unsigned w = 0; w < worker_count; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return summary;
}

}  // namespace erw
