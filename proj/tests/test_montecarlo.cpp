#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "erw/montecarlo.hpp"

using Catch::Approx;
using erw::GroupPresentation;
using erw::MemoryConfig;
using erw::RunConfig;

namespace {

bool bitwise_equal(double a, double b) {
    std::uint64_t ua, ub;
    std::memcpy(&ua, &a, sizeof a);
    std::memcpy(&ub, &b, sizeof b);
    return ua == ub;
}

RunConfig small_config() {
    RunConfig cfg;
    cfg.d1 = 1;
    cfg.d2 = 2;
    cfg.memory = MemoryConfig::elephant(0.45);
    cfg.horizon = 64;
    cfg.replicas = 700;  // three blocks, the last one partial
    cfg.base_seed = 20240817;
    cfg.checkpoints = {8, 16, 64};
    cfg.record_fluctuations = true;
    return cfg;
}

}  // namespace

TEST_CASE("default checkpoint schedule", "[montecarlo]") {
    const auto cps = erw::default_checkpoints(1024);
    REQUIRE(cps.front() == 1);
    REQUIRE(cps.back() == 1024);
    for (std::size_t i = 1; i < cps.size(); ++i) {
        REQUIRE(cps[i] > cps[i - 1]);
        // geometric with ratio 2^(1/4), so gaps stay within a factor ~1.4
        if (cps[i - 1] >= 8) {
            const double ratio = static_cast<double>(cps[i]) / static_cast<double>(cps[i - 1]);
            REQUIRE(ratio > 1.0);
            REQUIRE(ratio < 1.45);
        }
    }
    // roughly four checkpoints per octave; duplicates collapse below n = 32
    REQUIRE(cps.size() >= 32);
    REQUIRE(cps.size() <= 44);

    const auto tiny = erw::default_checkpoints(1);
    REQUIRE(tiny == std::vector<std::uint64_t>{1});
}

TEST_CASE("config validation", "[montecarlo]") {
    RunConfig good = small_config();
    REQUIRE_NOTHROW(erw::resolve_config(good));

    SECTION("defaults are filled in") {
        RunConfig cfg = good;
        cfg.checkpoints.clear();
        const auto resolved = erw::resolve_config(cfg);
        REQUIRE(resolved.checkpoints == erw::default_checkpoints(cfg.horizon));
    }
    SECTION("rejects empty dimensions") {
        RunConfig cfg = good;
        cfg.horizon = 0;
        REQUIRE_THROWS_AS(erw::resolve_config(cfg), std::invalid_argument);
        cfg = good;
        cfg.replicas = 0;
        REQUIRE_THROWS_AS(erw::resolve_config(cfg), std::invalid_argument);
        cfg = good;
        cfg.workers = 0;
        REQUIRE_THROWS_AS(erw::resolve_config(cfg), std::invalid_argument);
    }
    SECTION("rejects malformed checkpoints") {
        RunConfig cfg = good;
        cfg.checkpoints = {8, 8, 64};
        REQUIRE_THROWS_AS(erw::resolve_config(cfg), std::invalid_argument);
        cfg.checkpoints = {8, 128};
        REQUIRE_THROWS_AS(erw::resolve_config(cfg), std::invalid_argument);
        cfg.checkpoints = {8, 32};
        REQUIRE_THROWS_AS(erw::resolve_config(cfg), std::invalid_argument);
        cfg.checkpoints = {0, 64};
        REQUIRE_THROWS_AS(erw::resolve_config(cfg), std::invalid_argument);
    }
    SECTION("rejects out-of-range moment orders") {
        RunConfig cfg = good;
        cfg.moment_orders = {1.0, 5.0};
        REQUIRE_THROWS_AS(erw::resolve_config(cfg), std::invalid_argument);
        cfg.moment_orders = {0.5};
        REQUIRE_THROWS_AS(erw::resolve_config(cfg), std::invalid_argument);
    }
    SECTION("caps pmf tracking") {
        RunConfig cfg = good;
        cfg.track_distance_pmf = true;
        cfg.horizon = 100000;
        cfg.checkpoints = {100000};
        REQUIRE_THROWS_AS(erw::resolve_config(cfg), std::invalid_argument);
    }
    SECTION("rejects invalid group or memory settings") {
        RunConfig cfg = good;
        cfg.d1 = 0;
        cfg.d2 = 1;
        REQUIRE_THROWS_AS(erw::resolve_config(cfg), std::invalid_argument);
        cfg = good;
        cfg.memory.p = 1.5;
        REQUIRE_THROWS_AS(erw::resolve_config(cfg), std::invalid_argument);
    }
}

TEST_CASE("single replica trajectories", "[montecarlo]") {
    const GroupPresentation pres(1, 2);
    RunConfig cfg = small_config();

    SECTION("identical seeds reproduce every field") {
        const auto a = erw::run_replica(pres, cfg, 42);
        const auto b = erw::run_replica(pres, cfg, 42);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            REQUIRE(a[i].delta == b[i].delta);
            REQUIRE(bitwise_equal(a[i].speed, b[i].speed));
            REQUIRE(bitwise_equal(a[i].xi, b[i].xi));
            REQUIRE(bitwise_equal(a[i].martingale, b[i].martingale));
            REQUIRE(bitwise_equal(a[i].fluct, b[i].fluct));
        }
    }

    SECTION("replica index changes the stream") {
        const auto a = erw::run_replica(pres, cfg, 0);
        const auto b = erw::run_replica(pres, cfg, 1);
        bool any_diff = false;
        for (std::size_t i = 0; i < a.size(); ++i) any_diff |= a[i].delta != b[i].delta;
        REQUIRE(any_diff);
    }

    SECTION("rows line up with the checkpoint schedule and the path algebra") {
        const auto rows = erw::run_replica(pres, cfg, 7);
        REQUIRE(rows.size() == cfg.checkpoints.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            REQUIRE(r.n == cfg.checkpoints[i]);
            REQUIRE(r.delta % 2 == r.n % 2);
            REQUIRE(r.zero_count >= 1);
            REQUIRE(r.bracket <= static_cast<double>(r.n) + 1e-9);
            const double closed_form = (r.martingale + 2.0 * static_cast<double>(r.zero_count) / 4) /
                                       std::sqrt(static_cast<double>(r.n));
            REQUIRE(r.fluct == Approx(closed_form).margin(1e-9));
            REQUIRE(r.speed == Approx(static_cast<double>(r.delta) / static_cast<double>(r.n))
                                   .margin(1e-15));
        }
    }
}

TEST_CASE("ensemble aggregation matches a hand-rolled loop", "[montecarlo]") {
    const RunConfig cfg = erw::resolve_config(small_config());
    const GroupPresentation pres(cfg.d1, cfg.d2);
    const auto summary = erw::run_ensemble(cfg);

    std::vector<erw::CheckpointAggregate> manual;
    for (const auto cp : cfg.checkpoints) manual.emplace_back(cp, pres.degree(), cfg);
    for (std::uint64_t r = 0; r < cfg.replicas; ++r) {
        std::size_t ci = 0;
        erw::run_replica_visit(pres, cfg, r, [&](const erw::WalkSession& s) {
            manual[ci].update(s);
            ++ci;
        });
    }

    REQUIRE(summary.d == 4);
    REQUIRE(summary.checkpoints.size() == cfg.checkpoints.size());
    for (std::size_t i = 0; i < manual.size(); ++i) {
        const auto& got = summary.checkpoints[i];
        const auto& want = manual[i];
        REQUIRE(got.n == want.n);
        REQUIRE(got.replica_count() == cfg.replicas);
        REQUIRE(got.return_count == want.return_count);
        REQUIRE(got.speed.mean() == Approx(want.speed.mean()).margin(1e-12));
        REQUIRE(got.speed.variance() == Approx(want.speed.variance()).margin(1e-12));
        REQUIRE(got.xi.mean() == Approx(want.xi.mean()).margin(1e-12));
        REQUIRE(got.fluct.histogram() == want.fluct.histogram());
        REQUIRE(got.speed.abs_moment(1.5) == Approx(want.speed.abs_moment(1.5)).margin(1e-12));
    }

    SECTION("per-replica rows land in their own slots") {
        REQUIRE(summary.fluctuations.size() == cfg.replicas);
        for (std::uint64_t r = 0; r < cfg.replicas; ++r) {
            REQUIRE(summary.fluctuations[r].replica_index == r);
            REQUIRE(summary.fluctuations[r].delta % 2 == cfg.horizon % 2);
        }
    }
}

TEST_CASE("worker count never changes the output", "[montecarlo]") {
    RunConfig cfg = small_config();
    cfg.replicas = 1100;  // five blocks
    cfg.track_distance_pmf = true;

    cfg.workers = 1;
    const auto serial = erw::run_ensemble(cfg);
    for (int workers : {2, 4, 7}) {
        cfg.workers = workers;
        const auto parallel = erw::run_ensemble(cfg);
        REQUIRE(parallel.checkpoints.size() == serial.checkpoints.size());
        for (std::size_t i = 0; i < serial.checkpoints.size(); ++i) {
            const auto& a = serial.checkpoints[i];
            const auto& b = parallel.checkpoints[i];
            REQUIRE(bitwise_equal(a.speed.mean(), b.speed.mean()));
            REQUIRE(bitwise_equal(a.speed.variance(), b.speed.variance()));
            REQUIRE(bitwise_equal(a.speed.abs_moment(1.0), b.speed.abs_moment(1.0)));
            REQUIRE(bitwise_equal(a.speed.abs_moment(1.5), b.speed.abs_moment(1.5)));
            REQUIRE(bitwise_equal(a.speed.abs_moment(2.0), b.speed.abs_moment(2.0)));
            REQUIRE(bitwise_equal(a.xi.mean(), b.xi.mean()));
            REQUIRE(bitwise_equal(a.xi.variance(), b.xi.variance()));
            REQUIRE(bitwise_equal(a.fluct.mean(), b.fluct.mean()));
            REQUIRE(bitwise_equal(a.urn_dev.mean(), b.urn_dev.mean()));
            REQUIRE(bitwise_equal(a.zero_frac.mean(), b.zero_frac.mean()));
            REQUIRE(a.return_count == b.return_count);
            REQUIRE(a.fluct.histogram() == b.fluct.histogram());
            REQUIRE(a.delta_counts == b.delta_counts);
        }
        for (std::size_t r = 0; r < serial.fluctuations.size(); ++r) {
            REQUIRE(bitwise_equal(serial.fluctuations[r].fluct, parallel.fluctuations[r].fluct));
            REQUIRE(serial.fluctuations[r].delta == parallel.fluctuations[r].delta);
        }
    }
}

TEST_CASE("aggregate sanity on deterministic dynamics", "[montecarlo]") {
    SECTION("full memory on a free product walks ballistically") {
        RunConfig cfg;
        cfg.d1 = 2;
        cfg.d2 = 0;
        cfg.memory = MemoryConfig::elephant(1.0);
        cfg.horizon = 50;
        cfg.replicas = 64;
        cfg.checkpoints = {10, 50};
        const auto summary = erw::run_ensemble(cfg);
        for (const auto& agg : summary.checkpoints) {
            REQUIRE(agg.speed.mean() == 1.0);
            REQUIRE(agg.speed.variance() == 0.0);
            REQUIRE(agg.return_prob() == 0.0);
        }
    }
    SECTION("odd horizons cannot sit at the root") {
        RunConfig cfg;
        cfg.d1 = 0;
        cfg.d2 = 3;
        cfg.memory = MemoryConfig::elephant(0.6);
        cfg.horizon = 33;
        cfg.replicas = 200;
        cfg.checkpoints = {33};
        const auto summary = erw::run_ensemble(cfg);
        REQUIRE(summary.checkpoints[0].return_count == 0);
        REQUIRE(summary.checkpoints[0].return_prob() == 0.0);
    }
    SECTION("tracked distance law is a probability vector over the right support") {
        RunConfig cfg;
        cfg.d1 = 0;
        cfg.d2 = 4;
        cfg.memory = MemoryConfig::elephant(0.3);
        cfg.horizon = 6;
        cfg.replicas = 5000;
        cfg.checkpoints = {3, 6};
        cfg.track_distance_pmf = true;
        const auto summary = erw::run_ensemble(cfg);
        for (const auto& agg : summary.checkpoints) {
            REQUIRE(agg.delta_counts.size() == agg.n + 1);
            std::uint64_t total = 0;
            for (std::size_t k = 0; k < agg.delta_counts.size(); ++k) {
                total += agg.delta_counts[k];
                if (k % 2 != agg.n % 2) REQUIRE(agg.delta_counts[k] == 0);
            }
            REQUIRE(total == cfg.replicas);
        }
    }
}
