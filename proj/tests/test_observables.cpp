#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "erw/observables.hpp"
#include "erw/rng.hpp"

using Catch::Approx;
using erw::MemoryConfig;
using erw::ObservableTrace;
using erw::Regime;

TEST_CASE("limit constants", "[observables]") {
    REQUIRE(erw::escape_rate(3) == Approx(1.0 / 3).margin(1e-16));
    REQUIRE(erw::escape_rate(4) == 0.5);
    REQUIRE(erw::escape_rate(2) == 0.0);

    REQUIRE(erw::fluctuation_variance(4) == 0.75);
    REQUIRE(erw::fluctuation_variance(3) == Approx(0.88888888888888884).margin(1e-16));

    REQUIRE(erw::critical_p(4) == 0.625);
    REQUIRE(erw::critical_p(3) == Approx(2.0 / 3).margin(1e-16));
    REQUIRE(erw::critical_p(3) > erw::critical_p(4));
    REQUIRE(erw::critical_p(4) > erw::critical_p(100));
    REQUIRE(erw::critical_p(100) > 0.5);
    REQUIRE_THROWS_AS(erw::critical_p(2), std::invalid_argument);
}

TEST_CASE("regime classification", "[observables]") {
    REQUIRE(erw::classify_regime(0.0, 4) == Regime::Subcritical);
    REQUIRE(erw::classify_regime(0.5, 4) == Regime::Subcritical);
    REQUIRE(erw::classify_regime(0.625, 4) == Regime::Critical);
    REQUIRE(erw::classify_regime(0.7, 4) == Regime::Supercritical);
    REQUIRE(erw::classify_regime(2.0 / 3, 3) == Regime::Critical);

    SECTION("boundary tolerance absorbs round-trip noise") {
        REQUIRE(erw::classify_regime(0.625 + 1e-13, 4) == Regime::Critical);
        REQUIRE(erw::classify_regime(0.625 - 1e-13, 4) == Regime::Critical);
        REQUIRE(erw::classify_regime(0.625 + 1e-9, 4) == Regime::Supercritical);
        REQUIRE(erw::classify_regime(0.625 - 1e-9, 4) == Regime::Subcritical);
    }

    REQUIRE(std::string(erw::regime_name(Regime::Subcritical)) == "subcritical");
    REQUIRE(std::string(erw::regime_name(Regime::Critical)) == "critical");
    REQUIRE(std::string(erw::regime_name(Regime::Supercritical)) == "supercritical");
}

TEST_CASE("renormalization scale", "[observables]") {
    SECTION("diffusive below the boundary") {
        REQUIRE(erw::rate(1000000, 0.5, 4) == 1000.0);
        REQUIRE(erw::rate(49, 0.0, 3) == 7.0);
    }
    SECTION("logarithmic correction at the boundary (natural log)") {
        REQUIRE(erw::rate(100, 0.625, 4) == Approx(4.659906017846561).margin(1e-13));
    }
    SECTION("anomalous exponent above the boundary") {
        REQUIRE(erw::rate(1000000, 0.75, 4) == Approx(100.0).margin(1e-9));
        REQUIRE(erw::rate_exponent(0.75, 4) == Approx(1.0 / 3).margin(1e-15));
        REQUIRE(erw::rate_exponent(0.9, 4) == Approx(0.1333333333333333).margin(1e-15));
        REQUIRE(erw::rate_exponent(0.3, 4) == 0.5);
        REQUIRE(erw::rate_exponent(0.625, 4) == 0.5);
    }
    SECTION("rejects out-of-domain arguments") {
        REQUIRE_THROWS_AS(erw::rate(100, 1.0, 4), std::invalid_argument);
        REQUIRE_THROWS_AS(erw::rate(100, -0.1, 4), std::invalid_argument);
        REQUIRE_THROWS_AS(erw::rate(0, 0.5, 4), std::invalid_argument);
        REQUIRE_THROWS_AS(erw::rate(100, 0.5, 2), std::invalid_argument);
        REQUIRE_THROWS_AS(erw::rate(1, 0.625, 4), std::invalid_argument);
        REQUIRE_NOTHROW(erw::rate(2, 0.625, 4));
    }
}

TEST_CASE("return-decay constant", "[observables]") {
    REQUIRE(erw::alpha(0.0, 4) == Approx(1.0 / 3).margin(1e-15));
    REQUIRE(erw::alpha(0.4, 3) == Approx(0.19999999999999996).margin(1e-16));

    SECTION("the two branches agree at p = 1/d") {
        for (int d : {4, 5, 8}) {
            const double left = erw::alpha(1.0 / d, d);
            REQUIRE(left == Approx(1.0 - 2.0 / d).margin(1e-15));
            REQUIRE(erw::alpha(1.0 / d + 1e-9, d) == Approx(left).margin(3e-9));
        }
    }

    SECTION("domain") {
        REQUIRE_THROWS_AS(erw::alpha(0.0, 3), std::invalid_argument);
        REQUIRE_NOTHROW(erw::alpha(0.01, 3));
        REQUIRE_THROWS_AS(erw::alpha(0.5, 4), std::invalid_argument);
        REQUIRE_THROWS_AS(erw::alpha(-0.1, 4), std::invalid_argument);
        REQUIRE_THROWS_AS(erw::alpha(0.2, 2), std::invalid_argument);
    }
}

TEST_CASE("retracing count", "[observables]") {
    erw::GroupPresentation g(1, 2);
    erw::Walker w(g, 16);
    erw::UrnCounts urn(4);

    SECTION("zero at the root no matter the urn") {
        urn.record(0);
        urn.record(2);
        REQUIRE(erw::ell(w, urn) == 0);
    }

    SECTION("counts prior steps matching the root-ward generator") {
        // steps: a, a, b1  (b1 = generator 2, an involution)
        for (erw::GenId s : {0, 0, 2}) {
            w.apply_step(s);
            urn.record(s);
        }
        // root-ward generator is b1 itself; it was stepped once
        REQUIRE(w.toward_root() == 2);
        REQUIRE(erw::ell(w, urn) == 1);

        w.apply_step(2);  // cancels; now root-ward is a^{-1}, never stepped
        urn.record(2);
        REQUIRE(w.toward_root() == 1);
        REQUIRE(erw::ell(w, urn) == 0);
    }
}

TEST_CASE("growth probability q", "[observables]") {
    SECTION("share 1/d gives the memoryless value for every p") {
        for (double p : {0.0, 0.3, 0.625, 1.0}) {
            REQUIRE(erw::q_value(1, 4, p, 4) == Approx(0.75).margin(1e-15));
        }
    }
    SECTION("full retracing share gives 1 - p") {
        for (double p : {0.0, 0.25, 0.8}) {
            REQUIRE(erw::q_value(6, 6, p, 4) == Approx(1.0 - p).margin(1e-15));
        }
    }
    SECTION("p = 1/d erases the share dependence") {
        for (std::uint64_t l : {0ULL, 2ULL, 5ULL, 9ULL}) {
            REQUIRE(erw::q_value(l, 9, 0.25, 4) == Approx(0.75).margin(1e-15));
        }
    }
    SECTION("n = 0 uses the empty-share convention") {
        REQUIRE(erw::q_value(0, 0, 0.4, 4) == Approx(1.0 - 0.6 / 3).margin(1e-15));
    }
    SECTION("domain") {
        REQUIRE_THROWS_AS(erw::q_value(5, 4, 0.5, 4), std::invalid_argument);
        REQUIRE_THROWS_AS(erw::q_value(1, 0, 0.5, 4), std::invalid_argument);
    }
}

TEST_CASE("conditional drift g", "[observables]") {
    SECTION("forced growth at the root") {
        for (double p : {0.0, 0.5, 1.0}) {
            REQUIRE(erw::g_value(0, 0, 7, p, 4) == 1.0);
        }
    }
    SECTION("g = 2q - 1 away from the root") {
        for (double p : {0.0, 0.3, 0.625, 0.9}) {
            for (std::uint64_t l : {0ULL, 1ULL, 3ULL, 7ULL}) {
                const double q = erw::q_value(l, 7, p, 4);
                REQUIRE(erw::g_value(2, l, 7, p, 4) == Approx(2.0 * q - 1.0).margin(1e-14));
            }
        }
    }
}

TEST_CASE("trace accumulates the path functionals", "[observables]") {
    SECTION("first transition: forced growth, no correction term") {
        ObservableTrace t(4, 0.3);
        t.advance(0, 0, +1);
        REQUIRE(t.n == 1);
        REQUIRE(t.zero_count == 1);
        REQUIRE(t.xi_sum.value() == 0.0);
        REQUIRE(t.martingale() == 0.0);
        REQUIRE(t.bracket() == 0.0);
        REQUIRE(t.last_g == 1.0);
    }

    SECTION("two-step correction average, involution-only tree") {
        // after one step the walker always retraces with share 1
        ObservableTrace t(4, 0.5);
        t.advance(0, 0, +1);
        t.advance(1, 1, -1);
        REQUIRE(t.xi() == Approx(0.375).margin(1e-16));
    }

    SECTION("two-step correction average, free tree") {
        // share 0 after one step: only the escape-rate term contributes
        ObservableTrace t(4, 0.5);
        t.advance(0, 0, +1);
        t.advance(1, 0, +1);
        REQUIRE(t.xi() == Approx(-0.125).margin(1e-16));
    }

    SECTION("bracket never exceeds n") {
        ObservableTrace t(3, 0.2);
        erw::Rng rng(17, 0);
        std::uint64_t dist = 0;
        for (int k = 0; k < 100; ++k) {
            const std::uint64_t l = dist == 0 ? 0 : rng.next_bounded(t.n + 1);
            const int inc = dist == 0 ? 1 : (rng.next_unit() < 0.5 ? 1 : -1);
            t.advance(dist, l, inc);
            dist = static_cast<std::uint64_t>(static_cast<std::int64_t>(dist) + inc);
            REQUIRE(t.bracket() <= static_cast<double>(t.n) + 1e-12);
        }
    }
}

TEST_CASE("per-path decomposition holds step by step", "[observables]") {
    const erw::GroupPresentation g(1, 2);
    const int d = g.degree();
    const double p = 0.3;
    erw::WalkSession session(g, MemoryConfig::elephant(p));
    erw::Rng rng(2024, 7);

    for (int k = 1; k <= 300; ++k) {
        session.step(rng);
        const auto n = session.steps();
        const auto delta = session.distance();
        const auto& t = session.trace();

        REQUIRE(delta % 2 == n % 2);
        REQUIRE(t.zero_count >= 1);
        REQUIRE(t.zero_count <= (n + 1) / 2);

        const double reconstructed = static_cast<double>(n) * erw::escape_rate(d) +
                                     t.martingale() +
                                     (2.0 / d) * static_cast<double>(t.zero_count) +
                                     2.0 * (1.0 - p * d) / (d - 1) * t.xi_sum.value();
        REQUIRE(reconstructed == Approx(static_cast<double>(delta)).margin(1e-9));

        const double stat = session.fluctuation();
        const double closed_form =
            (t.martingale() + 2.0 * static_cast<double>(t.zero_count) / d) /
            std::sqrt(static_cast<double>(n));
        REQUIRE(stat == Approx(closed_form).margin(1e-9));
    }
}

TEST_CASE("fluctuation statistic drops the correction at p = 1/d", "[observables]") {
    ObservableTrace t(4, 0.25);
    t.advance(0, 0, +1);
    t.advance(1, 1, +1);
    t.advance(2, 1, +1);
    const double stat = erw::fluctuation_statistic(t, 3, 3, 0.25, 4);
    REQUIRE(stat == Approx(std::sqrt(3.0) * (1.0 - 0.5)).margin(1e-15));
    REQUIRE_THROWS_AS(erw::fluctuation_statistic(t, 0, 0, 0.25, 4), std::invalid_argument);
}

TEST_CASE("session dynamics in the deterministic corners", "[observables]") {
    SECTION("full memory on a free factor walks straight out") {
        erw::GroupPresentation g(2, 0);
        erw::WalkSession session(g, MemoryConfig::elephant(1.0));
        erw::Rng rng(3, 0);
        session.run_to(100, rng);
        REQUIRE(session.distance() == 100);
        REQUIRE(session.speed() == 1.0);
    }
    SECTION("full memory on an involution product oscillates") {
        erw::GroupPresentation g(0, 4);
        erw::WalkSession session(g, MemoryConfig::elephant(1.0));
        erw::Rng rng(3, 1);
        for (int k = 1; k <= 100; ++k) {
            session.step(rng);
            REQUIRE(session.distance() == static_cast<std::uint64_t>(k % 2));
        }
    }
    SECTION("memoryless walk drifts at the escape rate") {
        erw::GroupPresentation g(0, 4);
        erw::WalkSession session(g, MemoryConfig::elephant(0.25));
        erw::Rng rng(3, 2);
        session.run_to(20000, rng);
        REQUIRE(std::abs(session.speed() - 0.5) < 0.05);
    }
}
