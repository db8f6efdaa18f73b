#include <doctest.h>

#include "genint/bounds.hpp"
#include "genint/rng.hpp"

using namespace genint;

TEST_CASE("natural bound closed forms") {
    // x always occurs: point identification.
    auto point = natural_bound(0.3, 1.0);
    CHECK(point.lower == doctest::Approx(0.3));
    CHECK(point.upper == doctest::Approx(0.3));

    // x never occurs: vacuous interval.
    auto vacuous = natural_bound(0.0, 0.0);
    CHECK(vacuous.lower == doctest::Approx(0.0));
    CHECK(vacuous.upper == doctest::Approx(1.0));

    CHECK_THROWS_AS(natural_bound(0.5, 0.4), ValidationError);
    CHECK_THROWS_AS(natural_bound(-0.1, 0.5), ValidationError);
    CHECK_THROWS_AS(natural_bound(0.1, 1.5), ValidationError);
}

TEST_CASE("intervened bound closed forms") {
    // P(y|x)=0.5, P(x|z)=0.8 -> P(y,x|z)=0.4 -> [0.4, 0.6].
    auto iv = intervened_bound({0.4, 0.8});
    CHECK(iv.lower == doctest::Approx(0.4));
    CHECK(iv.upper == doctest::Approx(0.6));

    // P(x|z)=1 gives width zero.
    auto tight = intervened_bound({0.25, 1.0});
    CHECK(tight.width() == doctest::Approx(0.0));

    CHECK_THROWS_AS(intervened_bound({0.9, 0.5}), ValidationError);
}

TEST_CASE("strategy comparison arithmetic") {
    // z1: P(x|z)=0.8 -> [0.4,0.6]; z2: P(x|z)=0.5 -> [0.25,0.75].
    StrategyBoundInput z1{0.4, 0.8}, z2{0.25, 0.5};
    auto cmp = compare_strategies(z1, z2, 0.5);
    CHECK(cmp.order == StrategyOrder::a_tighter);
    CHECK(cmp.interval_a.lower == doctest::Approx(0.4));
    CHECK(cmp.interval_a.upper == doctest::Approx(0.6));
    CHECK(cmp.interval_b.lower == doctest::Approx(0.25));
    CHECK(cmp.interval_b.upper == doctest::Approx(0.75));
    CHECK(cmp.interval_a.strict_subset_of(cmp.interval_b));

    // Equal P(x|z): identical intervals.
    auto eq = compare_strategies({0.4, 0.8}, {0.4, 0.8}, 0.5);
    CHECK(eq.order == StrategyOrder::equal);
    CHECK(eq.interval_a.lower == doctest::Approx(eq.interval_b.lower));
    CHECK(eq.interval_a.upper == doctest::Approx(eq.interval_b.upper));

    // Inconsistent P(y|x) is rejected.
    CHECK_THROWS_AS(compare_strategies({0.4, 0.8}, {0.3, 0.5}, 0.5), ValidationError);
}

TEST_CASE("property: 1000 random consistent pairs nest strictly") {
    Rng rng(31);
    for (int trial = 0; trial < 1000; ++trial) {
        double p_y_x = rng.uniform(0.05, 0.95);
        double p_x_z2 = rng.uniform(0.05, 0.90);
        double p_x_z1 = p_x_z2 + rng.uniform(0.01, 1.0 - p_x_z2 - 1e-6);
        StrategyBoundInput a{p_y_x * p_x_z1, p_x_z1};
        StrategyBoundInput b{p_y_x * p_x_z2, p_x_z2};
        auto cmp = compare_strategies(a, b, p_y_x);
        CHECK(cmp.order == StrategyOrder::a_tighter);
        CHECK(cmp.interval_a.strict_subset_of(cmp.interval_b));
        // Interval width is exactly 1 - P(x|z) (up to double rounding).
        CHECK(cmp.interval_a.width() == doctest::Approx(1.0 - p_x_z1).epsilon(1e-12));
        CHECK(cmp.interval_b.width() == doctest::Approx(1.0 - p_x_z2).epsilon(1e-12));
    }
}

TEST_CASE("width is strictly decreasing in P(x|z) for fixed P(y|x)") {
    double p_y_x = 0.4;
    double prev_width = 2.0;
    for (double p_x_z = 0.1; p_x_z <= 0.95; p_x_z += 0.05) {
        auto iv = intervened_bound({p_y_x * p_x_z, p_x_z});
        CHECK(iv.width() < prev_width);
        prev_width = iv.width();
    }
}
