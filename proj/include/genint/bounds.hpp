#pragma once

#include <cmath>
#include <string>

#include "genint/errors.hpp"

namespace genint {

// Interval guaranteed to contain P(y|do(x)).
struct CausalInterval {
    double lower = 0.0;
    double upper = 1.0;

    double width() const { return upper - lower; }

    bool contains(double p, double slack = 0.0) const { return p >= lower - slack && p <= upper + slack; }

    // Strict nesting, the "subset" conclusion of the strategy comparison.
    bool strict_subset_of(const CausalInterval& other) const { return lower > other.lower && upper < other.upper; }

    void validate() const {
        if (!(0.0 <= lower && lower <= upper && upper <= 1.0 + 1e-12))
            throw ValidationError("causal interval: [" + std::to_string(lower) + ", " + std::to_string(upper) +
                                  "] is not a probability interval");
    }
};

// Identification bound from the observed joint alone:
// [P(x,y), P(x,y) + 1 - P(x)].
inline CausalInterval natural_bound(double p_xy, double p_x) {
    if (!(0.0 <= p_xy && p_xy <= 1.0) || !(0.0 <= p_x && p_x <= 1.0))
        throw ValidationError("natural_bound: inputs must be probabilities");
    if (p_xy > p_x + 1e-12)
        throw ValidationError("natural_bound: P(x,y)=" + std::to_string(p_xy) + " exceeds P(x)=" +
                              std::to_string(p_x));
    CausalInterval out{p_xy, p_xy + 1.0 - p_x};
    out.validate();
    return out;
}

// Inputs of the post-intervention bound for one strategy z.
struct StrategyBoundInput {
    double p_yx_given_z = 0.0;  // P(y, x | z)
    double p_x_given_z = 0.0;   // P(x | z)

    void validate() const {
        if (!(0.0 <= p_yx_given_z && p_yx_given_z <= p_x_given_z + 1e-12 && p_x_given_z <= 1.0))
            throw ValidationError("strategy bound input: need 0 <= P(y,x|z) <= P(x|z) <= 1, got P(y,x|z)=" +
                                  std::to_string(p_yx_given_z) + ", P(x|z)=" + std::to_string(p_x_given_z));
    }
};

// [P(y,x|z), P(y,x|z) + 1 - P(x|z)]: tighter as P(x|z) grows.
inline CausalInterval intervened_bound(const StrategyBoundInput& input) {
    input.validate();
    CausalInterval out{input.p_yx_given_z, input.p_yx_given_z + 1.0 - input.p_x_given_z};
    out.validate();
    return out;
}

enum class StrategyOrder { a_tighter, b_tighter, equal };

struct StrategyComparison {
    StrategyOrder order = StrategyOrder::equal;
    CausalInterval interval_a;
    CausalInterval interval_b;
};

// Compares two intervention strategies consistent with the same P(y|x): the
// one with larger P(x|z) yields the nested (tighter) interval. The nesting is
// asserted before returning.
inline StrategyComparison compare_strategies(const StrategyBoundInput& a, const StrategyBoundInput& b,
                                             double p_y_given_x) {
    if (!(0.0 <= p_y_given_x && p_y_given_x <= 1.0))
        throw ValidationError("compare_strategies: P(y|x) must be a probability");
    for (const auto* input : {&a, &b}) {
        input->validate();
        double implied = p_y_given_x * input->p_x_given_z;
        if (std::fabs(implied - input->p_yx_given_z) > 1e-9)
            throw ValidationError("compare_strategies: P(y,x|z)=" + std::to_string(input->p_yx_given_z) +
                                  " inconsistent with P(y|x)*P(x|z)=" + std::to_string(implied));
    }
    StrategyComparison out;
    out.interval_a = intervened_bound(a);
    out.interval_b = intervened_bound(b);
    if (a.p_x_given_z > b.p_x_given_z) {
        out.order = StrategyOrder::a_tighter;
        if (0.0 < p_y_given_x && p_y_given_x < 1.0 && !out.interval_a.strict_subset_of(out.interval_b))
            throw ValidationError("compare_strategies: expected the tighter interval to nest strictly");
    } else if (b.p_x_given_z > a.p_x_given_z) {
        out.order = StrategyOrder::b_tighter;
        if (0.0 < p_y_given_x && p_y_given_x < 1.0 && !out.interval_b.strict_subset_of(out.interval_a))
            throw ValidationError("compare_strategies: expected the tighter interval to nest strictly");
    } else {
        out.order = StrategyOrder::equal;
    }
    return out;
}

}  // namespace genint
