#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "genint/rng.hpp"
#include "genint/tensor.hpp"

namespace genint {

struct NamedParam {
    std::string name;
    Tensor* tensor;
};

struct GradCheckReport {
    double max_rel_err = 0.0;
    int64_t coords_checked = 0;
    int64_t coords_skipped_nonsmooth = 0;
    std::string worst_param;
    int64_t worst_index = -1;
    bool passed(double tol) const { return coords_checked > 0 && max_rel_err < tol; }
};

namespace detail {
inline double rel_err(double a, double c, double floor) {
    double denom = std::max({std::fabs(a), std::fabs(c), floor});
    return std::fabs(a - c) / denom;
}
}  // namespace detail

// Central-difference gradient check against caller-supplied analytic
// gradients. `loss` must re-evaluate the objective at the parameters' current
// values and return a 64-bit scalar; build it on a precise tape
// (Tape{true}) so the difference quotient is not drowned by float32 storage
// rounding. Coordinates are subsampled per parameter.
//
// Two guards keep the check meaningful with float32 parameters and gradients:
//   - the relative-error denominator is floored at noise_floor_scale times
//     the RMS of the parameter's analytic gradient, which is the resolution
//     float32 backward arithmetic can certify (a systematically wrong
//     gradient still fails on every coordinate above the floor);
//   - coordinates whose half-step difference quotient disagrees with the
//     full-step quotient carry a non-differentiable kink inside the probing
//     interval (relu crossings); they are skipped and counted separately. A
//     wrong gradient on a smooth coordinate still fails, because there the
//     two quotients agree with each other while disagreeing with the
//     analytic value.
inline GradCheckReport finite_difference_check_with_grads(const std::vector<NamedParam>& params,
                                                          const std::function<double()>& loss,
                                                          const std::vector<Tensor>& analytic,
                                                          double step = 1e-3,
                                                          int64_t samples_per_param = 8,
                                                          uint64_t seed = 0x9d5ec,
                                                          double noise_floor_scale = 5e-3) {
    if (step <= 0.0) throw ValidationError("finite_difference_check: step must be > 0");
    if (params.size() != analytic.size())
        throw ValidationError("finite_difference_check: gradient count mismatch");
    GradCheckReport report;
    const double loss0 = loss();
    if (!std::isfinite(loss0)) throw NonFiniteError("finite_difference_check: loss is not finite");
    Rng rng(seed);
    for (size_t p = 0; p < params.size(); ++p) {
        Tensor& theta = *params[p].tensor;
        const Tensor& g = analytic[p];
        require_same_shape(theta, g, "finite_difference_check gradient");
        const int64_t n = theta.numel();
        if (n == 0) continue;
        double sq = 0.0;
        for (int64_t i = 0; i < n; ++i) sq += static_cast<double>(g[i]) * static_cast<double>(g[i]);
        const double floor = std::max(1e-8, noise_floor_scale * std::sqrt(sq / static_cast<double>(n)));
        int64_t want = std::min<int64_t>(samples_per_param, n);
        int64_t attempts = 0;
        int64_t done = 0;
        const int64_t max_attempts = want * 4 + 8;
        while (done < want && attempts < max_attempts) {
            ++attempts;
            int64_t idx = n <= samples_per_param ? (attempts - 1) % n : rng.uniform_int(n);
            const float orig = theta[idx];
            const float plus = static_cast<float>(static_cast<double>(orig) + step);
            const float minus = static_cast<float>(static_cast<double>(orig) - step);
            theta[idx] = plus;
            const double lp = loss();
            theta[idx] = minus;
            const double lm = loss();
            theta[idx] = orig;
            if (!std::isfinite(lp) || !std::isfinite(lm))
                throw NonFiniteError("finite_difference_check: loss is not finite at perturbed point");
            // Use the realized (rounded-to-float) step width.
            const double h2 = static_cast<double>(plus) - static_cast<double>(minus);
            const double central = (lp - lm) / h2;
            const double err = detail::rel_err(g[idx], central, floor);
            if (err >= 1e-4) {
                // Smoothness probes. A kink strictly inside one half of the
                // probing interval shifts the half-step quotient against the
                // full-step one; a kink at the evaluation point itself leaves
                // the quotients agreeing but blows up the second difference.
                const float plus2 = static_cast<float>(static_cast<double>(orig) + 0.5 * step);
                const float minus2 = static_cast<float>(static_cast<double>(orig) - 0.5 * step);
                theta[idx] = plus2;
                const double lp2 = loss();
                theta[idx] = minus2;
                const double lm2 = loss();
                theta[idx] = orig;
                const double central2 = (lp2 - lm2) / (static_cast<double>(plus2) - static_cast<double>(minus2));
                const bool quotient_shift =
                    std::fabs(central2 - central) > 0.05 * (std::fabs(central) + std::fabs(central2) + floor);
                const double curvature = std::fabs(lp + lm - 2.0 * loss0);
                const double span = std::max(std::fabs(lp - loss0), std::fabs(lm - loss0));
                const bool curvature_spike = span > 0.0 && curvature > 0.25 * span;
                if (quotient_shift || curvature_spike) {
                    ++report.coords_skipped_nonsmooth;
                    continue;
                }
            }
            ++done;
            ++report.coords_checked;
            if (err > report.max_rel_err) {
                report.max_rel_err = err;
                report.worst_param = params[p].name;
                report.worst_index = idx;
            }
        }
    }
    return report;
}

// Convenience overload: computes the analytic gradients with `grads` (one
// backward pass) and then compares.
inline GradCheckReport finite_difference_check(const std::vector<NamedParam>& params,
                                               const std::function<double()>& loss,
                                               const std::function<std::vector<Tensor>()>& grads,
                                               double step = 1e-3,
                                               int64_t samples_per_param = 8,
                                               uint64_t seed = 0x9d5ec) {
    return finite_difference_check_with_grads(params, loss, grads(), step, samples_per_param, seed);
}

}  // namespace genint
