#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "genint/errors.hpp"

namespace genint {

namespace iv_detail {
inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}
inline double covariance(const std::vector<double>& a, const std::vector<double>& b, double ma, double mb) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(a.size() - 1);
}
}  // namespace iv_detail

struct IvEstimate {
    double b_hat = 0.0;
    double cov_zy = 0.0;
    double cov_zx = 0.0;
    int64_t n = 0;
};

// Covariance-ratio estimate of the causal coefficient under the linear
// model: b = cov(z, y) / cov(z, x). A weak-instrument floor on |cov(z, x)|
// turns near-zero denominators into an error instead of a garbage estimate.
// The floor combines a fixed fraction of std(z) std(x) with the 4-sigma
// sampling band of the covariance under independence, so a disconnected
// instrument trips at any sample size.
inline IvEstimate linear_iv_estimate(const std::vector<double>& z, const std::vector<double>& x,
                                     const std::vector<double>& y, double weak_floor_scale = 1e-3) {
    if (z.size() != x.size() || z.size() != y.size())
        throw ValidationError("linear_iv_estimate: column lengths disagree");
    if (z.size() < 3) throw InsufficientDataError("linear_iv_estimate: need at least 3 samples");
    const double mz = iv_detail::mean(z), mx = iv_detail::mean(x), my = iv_detail::mean(y);
    IvEstimate est;
    est.n = static_cast<int64_t>(z.size());
    est.cov_zx = iv_detail::covariance(z, x, mz, mx);
    est.cov_zy = iv_detail::covariance(z, y, mz, my);
    const double sz = std::sqrt(iv_detail::covariance(z, z, mz, mz));
    const double sx = std::sqrt(iv_detail::covariance(x, x, mx, mx));
    const double sampling_band = 4.0 * sz * sx / std::sqrt(static_cast<double>(z.size()));
    const double floor = std::max(weak_floor_scale * sz * sx, sampling_band);
    if (std::fabs(est.cov_zx) < floor)
        throw WeakInstrumentError("linear_iv_estimate: |cov(z,x)| = " + std::to_string(std::fabs(est.cov_zx)) +
                                  " below the weak-instrument floor " + std::to_string(floor));
    est.b_hat = est.cov_zy / est.cov_zx;
    return est;
}

}  // namespace genint
