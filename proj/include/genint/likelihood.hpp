#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "genint/classifier.hpp"
#include "genint/parallel.hpp"
#include "genint/tensor.hpp"

namespace genint {

// Unit-normalized penultimate activations of the baseline classifier, the
// feature space in which the likelihood of real data under an intervention is
// scored.
inline Tensor feature_extract(const Classifier& model, const Tensor& images_flat) {
    if (!model.trained) throw ValidationError("feature_extract: classifier is untrained");
    Tensor features = classifier_penultimate(model, images_flat);
    const int64_t n = features.dim(0), d = features.dim(1);
    for (int64_t i = 0; i < n; ++i) {
        double norm = 0.0;
        for (int64_t j = 0; j < d; ++j) norm += static_cast<double>(features[i * d + j]) * features[i * d + j];
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            // A dead feature row normalizes to the first axis.
            features[i * d] = 1.0f;
            continue;
        }
        for (int64_t j = 0; j < d; ++j) features[i * d + j] = static_cast<float>(features[i * d + j] / norm);
    }
    return features;
}

struct LikelihoodReport {
    std::vector<double> nearest_distance;  // per query, to the nearest generated sample
    std::vector<double> contribution;      // per query, log P(x_i | z) <= 0
    double total = 0.0;
    double tau = 1.0;

    double mean() const {
        return contribution.empty() ? 0.0 : total / static_cast<double>(contribution.size());
    }
};

// log P(x|z) = sum_i log P(x_i|z) with P(x_i|z) approximated by the nearest
// generated sample under a Gaussian kernel on unit-normalized features:
// contribution_i = -min_j ||f(x_i) - f(x'_j)||^2 / (2 tau^2). The generator
// is deterministic given the intervention, so P(x'_j|z) = 1 and the kernel
// value is capped at 1 (contribution at 0).
inline LikelihoodReport estimate_log_px_given_z(const Tensor& query_features, const Tensor& generated_features,
                                                double tau = 1.0) {
    if (!(tau > 0.0)) throw ValidationError("estimate_log_px_given_z: tau must be > 0");
    if (query_features.ndim() != 2 || generated_features.ndim() != 2 ||
        query_features.dim(1) != generated_features.dim(1))
        throw DimensionError("estimate_log_px_given_z: feature dims disagree");
    if (query_features.dim(0) == 0 || generated_features.dim(0) == 0)
        throw ValidationError("estimate_log_px_given_z: empty feature set");
    const int64_t nq = query_features.dim(0), ng = generated_features.dim(0), d = query_features.dim(1);
    LikelihoodReport report;
    report.tau = tau;
    report.nearest_distance.resize(static_cast<size_t>(nq));
    report.contribution.resize(static_cast<size_t>(nq));
    const float* q = query_features.data();
    const float* g = generated_features.data();
    parallel_chunks(nq, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            const float* qi = q + i * d;
            double best = 1e300;
            for (int64_t j = 0; j < ng; ++j) {
                const float* gj = g + j * d;
                double dist = 0.0;
                for (int64_t k = 0; k < d; ++k) {
                    double diff = static_cast<double>(qi[k]) - static_cast<double>(gj[k]);
                    dist += diff * diff;
                }
                if (dist < best) best = dist;
            }
            report.nearest_distance[static_cast<size_t>(i)] = std::sqrt(best);
            report.contribution[static_cast<size_t>(i)] = -best / (2.0 * tau * tau);
        }
    }, 8);
    double total = 0.0;
    for (double c : report.contribution) total += c;
    report.total = total;
    return report;
}

}  // namespace genint
