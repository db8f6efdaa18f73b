#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genint/colored_mnist.hpp"
#include "genint/cvae.hpp"
#include "genint/latent.hpp"

namespace genint {

// Provenance of one generated sample: the source latent, the intervened
// latent, the class label, and the z vector of signed scales (length top_k,
// zero where the direction was untouched).
struct InterventionRecord {
    std::vector<float> h0;
    std::vector<float> h_star;
    int label = 0;
    std::vector<float> z;
};

enum class LatentSource { prior, encoded };

struct InterventionalSet {
    LabeledImageSet data;
    std::vector<InterventionRecord> records;
};

inline std::pair<Tensor, Tensor> cvae_encode(const LabeledImageSet& set, const Cvae& cvae) {
    return cvae_encode(cvae, set.flat_images(), set.labels);
}

// Manufactures the interventional training set: per class, draw source
// latents (truncated prior, or encoder posteriors of real samples), apply one
// strategy draw each, decode. The z annotations land in data.nuisance and in
// the per-sample records. Fully deterministic given the seed.
inline InterventionalSet generate_interventional_set(const Cvae& cvae, const LatentBasis& basis,
                                                     const InterventionStrategy& strategy, int64_t per_class_n,
                                                     uint64_t seed, LatentSource source = LatentSource::prior,
                                                     const LabeledImageSet* encoded_from = nullptr,
                                                     int64_t image_h = 28, int64_t image_w = 28,
                                                     int64_t image_c = 3) {
    if (per_class_n <= 0) throw ValidationError("generate_interventional_set: per_class_n must be > 0");
    strategy.validate(cvae.cfg.latent_dim);
    if (source == LatentSource::encoded && (encoded_from == nullptr || encoded_from->size() == 0))
        throw InsufficientDataError("generate_interventional_set: encoded source requires a non-empty dataset");
    if (image_h * image_w * image_c != cvae.cfg.input_dim)
        throw DimensionError("generate_interventional_set: image dims do not match the decoder output");

    const int classes = cvae.cfg.num_classes;
    const int64_t d = cvae.cfg.latent_dim;
    const int64_t total = per_class_n * classes;

    Tensor encoded_means;
    std::vector<std::vector<int64_t>> per_class_pool;
    if (source == LatentSource::encoded) {
        auto [mean, logvar] = cvae_encode(*encoded_from, cvae);
        encoded_means = std::move(mean);
        per_class_pool.resize(static_cast<size_t>(classes));
        for (int64_t i = 0; i < encoded_from->size(); ++i)
            per_class_pool[static_cast<size_t>(encoded_from->labels[static_cast<size_t>(i)])].push_back(i);
        for (int c = 0; c < classes; ++c)
            if (per_class_pool[static_cast<size_t>(c)].empty())
                throw InsufficientDataError("generate_interventional_set: class " + std::to_string(c) +
                                            " missing from the encoded source");
    }

    InterventionalSet out;
    out.records.resize(static_cast<size_t>(total));
    Tensor h_star_all(Shape{total, d});
    std::vector<int> labels(static_cast<size_t>(total));
    Tensor nuisance(Shape{total, static_cast<int64_t>(strategy.top_k)});

    for (int y = 0; y < classes; ++y) {
        for (int64_t i = 0; i < per_class_n; ++i) {
            const int64_t row = static_cast<int64_t>(y) * per_class_n + i;
            Rng rng = derive_rng(seed ^ 0x1a7e, static_cast<uint64_t>(row));
            InterventionRecord& rec = out.records[static_cast<size_t>(row)];
            rec.label = y;
            rec.h0.resize(static_cast<size_t>(d));
            if (source == LatentSource::prior) {
                for (int64_t j = 0; j < d; ++j) {
                    double v;
                    do {
                        v = rng.normal();
                    } while (std::fabs(v) > strategy.truncation);
                    rec.h0[static_cast<size_t>(j)] = static_cast<float>(v);
                }
            } else {
                const auto& pool = per_class_pool[static_cast<size_t>(y)];
                int64_t pick = pool[static_cast<size_t>(rng.uniform_int(static_cast<int64_t>(pool.size())))];
                for (int64_t j = 0; j < d; ++j) rec.h0[static_cast<size_t>(j)] = encoded_means[pick * d + j];
            }
            StrategyDraw draw = sample_strategy_draw(strategy, basis, rng);
            Tensor h(Shape{d});
            for (int64_t j = 0; j < d; ++j) h[j] = rec.h0[static_cast<size_t>(j)];
            rec.z.assign(static_cast<size_t>(strategy.top_k), 0.0f);
            for (size_t k = 0; k < draw.directions.size(); ++k) {
                h = apply_intervention(h, basis, draw.directions[k], draw.s_prime[k], strategy.offset_mode);
                rec.z[static_cast<size_t>(draw.directions[k] - 1)] = static_cast<float>(draw.s_prime[k]);
            }
            rec.h_star.assign(h.storage().begin(), h.storage().end());
            for (int64_t j = 0; j < d; ++j) h_star_all[row * d + j] = h[j];
            labels[static_cast<size_t>(row)] = y;
            for (int k = 0; k < strategy.top_k; ++k)
                nuisance[row * strategy.top_k + k] = rec.z[static_cast<size_t>(k)];
        }
    }

    // Batched decode of all intervened latents.
    Tensor images(Shape{total, image_h, image_w, image_c});
    const int64_t batch = 256;
    for (int64_t lo = 0; lo < total; lo += batch) {
        int64_t hi = std::min(total, lo + batch);
        std::vector<int64_t> idx;
        for (int64_t i = lo; i < hi; ++i) idx.push_back(i);
        Tensor hb = gather_rows(h_star_all, idx);
        std::vector<int> yb(labels.begin() + lo, labels.begin() + hi);
        Tensor flat = cvae_decode(cvae, hb, yb);
        const int64_t p = cvae.cfg.input_dim;
        for (int64_t i = lo; i < hi; ++i)
            for (int64_t j = 0; j < p; ++j) images[i * p + j] = flat[(i - lo) * p + j];
    }

    out.data.images = std::move(images);
    out.data.labels = std::move(labels);
    out.data.nuisance = std::move(nuisance);
    out.data.num_classes = classes;
    out.data.palette_id = "generated";
    return out;
}

// Desk-scale transfer of the intervention to the natural set: every gray
// source digit is re-rendered over a background color drawn uniformly from
// the palette, independent of its label. Labels are unchanged; the nuisance
// records the new color.
inline LabeledImageSet transfer_intervention(const LabeledImageSet& gray_source, const ColorPalette& palette,
                                             uint64_t seed) {
    if (gray_source.size() == 0) throw ValidationError("transfer_intervention: missing gray source");
    return synth_colored_mnist(gray_source, palette, ColorMode::test_causal, seed);
}

}  // namespace genint
