#include <doctest.h>

#include <cmath>

#include "genint/colored_mnist.hpp"
#include "genint/probe.hpp"

using namespace genint;

namespace {
// z vectors that deterministically encode the label (one-hot color with two
// colors per class).
std::pair<Tensor, std::vector<int>> color_determined(int64_t n, uint64_t seed) {
    Rng rng(seed);
    Tensor z(Shape{n, 20});
    std::vector<int> labels(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        int y = static_cast<int>(i % 10);
        labels[static_cast<size_t>(i)] = y;
        int color = 2 * y + static_cast<int>(rng.uniform_int(2));
        z[i * 20 + color] = 1.0f;
    }
    return {std::move(z), std::move(labels)};
}

std::pair<Tensor, std::vector<int>> label_independent(int64_t n, uint64_t seed) {
    Rng rng(seed);
    Tensor z(Shape{n, 4});
    std::vector<int> labels(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        labels[static_cast<size_t>(i)] = static_cast<int>(i % 10);
        for (int64_t j = 0; j < 4; ++j) z[i * 4 + j] = static_cast<float>(rng.uniform(-3.0, 3.0));
    }
    return {std::move(z), std::move(labels)};
}
}  // namespace

TEST_CASE("label-independent z probes to chance") {
    auto [z, labels] = label_independent(3000, 7);
    ProbeConfig cfg;
    cfg.epochs = 30;
    auto result = correlation_probe(z, labels, 10, cfg);
    CHECK(result.times_over_chance == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("deterministic color-to-label z reaches the probe ceiling") {
    auto [z, labels] = color_determined(3000, 9);
    ProbeConfig cfg;
    auto result = correlation_probe(z, labels, 10, cfg);
    CHECK(result.times_over_chance >= 5.0);
    CHECK(result.heldout_accuracy > 0.9);
}

TEST_CASE("bracketing: ratio near 1 on independent z, near ceiling on determined z") {
    for (int subset : {2, 5, 10}) {
        auto [zi, li] = label_independent(3000, 11 + subset);
        auto r_indep = correlation_probe(zi, li, subset, ProbeConfig{.epochs = 30});
        CHECK(r_indep.times_over_chance >= 1.0 - 0.25);
        CHECK(r_indep.times_over_chance <= 1.0 + 0.35);
        auto [zd, ld] = color_determined(3000, 17 + subset);
        auto r_det = correlation_probe(zd, ld, subset, ProbeConfig{});
        CHECK(r_det.times_over_chance >= 0.9 * subset);
    }
}

TEST_CASE("probe input validation") {
    auto [z, labels] = label_independent(100, 3);
    CHECK_THROWS_AS(correlation_probe(z, labels, 1, ProbeConfig{}), ValidationError);
    std::vector<int> short_labels(50, 0);
    CHECK_THROWS_AS(correlation_probe(z, short_labels, 5, ProbeConfig{}), DimensionError);
}

TEST_CASE("nuisance regressor: constant target converges to it") {
    Rng rng(13);
    LabeledImageSet set;
    set.images = Tensor(Shape{200, 6, 6, 1});
    for (auto& v : set.images.storage()) v = static_cast<float>(rng.uniform());
    set.labels.assign(200, 0);
    set.num_classes = 10;
    Tensor z = Tensor::full(Shape{200, 3}, 1.25f);
    set.nuisance = z;
    RegressorConfig cfg;
    cfg.hidden = 16;
    cfg.epochs = 120;
    cfg.batch = 32;
    cfg.lr = 1e-2;
    auto report = nuisance_regressor_train(set, cfg);
    CHECK(report.val_mae < 0.05);
}

TEST_CASE("nuisance regressor beats the mean predictor on signal-bearing data") {
    // z is recoverable from the image (first pixels carry it).
    Rng rng(17);
    LabeledImageSet set;
    set.images = Tensor(Shape{600, 6, 6, 1});
    Tensor z(Shape{600, 2});
    for (int64_t i = 0; i < 600; ++i) {
        double z0 = rng.uniform(-1.0, 1.0), z1 = rng.uniform(-1.0, 1.0);
        z[i * 2 + 0] = static_cast<float>(z0);
        z[i * 2 + 1] = static_cast<float>(z1);
        for (int64_t j = 0; j < 36; ++j)
            set.images[i * 36 + j] = static_cast<float>(
                std::min(1.0, std::max(0.0, 0.5 + 0.4 * (j % 2 == 0 ? z0 : z1) + 0.02 * rng.normal())));
    }
    set.labels.assign(600, 0);
    set.num_classes = 10;
    set.nuisance = z;
    RegressorConfig cfg;
    cfg.hidden = 32;
    cfg.epochs = 30;
    auto report = nuisance_regressor_train(set, cfg);
    CHECK(report.val_mae < report.mean_predictor_mae * 0.5);
}

TEST_CASE("regressor requires nuisance annotations") {
    LabeledImageSet set;
    set.images = Tensor(Shape{10, 4, 4, 1});
    set.labels.assign(10, 0);
    CHECK_THROWS_AS(nuisance_regressor_train(set, RegressorConfig{}), ConfigError);
}
