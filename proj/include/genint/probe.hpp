#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "genint/dataset.hpp"
#include "genint/optim.hpp"
#include "genint/tape.hpp"
#include "genint/tensor_ops.hpp"

namespace genint {

// ---- nuisance regressor: image -> z ----------------------------------------

struct RegressorConfig {
    int hidden = 256;
    double lr = 1e-3;
    int epochs = 10;
    int batch = 128;
    double val_frac = 0.2;
    uint64_t seed = 1;
};

struct Regressor {
    int input_dim = 0;
    int out_dim = 0;
    int hidden = 256;
    Tensor w1, b1, w2, b2;
    bool trained = false;
};

struct RegressorReport {
    Regressor model;
    double train_mae = 0.0;
    double val_mae = 0.0;
    double mean_predictor_mae = 0.0;  // baseline: always predict the mean z
};

inline Tensor regressor_predict(const Regressor& r, const Tensor& x_flat) {
    if (x_flat.dim(1) != r.input_dim) throw DimensionError("regressor: input width mismatch");
    Tensor h = relu(affine_forward(x_flat, r.w1, r.b1));
    return affine_forward(h, r.w2, r.b2);
}

namespace probe_detail {
inline double mae(const Tensor& pred, const Tensor& target) {
    double s = 0.0;
    for (int64_t i = 0; i < pred.numel(); ++i) s += std::fabs(static_cast<double>(pred[i]) - target[i]);
    return s / static_cast<double>(pred.numel());
}
}  // namespace probe_detail

// Trains an MLP with L1 loss to predict the recorded intervention vector z
// from the generated image. Reports train/validation MAE next to the
// mean-predictor baseline.
inline RegressorReport nuisance_regressor_train(const LabeledImageSet& x_int, const RegressorConfig& cfg) {
    if (!x_int.nuisance) throw ConfigError("nuisance_regressor_train: dataset carries no nuisance annotations");
    const int64_t n = x_int.size();
    if (n < 4) throw InsufficientDataError("nuisance_regressor_train: too few samples");
    const Tensor& z = *x_int.nuisance;
    Tensor flat = x_int.flat_images();
    const int input_dim = static_cast<int>(flat.dim(1));
    const int out_dim = static_cast<int>(z.dim(1));

    std::vector<int64_t> order(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    Rng split_rng(mix_seed(cfg.seed, 0x4e91));
    split_rng.shuffle(order);
    int64_t n_val = std::max<int64_t>(1, static_cast<int64_t>(cfg.val_frac * n));
    std::vector<int64_t> val_idx(order.begin(), order.begin() + n_val);
    std::vector<int64_t> train_idx(order.begin() + n_val, order.end());

    RegressorReport report;
    Regressor& model = report.model;
    model.input_dim = input_dim;
    model.out_dim = out_dim;
    model.hidden = cfg.hidden;
    Rng rng(mix_seed(cfg.seed, 0x4e92));
    auto glorot = [&rng](int64_t in, int64_t out) {
        Tensor t(Shape{in, out});
        double s = std::sqrt(2.0 / static_cast<double>(in + out));
        for (auto& v : t.storage()) v = static_cast<float>(rng.normal() * s);
        return t;
    };
    model.w1 = glorot(input_dim, cfg.hidden);
    model.b1 = Tensor(Shape{cfg.hidden});
    model.w2 = glorot(cfg.hidden, out_dim);
    model.b2 = Tensor(Shape{out_dim});

    Adam opt(AdamConfig{.lr = cfg.lr});
    std::vector<std::pair<std::string, Tensor*>> params = {
        {"w1", &model.w1}, {"b1", &model.b1}, {"w2", &model.w2}, {"b2", &model.b2}};
    for (auto& [name, ptr] : params) opt.add_param(name, *ptr);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng erng(mix_seed(cfg.seed, 0x5710 + static_cast<uint64_t>(epoch)));
        erng.shuffle(train_idx);
        const int64_t steps = (static_cast<int64_t>(train_idx.size()) + cfg.batch - 1) / cfg.batch;
        for (int64_t s = 0; s < steps; ++s) {
            int64_t lo = s * cfg.batch;
            int64_t hi = std::min<int64_t>(lo + cfg.batch, static_cast<int64_t>(train_idx.size()));
            std::vector<int64_t> idx(train_idx.begin() + lo, train_idx.begin() + hi);
            Tensor xb = gather_rows(flat, idx);
            Tensor zb = gather_rows(z, idx);
            Tape tape;
            Var w1 = tape.leaf(model.w1), b1 = tape.leaf(model.b1);
            Var w2 = tape.leaf(model.w2), b2 = tape.leaf(model.b2);
            Var h = tape.relu(tape.affine(tape.constant(xb), w1, b1));
            Var pred = tape.affine(h, w2, b2);
            Var loss = tape.l1_loss(pred, zb);
            if (!std::isfinite(tape.scalar(loss)))
                throw TrainingError("nuisance_regressor_train: loss diverged at epoch " + std::to_string(epoch));
            tape.backward(loss);
            std::vector<Tensor*> ptrs = {&model.w1, &model.b1, &model.w2, &model.b2};
            std::vector<const Tensor*> grads = {&tape.grad(w1), &tape.grad(b1), &tape.grad(w2), &tape.grad(b2)};
            opt.step(ptrs, grads);
        }
    }
    model.trained = true;

    Tensor train_x = gather_rows(flat, train_idx);
    Tensor train_z = gather_rows(z, train_idx);
    Tensor val_x = gather_rows(flat, val_idx);
    Tensor val_z = gather_rows(z, val_idx);
    report.train_mae = probe_detail::mae(regressor_predict(model, train_x), train_z);
    report.val_mae = probe_detail::mae(regressor_predict(model, val_x), val_z);
    Tensor mean_pred(val_z.shape());
    for (int64_t j = 0; j < out_dim; ++j) {
        double m = 0.0;
        for (int64_t i = 0; i < train_z.dim(0); ++i) m += train_z[i * out_dim + j];
        m /= static_cast<double>(train_z.dim(0));
        for (int64_t i = 0; i < mean_pred.dim(0); ++i) mean_pred[i * out_dim + j] = static_cast<float>(m);
    }
    report.mean_predictor_mae = probe_detail::mae(mean_pred, val_z);
    return report;
}

// ---- correlation probe: z -> y ----------------------------------------------

struct ProbeConfig {
    int hidden = 128;     // two hidden layers of this width
    double lr = 1e-3;
    int epochs = 60;
    int batch = 128;
    double train_frac = 0.8;
    uint64_t seed = 1;
};

struct ProbeResult {
    double heldout_accuracy = 0.0;
    double chance = 0.0;
    double times_over_chance = 0.0;
    int subset_size = 0;
    int64_t train_count = 0;
    int64_t heldout_count = 0;
};

// Trains a small MLP from nuisance vectors to labels on the classes
// {0..subset_size-1} and reports held-out accuracy divided by chance. A ratio
// near 1 means the nuisances carry no label information.
inline ProbeResult correlation_probe(const Tensor& z_values, const std::vector<int>& labels, int subset_size,
                                     const ProbeConfig& cfg) {
    if (subset_size < 2) throw ValidationError("correlation_probe: subset size must be >= 2");
    if (z_values.ndim() != 2 || static_cast<int64_t>(labels.size()) != z_values.dim(0))
        throw DimensionError("correlation_probe: z/label shapes disagree");
    std::vector<int64_t> keep;
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < subset_size) keep.push_back(static_cast<int64_t>(i));
    if (keep.size() < 10)
        throw InsufficientDataError("correlation_probe: only " + std::to_string(keep.size()) +
                                    " samples in the chosen subset");
    Rng rng(mix_seed(cfg.seed, 0x9a0b));
    rng.shuffle(keep);
    int64_t n_train = static_cast<int64_t>(cfg.train_frac * static_cast<double>(keep.size()));
    n_train = std::max<int64_t>(1, std::min<int64_t>(n_train, static_cast<int64_t>(keep.size()) - 1));
    std::vector<int64_t> train_idx(keep.begin(), keep.begin() + n_train);
    std::vector<int64_t> held_idx(keep.begin() + n_train, keep.end());

    const int64_t d = z_values.dim(1);
    Tensor w1, b1, w2, b2, w3, b3;
    Rng init_rng(mix_seed(cfg.seed, 0x9a0c));
    auto glorot = [&init_rng](int64_t in, int64_t out) {
        Tensor t(Shape{in, out});
        double s = std::sqrt(2.0 / static_cast<double>(in + out));
        for (auto& v : t.storage()) v = static_cast<float>(init_rng.normal() * s);
        return t;
    };
    w1 = glorot(d, cfg.hidden);
    b1 = Tensor(Shape{cfg.hidden});
    w2 = glorot(cfg.hidden, cfg.hidden);
    b2 = Tensor(Shape{cfg.hidden});
    w3 = glorot(cfg.hidden, subset_size);
    b3 = Tensor(Shape{subset_size});

    Adam opt(AdamConfig{.lr = cfg.lr});
    std::vector<std::pair<std::string, Tensor*>> params = {{"w1", &w1}, {"b1", &b1}, {"w2", &w2},
                                                           {"b2", &b2}, {"w3", &w3}, {"b3", &b3}};
    for (auto& [name, ptr] : params) opt.add_param(name, *ptr);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng erng(mix_seed(cfg.seed, 0xab31 + static_cast<uint64_t>(epoch)));
        erng.shuffle(train_idx);
        const int64_t steps = (static_cast<int64_t>(train_idx.size()) + cfg.batch - 1) / cfg.batch;
        for (int64_t s = 0; s < steps; ++s) {
            int64_t lo = s * cfg.batch;
            int64_t hi = std::min<int64_t>(lo + cfg.batch, static_cast<int64_t>(train_idx.size()));
            std::vector<int64_t> idx(train_idx.begin() + lo, train_idx.begin() + hi);
            Tensor zb = gather_rows(z_values, idx);
            std::vector<int> yb(idx.size());
            for (size_t i = 0; i < idx.size(); ++i) yb[i] = labels[static_cast<size_t>(idx[i])];
            Tape tape;
            Var v1 = tape.leaf(w1), vb1 = tape.leaf(b1), v2 = tape.leaf(w2), vb2 = tape.leaf(b2),
                v3 = tape.leaf(w3), vb3 = tape.leaf(b3);
            Var h1 = tape.relu(tape.affine(tape.constant(zb), v1, vb1));
            Var h2 = tape.relu(tape.affine(h1, v2, vb2));
            Var logits = tape.affine(h2, v3, vb3);
            Var loss = tape.softmax_cross_entropy(logits, yb);
            tape.backward(loss);
            std::vector<Tensor*> ptrs = {&w1, &b1, &w2, &b2, &w3, &b3};
            std::vector<const Tensor*> grads = {&tape.grad(v1), &tape.grad(vb1), &tape.grad(v2),
                                                &tape.grad(vb2), &tape.grad(v3), &tape.grad(vb3)};
            opt.step(ptrs, grads);
        }
    }

    Tensor held_z = gather_rows(z_values, held_idx);
    Tensor h1 = relu(affine_forward(held_z, w1, b1));
    Tensor h2 = relu(affine_forward(h1, w2, b2));
    Tensor logits = affine_forward(h2, w3, b3);
    int64_t hits = 0;
    for (size_t i = 0; i < held_idx.size(); ++i) {
        int best = 0;
        float best_v = logits[static_cast<int64_t>(i) * subset_size];
        for (int j = 1; j < subset_size; ++j) {
            float v = logits[static_cast<int64_t>(i) * subset_size + j];
            if (v > best_v) {
                best_v = v;
                best = j;
            }
        }
        if (best == labels[static_cast<size_t>(held_idx[i])]) ++hits;
    }
    ProbeResult result;
    result.subset_size = subset_size;
    result.train_count = n_train;
    result.heldout_count = static_cast<int64_t>(held_idx.size());
    result.heldout_accuracy = static_cast<double>(hits) / static_cast<double>(held_idx.size());
    result.chance = 1.0 / static_cast<double>(subset_size);
    result.times_over_chance = result.heldout_accuracy / result.chance;
    return result;
}

}  // namespace genint
