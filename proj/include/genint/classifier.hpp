#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "genint/bundle.hpp"
#include "genint/dataset.hpp"
#include "genint/optim.hpp"
#include "genint/tape.hpp"
#include "genint/tensor_ops.hpp"

namespace genint {

// MLP classifier: input -> hidden relu (the feature layer) -> logits.
struct Classifier {
    int input_dim = 2352;
    int hidden = 256;
    int num_classes = 10;
    Tensor w1, b1, w2, b2;
    bool trained = false;

    static Classifier init(int input_dim, int hidden, int num_classes, uint64_t seed) {
        Classifier c;
        c.input_dim = input_dim;
        c.hidden = hidden;
        c.num_classes = num_classes;
        Rng rng(mix_seed(seed, 0xc1a5));
        auto glorot = [&rng](int64_t in, int64_t out) {
            Tensor t(Shape{in, out});
            double s = std::sqrt(2.0 / static_cast<double>(in + out));
            for (auto& v : t.storage()) v = static_cast<float>(rng.normal() * s);
            return t;
        };
        c.w1 = glorot(input_dim, hidden);
        c.b1 = Tensor(Shape{hidden});
        c.w2 = glorot(hidden, num_classes);
        c.b2 = Tensor(Shape{num_classes});
        return c;
    }

    std::vector<std::pair<std::string, Tensor*>> named_params() {
        return {{"w1", &w1}, {"b1", &b1}, {"w2", &w2}, {"b2", &b2}};
    }
};

inline Tensor classifier_penultimate(const Classifier& c, const Tensor& x_flat) {
    if (x_flat.ndim() != 2 || x_flat.dim(1) != c.input_dim)
        throw DimensionError("classifier: expected [n," + std::to_string(c.input_dim) + "] input, got " +
                             shape_str(x_flat.shape()));
    return relu(affine_forward(x_flat, c.w1, c.b1));
}

inline Tensor classifier_logits(const Classifier& c, const Tensor& x_flat) {
    return affine_forward(classifier_penultimate(c, x_flat), c.w2, c.b2);
}

struct TrainConfig {
    double lambda1 = 0.0;  // weight of the generated-data term
    double lambda2 = 0.0;  // weight of the transferred-data term
    bool use_original_data = true;
    int batch_x = 128;
    int batch_int = 128;
    int batch_itr = 128;
    int hidden = 256;
    double lr = 1e-3;
    int epochs = 10;
    uint64_t seed = 1;

    void validate() const {
        if (lambda1 < 0.0 || lambda2 < 0.0) throw ConfigError("train config: lambda1/lambda2 must be >= 0");
        if (epochs < 0 || hidden < 1) throw ConfigError("train config: invalid epochs/hidden");
    }
};

struct TrainTrace {
    std::vector<double> loss_per_step;
};

namespace classify_detail {

// Cycles shuffled epochs of [0, n) deterministically.
class BatchStream {
public:
    BatchStream(int64_t n, int batch, uint64_t seed) : n_(n), batch_(batch), seed_(seed) { reshuffle(); }

    std::vector<int64_t> next() {
        std::vector<int64_t> idx;
        idx.reserve(static_cast<size_t>(batch_));
        for (int i = 0; i < batch_; ++i) {
            if (cursor_ == n_) {
                ++epoch_;
                reshuffle();
            }
            idx.push_back(order_[static_cast<size_t>(cursor_++)]);
        }
        return idx;
    }

private:
    void reshuffle() {
        order_.resize(static_cast<size_t>(n_));
        for (int64_t i = 0; i < n_; ++i) order_[static_cast<size_t>(i)] = i;
        Rng rng(mix_seed(seed_, 0xba7c + static_cast<uint64_t>(epoch_)));
        rng.shuffle(order_);
        cursor_ = 0;
    }
    int64_t n_;
    int batch_;
    uint64_t seed_;
    int64_t epoch_ = 0;
    int64_t cursor_ = 0;
    std::vector<int64_t> order_;
};

struct TermData {
    Tensor flat;
    const std::vector<int>* labels;
    BatchStream stream;
};

}  // namespace classify_detail

// Three-term objective: CE on the original data, plus lambda1 x CE on the
// generated interventional data, plus lambda2 x CE on the transferred data.
// Each step draws one batch per active term and applies one update. With
// use_original_data=false the first term is dropped and the step count runs
// off the generated set.
inline Classifier train_classifier(const LabeledImageSet* x, const LabeledImageSet* x_int,
                                   const LabeledImageSet* x_itr, const TrainConfig& cfg,
                                   TrainTrace* trace = nullptr) {
    cfg.validate();
    struct Term {
        const LabeledImageSet* data;
        double weight;
        int batch;
    };
    std::vector<Term> terms;
    if (cfg.use_original_data) {
        if (x == nullptr || x->size() == 0) throw ConfigError("train_classifier: original-data term has no dataset");
        terms.push_back({x, 1.0, cfg.batch_x});
    }
    if (cfg.lambda1 > 0.0) {
        if (x_int == nullptr || x_int->size() == 0)
            throw ConfigError("train_classifier: lambda1 > 0 but no generated dataset");
        terms.push_back({x_int, cfg.lambda1, cfg.batch_int});
    }
    if (cfg.lambda2 > 0.0) {
        if (x_itr == nullptr || x_itr->size() == 0)
            throw ConfigError("train_classifier: lambda2 > 0 but no transferred dataset");
        terms.push_back({x_itr, cfg.lambda2, cfg.batch_itr});
    }
    if (terms.empty()) throw ConfigError("train_classifier: no active loss term");
    for (const Term& t : terms)
        if (t.batch < 1) throw ConfigError("train_classifier: active term with batch size < 1");

    const int input_dim = static_cast<int>(terms[0].data->pixels_per_image());
    const int classes = terms[0].data->num_classes;
    for (const Term& t : terms)
        if (t.data->pixels_per_image() != input_dim || t.data->num_classes != classes)
            throw ConfigError("train_classifier: datasets disagree on image size or class count");

    Classifier model = Classifier::init(input_dim, cfg.hidden, classes, cfg.seed);
    Adam opt(AdamConfig{.lr = cfg.lr});
    auto params = model.named_params();
    for (auto& [name, ptr] : params) opt.add_param(name, *ptr);

    std::vector<classify_detail::TermData> streams;
    streams.reserve(terms.size());
    for (size_t t = 0; t < terms.size(); ++t)
        streams.push_back({terms[t].data->flat_images(), &terms[t].data->labels,
                           classify_detail::BatchStream(terms[t].data->size(), terms[t].batch,
                                                        mix_seed(cfg.seed, 0x7e20 + t))});

    const int64_t steps_per_epoch = (terms[0].data->size() + terms[0].batch - 1) / terms[0].batch;
    const int64_t total_steps = steps_per_epoch * cfg.epochs;
    for (int64_t step = 0; step < total_steps; ++step) {
        Tape tape;
        std::vector<Var> param_vars;
        for (auto& [name, ptr] : params) param_vars.push_back(tape.leaf(*ptr));
        std::vector<Var> term_losses;
        std::vector<double> term_weights;
        for (size_t t = 0; t < terms.size(); ++t) {
            auto idx = streams[t].stream.next();
            Tensor xb = gather_rows(streams[t].flat, idx);
            std::vector<int> yb(idx.size());
            for (size_t i = 0; i < idx.size(); ++i) yb[i] = (*streams[t].labels)[static_cast<size_t>(idx[i])];
            Var h = tape.relu(tape.affine(tape.constant(xb), param_vars[0], param_vars[1]));
            Var logits = tape.affine(h, param_vars[2], param_vars[3]);
            term_losses.push_back(tape.softmax_cross_entropy(logits, yb));
            term_weights.push_back(terms[t].weight);
        }
        Var loss = tape.weighted_sum(term_losses, term_weights);
        double loss_value = tape.scalar(loss);
        if (!std::isfinite(loss_value))
            throw TrainingError("train_classifier: loss diverged at step " + std::to_string(step));
        if (trace) trace->loss_per_step.push_back(loss_value);
        tape.backward(loss);
        std::vector<Tensor*> ptrs;
        std::vector<const Tensor*> grads;
        for (size_t p = 0; p < params.size(); ++p) {
            ptrs.push_back(params[p].second);
            grads.push_back(&tape.grad(param_vars[p]));
        }
        opt.step(ptrs, grads);
    }
    model.trained = true;
    return model;
}

struct EvalReport {
    double top1 = 0.0;
    std::vector<double> per_class;
    double chance = 0.0;
    int64_t count = 0;
};

// Top-1 accuracy with ties broken toward the lowest class index.
inline EvalReport evaluate(const Classifier& model, const LabeledImageSet& test) {
    if (test.size() == 0) throw ValidationError("evaluate: empty test set");
    Tensor logits = classifier_logits(model, test.flat_images());
    EvalReport r;
    r.count = test.size();
    r.chance = 1.0 / static_cast<double>(model.num_classes);
    r.per_class.assign(static_cast<size_t>(model.num_classes), 0.0);
    std::vector<int64_t> class_counts(static_cast<size_t>(model.num_classes), 0);
    int64_t hits = 0;
    const int64_t c = model.num_classes;
    for (int64_t i = 0; i < test.size(); ++i) {
        int best = 0;
        float best_v = logits[i * c];
        for (int j = 1; j < c; ++j) {
            float v = logits[i * c + j];
            if (v > best_v) {
                best_v = v;
                best = j;
            }
        }
        int truth = test.labels[static_cast<size_t>(i)];
        class_counts[static_cast<size_t>(truth)]++;
        if (best == truth) {
            ++hits;
            r.per_class[static_cast<size_t>(truth)] += 1.0;
        }
    }
    for (int j = 0; j < c; ++j)
        if (class_counts[static_cast<size_t>(j)] > 0)
            r.per_class[static_cast<size_t>(j)] /= static_cast<double>(class_counts[static_cast<size_t>(j)]);
    r.top1 = static_cast<double>(hits) / static_cast<double>(test.size());
    return r;
}

// Scalar-multiplier invariance penalty of one environment, as a tape
// expression: g_e = mean_i sum_j (softmax(l)_ij - y_ij) l_ij is exactly
// d/dw CE_e(w * logits) at w = 1, and the penalty is g_e^2. Building g_e
// from primitive ops keeps the whole objective first-order differentiable.
inline Var irm_penalty(Tape& tape, Var logits, const std::vector<int>& targets, int num_classes) {
    Var probs = tape.softmax(logits);
    Var y = tape.constant(one_hot(targets, num_classes));
    Var diff = tape.sub(probs, y);
    Var per_elem = tape.mul(diff, logits);
    Var g = tape.scale(tape.sum_all(per_elem), 1.0 / static_cast<double>(targets.size()));
    return tape.square(g);
}

struct IrmConfig {
    double penalty_weight = 0.1;
    int warmup_steps = 100;  // steps at penalty weight 1 before the full weight
    int batch_per_env = 128;
    int hidden = 256;
    double lr = 1e-3;
    int epochs = 10;
    uint64_t seed = 1;
};

// Invariant risk minimization over >= 2 environments: mean_e CE_e plus the
// penalty-weighted mean of per-environment scalar-multiplier gradients.
// After warmup the total is rescaled by 1/penalty_weight so the optimizer
// step size stays comparable.
inline Classifier irm_train(const std::vector<const LabeledImageSet*>& environments, double penalty_weight,
                            const IrmConfig& cfg, TrainTrace* trace = nullptr) {
    if (environments.size() < 2) throw ConfigError("irm_train: need at least 2 environments");
    for (const auto* env : environments)
        if (env == nullptr || env->size() == 0) throw ConfigError("irm_train: empty environment");
    const int input_dim = static_cast<int>(environments[0]->pixels_per_image());
    const int classes = environments[0]->num_classes;
    for (const auto* env : environments)
        if (env->pixels_per_image() != input_dim || env->num_classes != classes)
            throw ConfigError("irm_train: environments disagree on image size or class count");

    Classifier model = Classifier::init(input_dim, cfg.hidden, classes, cfg.seed);
    Adam opt(AdamConfig{.lr = cfg.lr});
    auto params = model.named_params();
    for (auto& [name, ptr] : params) opt.add_param(name, *ptr);

    std::vector<classify_detail::TermData> streams;
    for (size_t e = 0; e < environments.size(); ++e)
        streams.push_back({environments[e]->flat_images(), &environments[e]->labels,
                           classify_detail::BatchStream(environments[e]->size(), cfg.batch_per_env,
                                                        mix_seed(cfg.seed, 0x19a0 + e))});

    const int64_t steps_per_epoch = (environments[0]->size() + cfg.batch_per_env - 1) / cfg.batch_per_env;
    const int64_t total_steps = steps_per_epoch * cfg.epochs;
    const double env_weight = 1.0 / static_cast<double>(environments.size());
    for (int64_t step = 0; step < total_steps; ++step) {
        const double lambda = step < cfg.warmup_steps ? std::min(1.0, penalty_weight) : penalty_weight;
        Tape tape;
        std::vector<Var> param_vars;
        for (auto& [name, ptr] : params) param_vars.push_back(tape.leaf(*ptr));
        std::vector<Var> pieces;
        std::vector<double> weights;
        for (size_t e = 0; e < environments.size(); ++e) {
            auto idx = streams[e].stream.next();
            Tensor xb = gather_rows(streams[e].flat, idx);
            std::vector<int> yb(idx.size());
            for (size_t i = 0; i < idx.size(); ++i) yb[i] = (*streams[e].labels)[static_cast<size_t>(idx[i])];
            Var h = tape.relu(tape.affine(tape.constant(xb), param_vars[0], param_vars[1]));
            Var logits = tape.affine(h, param_vars[2], param_vars[3]);
            pieces.push_back(tape.softmax_cross_entropy(logits, yb));
            weights.push_back(env_weight);
            pieces.push_back(irm_penalty(tape, logits, yb, classes));
            weights.push_back(lambda * env_weight);
        }
        const double rescale = lambda > 1.0 ? 1.0 / lambda : 1.0;
        for (auto& w : weights) w *= rescale;
        Var loss = tape.weighted_sum(pieces, weights);
        double loss_value = tape.scalar(loss);
        if (!std::isfinite(loss_value)) throw TrainingError("irm_train: loss diverged at step " + std::to_string(step));
        if (trace) trace->loss_per_step.push_back(loss_value);
        tape.backward(loss);
        std::vector<Tensor*> ptrs;
        std::vector<const Tensor*> grads;
        for (size_t p = 0; p < params.size(); ++p) {
            ptrs.push_back(params[p].second);
            grads.push_back(&tape.grad(param_vars[p]));
        }
        opt.step(ptrs, grads);
    }
    model.trained = true;
    return model;
}

// ---- checkpoint I/O ---------------------------------------------------------

inline void save_classifier(const fs::path& dir, Classifier& c, Json extra_meta = Json::object()) {
    fs::create_directories(dir);
    for (auto& [name, ptr] : c.named_params()) write_tensor_file((dir / (name + std::string(".gint"))).string(), *ptr);
    Json meta = std::move(extra_meta);
    meta["input_dim"] = c.input_dim;
    meta["hidden"] = c.hidden;
    meta["num_classes"] = c.num_classes;
    meta["trained"] = c.trained;
    write_text_file(dir / "meta.json", meta.dump(2) + "\n");
}

inline Classifier load_classifier(const fs::path& dir) {
    Json meta = Json::parse(read_text_file(dir / "meta.json"));
    Classifier c;
    c.input_dim = meta.at("input_dim");
    c.hidden = meta.at("hidden");
    c.num_classes = meta.at("num_classes");
    for (auto& [name, ptr] : c.named_params()) *ptr = read_tensor_file((dir / (name + std::string(".gint"))).string());
    c.trained = meta.value("trained", true);
    return c;
}

}  // namespace genint
