#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "genint/bundle.hpp"
#include "genint/dataset.hpp"
#include "genint/optim.hpp"
#include "genint/rng.hpp"
#include "genint/tape.hpp"
#include "genint/tensor_ops.hpp"

namespace genint {

struct CvaeConfig {
    int input_dim = 2352;  // 28*28*3 flattened
    int num_classes = 10;
    int hidden = 400;
    int latent_dim = 16;
    int epochs = 20;
    int batch = 128;
    double lr = 1e-3;
    double beta = 1.0;  // weight on the KL term
    double heldout_frac = 0.1;
    uint64_t seed = 1;
};

// Conditional VAE: encoder (x ++ one-hot y) -> hidden relu -> (mean, logvar);
// decoder (h ++ one-hot y) -> hidden relu -> sigmoid pixels. Decode is a
// deterministic function of (h, y), which the causal-bound estimator relies
// on (the generated sample is fully determined by its intervention).
struct Cvae {
    CvaeConfig cfg;
    Tensor enc_w1, enc_b1, enc_wm, enc_bm, enc_wv, enc_bv;
    Tensor dec_w1, dec_b1, dec_w2, dec_b2;
    bool trained = false;

    static Cvae init(const CvaeConfig& cfg) {
        Cvae m;
        m.cfg = cfg;
        Rng rng(mix_seed(cfg.seed, 0xc4ae));
        auto glorot = [&rng](int64_t in, int64_t out) {
            Tensor t(Shape{in, out});
            double s = std::sqrt(2.0 / static_cast<double>(in + out));
            for (auto& v : t.storage()) v = static_cast<float>(rng.normal() * s);
            return t;
        };
        const int64_t in = cfg.input_dim + cfg.num_classes;
        m.enc_w1 = glorot(in, cfg.hidden);
        m.enc_b1 = Tensor(Shape{cfg.hidden});
        m.enc_wm = glorot(cfg.hidden, cfg.latent_dim);
        m.enc_bm = Tensor(Shape{cfg.latent_dim});
        m.enc_wv = glorot(cfg.hidden, cfg.latent_dim);
        m.enc_bv = Tensor(Shape{cfg.latent_dim});
        m.dec_w1 = glorot(cfg.latent_dim + cfg.num_classes, cfg.hidden);
        m.dec_b1 = Tensor(Shape{cfg.hidden});
        m.dec_w2 = glorot(cfg.hidden, cfg.input_dim);
        m.dec_b2 = Tensor(Shape{cfg.input_dim});
        return m;
    }

    std::vector<std::pair<std::string, Tensor*>> named_params() {
        return {{"enc_w1", &enc_w1}, {"enc_b1", &enc_b1}, {"enc_wm", &enc_wm}, {"enc_bm", &enc_bm},
                {"enc_wv", &enc_wv}, {"enc_bv", &enc_bv}, {"dec_w1", &dec_w1}, {"dec_b1", &dec_b1},
                {"dec_w2", &dec_w2}, {"dec_b2", &dec_b2}};
    }
};

inline void check_cvae_inputs(const Cvae& m, const Tensor& x_flat, const std::vector<int>& labels) {
    if (x_flat.ndim() != 2 || x_flat.dim(1) != m.cfg.input_dim)
        throw DimensionError("cvae: expected [n," + std::to_string(m.cfg.input_dim) + "] input, got " +
                             shape_str(x_flat.shape()));
    if (static_cast<int64_t>(labels.size()) != x_flat.dim(0))
        throw DimensionError("cvae: " + std::to_string(labels.size()) + " labels for " +
                             std::to_string(x_flat.dim(0)) + " inputs");
}

// Posterior parameters for a batch. Deterministic given inputs.
inline std::pair<Tensor, Tensor> cvae_encode(const Cvae& m, const Tensor& x_flat, const std::vector<int>& labels) {
    check_cvae_inputs(m, x_flat, labels);
    Tensor in = concat_cols(x_flat, one_hot(labels, m.cfg.num_classes));
    Tensor h = relu(affine_forward(in, m.enc_w1, m.enc_b1));
    return {affine_forward(h, m.enc_wm, m.enc_bm), affine_forward(h, m.enc_wv, m.enc_bv)};
}

// h = mean + exp(logvar/2) * noise (plain, non-tape version).
inline Tensor reparameterize(const Tensor& mean, const Tensor& logvar, const Tensor& noise) {
    require_same_shape(mean, logvar, "reparameterize");
    require_same_shape(mean, noise, "reparameterize");
    Tensor h(mean.shape());
    for (int64_t i = 0; i < mean.numel(); ++i)
        h[i] = static_cast<float>(mean[i] + std::exp(0.5 * static_cast<double>(logvar[i])) * noise[i]);
    return h;
}

// Pixels in (0,1), flattened [n, input_dim]. Deterministic given (h, y).
inline Tensor cvae_decode(const Cvae& m, const Tensor& h, const std::vector<int>& labels) {
    if (h.ndim() != 2 || h.dim(1) != m.cfg.latent_dim)
        throw DimensionError("cvae: expected [n," + std::to_string(m.cfg.latent_dim) + "] latents, got " +
                             shape_str(h.shape()));
    if (static_cast<int64_t>(labels.size()) != h.dim(0))
        throw DimensionError("cvae: label count mismatch in decode");
    if (!h.all_finite()) throw ValidationError("cvae: non-finite latent");
    Tensor in = concat_cols(h, one_hot(labels, m.cfg.num_classes));
    Tensor hid = relu(affine_forward(in, m.dec_w1, m.dec_b1));
    return sigmoid(affine_forward(hid, m.dec_w2, m.dec_b2));
}

struct ElboReport {
    double reconstruction = 0.0;  // sum of per-pixel binary cross-entropy
    double kl = 0.0;
    double total = 0.0;  // reconstruction + beta * kl
    int64_t batch = 0;
    double per_image() const { return batch > 0 ? total / static_cast<double>(batch) : 0.0; }
};

// Evaluates the negative ELBO of decoded probabilities against targets.
inline ElboReport elbo_loss(const Tensor& x, const Tensor& x_hat, const Tensor& mean, const Tensor& logvar,
                            double beta) {
    require_same_shape(x, x_hat, "elbo_loss");
    require_same_shape(mean, logvar, "elbo_loss");
    if (beta < 0.0) throw ValidationError("elbo_loss: beta must be >= 0");
    for (float v : x.storage())
        if (!(v >= 0.0f && v <= 1.0f)) throw ValidationError("elbo_loss: target outside [0,1]");
    ElboReport r;
    r.batch = x.rows();
    for (int64_t i = 0; i < x.numel(); ++i) {
        double p = std::min(1.0 - 1e-7, std::max(1e-7, static_cast<double>(x_hat[i])));
        double t = x[i];
        r.reconstruction -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    }
    for (int64_t i = 0; i < mean.numel(); ++i) {
        double mv = mean[i], lv = logvar[i];
        r.kl += 0.5 * (std::exp(lv) + mv * mv - 1.0 - lv);
    }
    r.total = r.reconstruction + beta * r.kl;
    return r;
}

// Builds the per-batch training loss (negative ELBO / batch) on a tape.
// Exposed so gradient checks can drive the exact training objective.
struct CvaeBatchLoss {
    Var loss;
    std::vector<Var> param_vars;
    Var mean, logvar;
};

inline CvaeBatchLoss cvae_batch_loss(Tape& t, Cvae& m, const Tensor& x_flat, const std::vector<int>& labels,
                                     const Tensor& noise) {
    check_cvae_inputs(m, x_flat, labels);
    CvaeBatchLoss out;
    Var x = t.constant(x_flat);
    Var y1h = t.constant(one_hot(labels, m.cfg.num_classes));
    auto params = m.named_params();
    out.param_vars.reserve(params.size());
    for (auto& [name, ptr] : params) out.param_vars.push_back(t.leaf(*ptr));
    const auto& pv = out.param_vars;
    Var enc_in = t.concat_cols(x, y1h);
    Var h1 = t.relu(t.affine(enc_in, pv[0], pv[1]));
    out.mean = t.affine(h1, pv[2], pv[3]);
    out.logvar = t.affine(h1, pv[4], pv[5]);
    Var h = t.reparameterize(out.mean, out.logvar, noise);
    Var dec_in = t.concat_cols(h, y1h);
    Var d1 = t.relu(t.affine(dec_in, pv[6], pv[7]));
    Var logits = t.affine(d1, pv[8], pv[9]);
    Var recon = t.bce_with_logits_sum(logits, x_flat);
    Var kl = t.gaussian_kl_sum(out.mean, out.logvar);
    const double inv_b = 1.0 / static_cast<double>(x_flat.dim(0));
    std::vector<Var> terms = {recon, kl};
    std::vector<double> weights = {inv_b, m.cfg.beta * inv_b};
    out.loss = t.weighted_sum(terms, weights);
    return out;
}

// Per-coordinate rejection sampling: standard normal resampled until
// |value| <= t.
inline Tensor sample_truncated_gaussian(int64_t dim, double t, int64_t n, uint64_t seed) {
    if (!(t > 0.0)) throw ValidationError("sample_truncated_gaussian: t must be > 0, got " + std::to_string(t));
    Tensor out(Shape{n, dim});
    for (int64_t i = 0; i < n; ++i) {
        Rng rng = derive_rng(seed, static_cast<uint64_t>(i));
        for (int64_t j = 0; j < dim; ++j) {
            double v;
            do {
                v = rng.normal();
            } while (std::fabs(v) > t);
            out[i * dim + j] = static_cast<float>(v);
        }
    }
    return out;
}

struct CvaeTrainLog {
    double heldout_init = 0.0;                       // before any update
    std::vector<double> heldout_neg_elbo_per_image;  // one entry per epoch
};

// Trains on the confounded set with a deterministic held-out split. Throws
// TrainingError naming the epoch/batch if the loss leaves the reals.
inline Cvae train_cvae(const LabeledImageSet& train, const CvaeConfig& cfg, CvaeTrainLog* log = nullptr,
                       const std::function<void(int, double)>& on_epoch = {}) {
    if (train.size() == 0) throw InsufficientDataError("train_cvae: empty dataset");
    if (cfg.batch < 1 || cfg.epochs < 0) throw ValidationError("train_cvae: invalid config");
    Cvae m = Cvae::init(cfg);

    const int64_t n = train.size();
    int64_t heldout = std::min<int64_t>(std::max<int64_t>(1, static_cast<int64_t>(cfg.heldout_frac * n)), n - 1);
    Tensor flat = train.flat_images();
    std::vector<int64_t> order(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    Rng split_rng(mix_seed(cfg.seed, 0x5b717));
    split_rng.shuffle(order);
    std::vector<int64_t> train_idx(order.begin(), order.end() - heldout);
    std::vector<int64_t> held_idx(order.end() - heldout, order.end());

    Adam opt(AdamConfig{.lr = cfg.lr});
    auto params = m.named_params();
    for (auto& [name, ptr] : params) opt.add_param(name, *ptr);

    auto heldout_eval = [&]() {
        double total = 0.0;
        const int64_t bs = cfg.batch;
        for (size_t off = 0; off < held_idx.size(); off += static_cast<size_t>(bs)) {
            size_t hi = std::min(held_idx.size(), off + static_cast<size_t>(bs));
            std::vector<int64_t> idx(held_idx.begin() + static_cast<int64_t>(off),
                                     held_idx.begin() + static_cast<int64_t>(hi));
            Tensor xb = gather_rows(flat, idx);
            std::vector<int> yb(idx.size());
            for (size_t i = 0; i < idx.size(); ++i) yb[i] = train.labels[static_cast<size_t>(idx[i])];
            auto [mean, logvar] = cvae_encode(m, xb, yb);
            Rng nrng = derive_rng(cfg.seed ^ 0xe7a1, off);
            Tensor noise = random_normal(mean.shape(), nrng);
            Tensor h = reparameterize(mean, logvar, noise);
            Tensor x_hat = cvae_decode(m, h, yb);
            total += elbo_loss(xb, x_hat, mean, logvar, cfg.beta).total;
        }
        return total / static_cast<double>(held_idx.size());
    };

    if (log) log->heldout_init = heldout_eval();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng epoch_rng(mix_seed(cfg.seed, 0xe90c + static_cast<uint64_t>(epoch)));
        epoch_rng.shuffle(train_idx);
        const int64_t steps = (static_cast<int64_t>(train_idx.size()) + cfg.batch - 1) / cfg.batch;
        for (int64_t s = 0; s < steps; ++s) {
            int64_t lo = s * cfg.batch;
            int64_t hi = std::min<int64_t>(lo + cfg.batch, static_cast<int64_t>(train_idx.size()));
            std::vector<int64_t> idx(train_idx.begin() + lo, train_idx.begin() + hi);
            Tensor xb = gather_rows(flat, idx);
            std::vector<int> yb(idx.size());
            for (size_t i = 0; i < idx.size(); ++i) yb[i] = train.labels[static_cast<size_t>(idx[i])];
            Rng nrng(mix_seed(cfg.seed ^ 0x4015e, static_cast<uint64_t>(epoch) * 1000003 + static_cast<uint64_t>(s)));
            Tensor noise = random_normal(Shape{hi - lo, cfg.latent_dim}, nrng);

            Tape tape;
            auto batch = cvae_batch_loss(tape, m, xb, yb, noise);
            double loss_value = tape.scalar(batch.loss);
            if (!std::isfinite(loss_value))
                throw TrainingError("train_cvae: loss diverged at epoch " + std::to_string(epoch) + ", batch " +
                                    std::to_string(s));
            tape.backward(batch.loss);
            std::vector<Tensor*> ptrs;
            std::vector<const Tensor*> grads;
            for (size_t p = 0; p < params.size(); ++p) {
                ptrs.push_back(params[p].second);
                grads.push_back(&tape.grad(batch.param_vars[p]));
            }
            opt.step(ptrs, grads);
        }
        double held = heldout_eval();
        if (log) log->heldout_neg_elbo_per_image.push_back(held);
        if (on_epoch) on_epoch(epoch, held);
    }
    m.trained = true;
    return m;
}

// ---- checkpoint I/O ---------------------------------------------------------

inline void save_cvae(const fs::path& dir, Cvae& m) {
    fs::create_directories(dir);
    for (auto& [name, ptr] : m.named_params()) write_tensor_file((dir / (name + std::string(".gint"))).string(), *ptr);
    Json meta;
    meta["input_dim"] = m.cfg.input_dim;
    meta["num_classes"] = m.cfg.num_classes;
    meta["hidden"] = m.cfg.hidden;
    meta["latent_dim"] = m.cfg.latent_dim;
    meta["epochs"] = m.cfg.epochs;
    meta["batch"] = m.cfg.batch;
    meta["lr"] = m.cfg.lr;
    meta["beta"] = m.cfg.beta;
    meta["seed"] = m.cfg.seed;
    meta["trained"] = m.trained;
    write_text_file(dir / "meta.json", meta.dump(2) + "\n");
}

inline Cvae load_cvae(const fs::path& dir) {
    Json meta = Json::parse(read_text_file(dir / "meta.json"));
    CvaeConfig cfg;
    cfg.input_dim = meta.at("input_dim");
    cfg.num_classes = meta.at("num_classes");
    cfg.hidden = meta.at("hidden");
    cfg.latent_dim = meta.at("latent_dim");
    cfg.epochs = meta.at("epochs");
    cfg.batch = meta.at("batch");
    cfg.lr = meta.at("lr");
    cfg.beta = meta.at("beta");
    cfg.seed = meta.at("seed");
    Cvae m;
    m.cfg = cfg;
    for (auto& [name, ptr] : m.named_params()) *ptr = read_tensor_file((dir / (name + std::string(".gint"))).string());
    m.trained = meta.value("trained", true);
    return m;
}

}  // namespace genint
