// Acceptance suite: one pass/fail line per criterion, exit code 1 on any
// failure. Criteria 5-10a are property/format checks; criteria 1-4 run the
// full desk-scale pipeline twice (the second run feeds the byte-identity
// check of criterion 10).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "genint/backdoor.hpp"
#include "genint/bounds.hpp"
#include "genint/bundle.hpp"
#include "genint/classifier.hpp"
#include "genint/colored_mnist.hpp"
#include "genint/config.hpp"
#include "genint/cvae.hpp"
#include "genint/gradcheck.hpp"
#include "genint/idx.hpp"
#include "genint/interventional.hpp"
#include "genint/iv.hpp"
#include "genint/latent.hpp"
#include "genint/pipeline.hpp"
#include "genint/tensor_io.hpp"

using namespace genint;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %s — %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

// ---- criterion 5: Theorem-1 property suite ---------------------------------

void criterion5() {
    Rng rng(0x5511);
    int failures = 0;
    double max_width_err = 0.0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        double p_y_x = rng.uniform(0.05, 0.95);
        double p_x_z2 = rng.uniform(0.05, 0.90);
        double p_x_z1 = p_x_z2 + rng.uniform(0.01, 1.0 - p_x_z2 - 1e-6);
        auto cmp = compare_strategies({p_y_x * p_x_z1, p_x_z1}, {p_y_x * p_x_z2, p_x_z2}, p_y_x);
        if (cmp.order != StrategyOrder::a_tighter || !cmp.interval_a.strict_subset_of(cmp.interval_b)) ++failures;
        max_width_err = std::max(max_width_err, std::fabs(cmp.interval_a.width() - (1.0 - p_x_z1)));
        max_width_err = std::max(max_width_err, std::fabs(cmp.interval_b.width() - (1.0 - p_x_z2)));
    }
    bool pass = failures == 0 && max_width_err <= 4.0 * std::numeric_limits<double>::epsilon();
    report("criterion 5 (strategy intervals nest strictly)", pass,
           std::to_string(trials) + " consistent pairs, " + std::to_string(failures) +
               " nesting failures, width error " + fmt(max_width_err, 18) + " (exact at double precision)");
}

// ---- criterion 6: bound soundness -------------------------------------------

void criterion6() {
    Rng rng(0x6611);
    int natural_violations = 0, natural_checked = 0;
    for (int t = 0; t < 1000; ++t) {
        auto scm = random_discrete_scm(rng, 4, 0.02);
        auto tables = observational_joint_discrete(scm);
        for (int x = 0; x < scm.nx; ++x)
            for (int y = 0; y < scm.ny; ++y) {
                double exact = backdoor_adjust_discrete(scm, x, y);
                if (!natural_bound(tables.pxy(x, y), tables.px(x)).contains(exact, 1e-12)) ++natural_violations;
                ++natural_checked;
            }
    }
    int intervened_violations = 0, intervened_checked = 0;
    for (int t = 0; t < 1000; ++t) {
        auto base = random_discrete_scm(rng, 3, 0.02);
        std::vector<double> qz(static_cast<size_t>(base.nz));
        double s = 0.0;
        for (auto& v : qz) {
            v = 0.05 + rng.uniform();
            s += v;
        }
        for (auto& v : qz) v /= s;
        auto scm = base.with_exogenous_z(qz);
        auto tables = observational_joint_discrete(scm);
        for (int x = 0; x < scm.nx; ++x)
            for (int y = 0; y < scm.ny; ++y) {
                double exact = backdoor_adjust_discrete(scm, x, y);
                for (int z = 0; z < scm.nz; ++z) {
                    if (!intervened_bound({tables.pyx_z(z, x, y), tables.px_z(z, x)}).contains(exact, 1e-12))
                        ++intervened_violations;
                    ++intervened_checked;
                }
            }
    }
    bool pass = natural_violations == 0 && intervened_violations == 0;
    report("criterion 6 (bound soundness, zero violations)", pass,
           "natural: " + std::to_string(natural_checked) + " checks / " + std::to_string(natural_violations) +
               " violations; intervened: " + std::to_string(intervened_checked) + " checks / " +
               std::to_string(intervened_violations) + " violations");
}

// ---- criterion 7: linear IV --------------------------------------------------

void criterion7() {
    ScmLinear scm;
    scm.b = 0.5;
    auto start = std::chrono::steady_clock::now();
    auto draws = sample_linear_scm(scm, 1000000, 0x77);
    auto est = linear_iv_estimate(draws.z_i, draws.x, draws.y);
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = std::fabs(est.b_hat - 0.5) < 0.02 && seconds < 10.0;
    report("criterion 7 (linear IV, b=0.5, n=1e6)", pass,
           "b_hat = " + fmt(est.b_hat) + " (|err| = " + fmt(std::fabs(est.b_hat - 0.5)) + " < 0.02), " +
               fmt(seconds, 1) + "s < 10s");
}

// ---- criterion 8: gradient checks --------------------------------------------

struct GradCase {
    std::string name;
    double max_rel_err;
};

void criterion8() {
    double worst = 0.0;
    std::string worst_name;
    int cases = 0;

    auto track = [&](const std::string& name, const GradCheckReport& r) {
        ++cases;
        if (r.max_rel_err > worst) {
            worst = r.max_rel_err;
            worst_name = name;
        }
    };

    // 90 random MLP architectures over mixed activations and loss heads.
    for (uint64_t arch = 0; arch < 90; ++arch) {
        Rng rng(7000 + arch);
        const int in = 2 + static_cast<int>(rng.uniform_int(6));
        const int hid = 2 + static_cast<int>(rng.uniform_int(8));
        const int out = 2 + static_cast<int>(rng.uniform_int(4));
        const int n = 1 + static_cast<int>(rng.uniform_int(5));
        const int act = static_cast<int>(rng.uniform_int(3));
        const int head = static_cast<int>(rng.uniform_int(3));
        Tensor w1(Shape{in, hid}), b1(Shape{hid}), w2(Shape{hid, out}), b2(Shape{out});
        Tensor x(Shape{n, in});
        for (int attempt = 0;; ++attempt) {
            Rng wrng(9000 + arch * 131 + static_cast<uint64_t>(attempt));
            for (auto* p : {&w1, &w2})
                for (auto& v : p->storage()) v = static_cast<float>(wrng.normal() * 0.7);
            for (auto* p : {&b1, &b2})
                for (auto& v : p->storage()) v = static_cast<float>(wrng.normal() * 0.1);
            for (auto& v : x.storage()) v = static_cast<float>(wrng.normal());
            if (act != 0) break;
            // Relu nets: require preactivations clear of the probing radius
            // (finite differences are not a derivative estimate across kinks).
            Tensor pre = affine_forward(x, w1, b1);
            bool clear = true;
            for (float v : pre.storage()) clear = clear && std::fabs(v) > 8e-3f;
            if (clear) break;
        }
        std::vector<int> targets(static_cast<size_t>(n));
        Rng trng(500 + arch);
        for (auto& y : targets) y = static_cast<int>(trng.uniform_int(out));
        Tensor bce_target(Shape{n, out});
        for (auto& v : bce_target.storage()) v = static_cast<float>(trng.uniform());

        auto build = [&](Tape& t, std::vector<Var>& vars) {
            Var vx = t.constant(x);
            Var vw1 = t.leaf(w1), vb1 = t.leaf(b1), vw2 = t.leaf(w2), vb2 = t.leaf(b2);
            vars = {vw1, vb1, vw2, vb2};
            Var pre = t.affine(vx, vw1, vb1);
            Var h = act == 0 ? t.relu(pre) : (act == 1 ? t.tanh_act(pre) : t.sigmoid(pre));
            Var logits = t.affine(h, vw2, vb2);
            if (head == 0) return t.softmax_cross_entropy(logits, targets);
            if (head == 1) return t.bce_with_logits_sum(logits, bce_target);
            return t.mean_all(t.square(logits));
        };
        std::vector<NamedParam> params = {{"w1", &w1}, {"b1", &b1}, {"w2", &w2}, {"b2", &b2}};
        auto loss_fn = [&]() {
            Tape t(true);
            std::vector<Var> v;
            return t.scalar(build(t, v));
        };
        auto grads_fn = [&]() {
            Tape t;
            std::vector<Var> v;
            Var loss = build(t, v);
            t.backward(loss);
            std::vector<Tensor> gs;
            for (Var vv : v) gs.push_back(t.grad(vv));
            return gs;
        };
        track("mlp-" + std::to_string(arch),
              finite_difference_check(params, loss_fn, grads_fn, 1e-3, 6, 40 + arch));
    }

    // 5 CVAE ELBO configurations (4-image batches).
    for (uint64_t trial = 0; trial < 5; ++trial) {
        CvaeConfig ccfg;
        ccfg.input_dim = 48;
        ccfg.hidden = 24;
        ccfg.latent_dim = 6;
        ccfg.seed = 100 + trial;
        Cvae model = Cvae::init(ccfg);
        Rng rng(300 + trial);
        Tensor xb(Shape{4, 48});
        for (auto& v : xb.storage()) v = static_cast<float>(rng.uniform());
        std::vector<int> yb = {0, 3, 5, 9};
        Tensor noise = random_normal(Shape{4, 6}, rng);
        auto params_named = model.named_params();
        std::vector<NamedParam> params;
        for (auto& [name, ptr] : params_named) params.push_back({name, ptr});
        auto loss_fn = [&]() {
            Tape t(true);
            auto batch = cvae_batch_loss(t, model, xb, yb, noise);
            return t.scalar(batch.loss);
        };
        auto grads_fn = [&]() {
            Tape t;
            auto batch = cvae_batch_loss(t, model, xb, yb, noise);
            t.backward(batch.loss);
            std::vector<Tensor> gs;
            for (Var v : batch.param_vars) gs.push_back(t.grad(v));
            return gs;
        };
        track("elbo-" + std::to_string(trial), finite_difference_check(params, loss_fn, grads_fn, 1e-3, 4, trial));
    }

    // 5 three-term objective configurations.
    for (uint64_t trial = 0; trial < 5; ++trial) {
        ColorPalette palette;
        auto x = synth_colored_mnist(make_synthetic_digits(8, 600 + trial), palette, ColorMode::train_confounded,
                                     700 + trial);
        auto xint = synth_colored_mnist(make_synthetic_digits(8, 800 + trial), palette, ColorMode::test_causal,
                                        900 + trial);
        auto xitr = synth_colored_mnist(make_synthetic_digits(8, 1000 + trial), palette, ColorMode::test_causal,
                                        1100 + trial);
        // Keep relu preactivations clear of the probe radius (as above).
        Classifier model = Classifier::init(static_cast<int>(x.pixels_per_image()), 12, 10, 400 + trial);
        for (uint64_t reseed = 400 + trial;; ++reseed) {
            model = Classifier::init(static_cast<int>(x.pixels_per_image()), 12, 10, reseed);
            bool clear = true;
            for (const LabeledImageSet* set : {&x, &xint, &xitr}) {
                Tensor pre = affine_forward(set->flat_images(), model.w1, model.b1);
                for (float v : pre.storage()) clear = clear && std::fabs(v) > 8e-3f;
            }
            if (clear) break;
        }
        const double lambda1 = 0.05, lambda2 = 1.0;
        auto build = [&](Tape& t, std::vector<Var>& vars) {
            Var w1 = t.leaf(model.w1), b1 = t.leaf(model.b1), w2 = t.leaf(model.w2), b2 = t.leaf(model.b2);
            vars = {w1, b1, w2, b2};
            std::vector<Var> losses;
            std::vector<double> weights = {1.0, lambda1, lambda2};
            for (const LabeledImageSet* set : {&x, &xint, &xitr}) {
                Var h = t.relu(t.affine(t.constant(set->flat_images()), w1, b1));
                losses.push_back(t.softmax_cross_entropy(t.affine(h, w2, b2), set->labels));
            }
            return t.weighted_sum(losses, weights);
        };
        std::vector<NamedParam> params = {
            {"w1", &model.w1}, {"b1", &model.b1}, {"w2", &model.w2}, {"b2", &model.b2}};
        auto loss_fn = [&]() {
            Tape t(true);
            std::vector<Var> v;
            return t.scalar(build(t, v));
        };
        auto grads_fn = [&]() {
            Tape t;
            std::vector<Var> v;
            Var loss = build(t, v);
            t.backward(loss);
            std::vector<Tensor> gs;
            for (Var vv : v) gs.push_back(t.grad(vv));
            return gs;
        };
        track("eq1-" + std::to_string(trial), finite_difference_check(params, loss_fn, grads_fn, 1e-3, 5, trial));
    }

    bool pass = cases == 100 && worst < 1e-4;
    report("criterion 8 (gradient checks, 100 configurations)", pass,
           std::to_string(cases) + " configurations incl. ELBO and three-term loss, worst rel err " +
               fmt(worst, 7) + " (" + worst_name + ") < 1e-4");
}

// ---- criterion 9: PCA -----------------------------------------------------

void criterion9() {
    Rng rng(0x991);
    const int64_t n = 100000;
    const std::vector<double> stds = {2.0, 1.0, 0.5, 0.25, 0.1};
    Tensor latents(Shape{n, 5});
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < 5; ++j)
            latents[i * 5 + j] = static_cast<float>(rng.normal() * stds[static_cast<size_t>(j)]);
    auto basis = fit_latent_basis_from_latents(latents);
    double max_ortho_err = 0.0;
    for (int64_t i = 0; i < 5; ++i)
        for (int64_t j = 0; j < 5; ++j) {
            double dot = 0.0;
            for (int64_t k = 0; k < 5; ++k)
                dot += static_cast<double>(basis.directions[i * 5 + k]) * basis.directions[j * 5 + k];
            max_ortho_err = std::max(max_ortho_err, std::fabs(dot - (i == j ? 1.0 : 0.0)));
        }
    double max_sigma_err = 0.0;
    for (int64_t j = 0; j < 5; ++j)
        max_sigma_err = std::max(max_sigma_err,
                                 std::fabs(basis.sigmas[j] - stds[static_cast<size_t>(j)]) / stds[static_cast<size_t>(j)]);
    bool pass = max_ortho_err < 1e-5 && max_sigma_err < 0.02;
    report("criterion 9 (PCA orthonormality and sigma recovery)", pass,
           "orthonormality err " + fmt(max_ortho_err, 8) + " < 1e-5, sigma rel err " + fmt(max_sigma_err, 4) +
               " < 0.02 at n=1e5");
}

// ---- criterion 10a: format round trips ---------------------------------------

void criterion10_formats() {
    bool pass = true;
    std::string detail;
    // GINT round trip.
    Rng rng(0xa01);
    Tensor t(Shape{3, 4, 5});
    for (auto& v : t.storage()) v = static_cast<float>(rng.normal());
    std::string bytes = encode_tensor(t);
    Tensor back = decode_tensor(std::vector<unsigned char>(bytes.begin(), bytes.end()));
    bool gint_ok = back.storage() == t.storage() && encode_tensor(back) == bytes;
    pass = pass && gint_ok;
    detail += std::string("GINT round trip ") + (gint_ok ? "bit-exact" : "BROKEN");
    // IDX fixture.
    std::vector<unsigned char> idx = {0x00, 0x00, 0x08, 0x03, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 255, 128, 64};
    Tensor img = parse_idx_images(idx);
    bool idx_ok = img.shape() == Shape{1, 2, 2, 1} && img[0] == 0.0f && img[1] == 1.0f &&
                  img[2] == static_cast<float>(128.0 / 255.0) && img[3] == static_cast<float>(64.0 / 255.0);
    std::vector<unsigned char> lab = {0x00, 0x00, 0x08, 0x01, 0, 0, 0, 3, 7, 0, 9};
    auto labels = parse_idx_labels(lab);
    idx_ok = idx_ok && labels == std::vector<int>{7, 0, 9};
    pass = pass && idx_ok;
    detail += std::string("; IDX fixtures ") + (idx_ok ? "bit-exact" : "BROKEN");
    report("criterion 10a (formats)", pass, detail);
}

// ---- criteria 1-4 + 10b: the full pipeline ------------------------------------

ExperimentConfig acceptance_config(const std::string& out_dir) {
    ExperimentConfig cfg;  // compiled defaults are the desk-scale experiment
    cfg.out_dir = out_dir;
    cfg.seed = 7;
    return cfg;
}

double row_value(const std::vector<MetricRow>& rows, const std::string& method, const std::string& split) {
    for (const auto& r : rows)
        if (r.method == method && r.split == split) return r.top1;
    throw ValidationError("acceptance: missing row " + method + "/" + split);
}

void pipeline_criteria() {
    const std::string out1 = "acceptance_run_a";
    const std::string out2 = "acceptance_run_b";
    fs::remove_all(out1);
    fs::remove_all(out2);

    auto start = std::chrono::steady_clock::now();
    Pipeline run1(acceptance_config(out1));
    run1.run();
    double run_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    auto rows = parse_results_csv(read_text_file(fs::path(out1) / "reports" / "results.csv"));
    double erm_conf = row_value(rows, "erm", "test_confounded");
    double erm_causal = row_value(rows, "erm", "test_causal");
    double obs_causal = row_value(rows, "observational_cvae", "test_causal");
    double int_causal = row_value(rows, "interventional_cvae", "test_causal");
    double irm_causal = row_value(rows, "irm", "test_causal");
    const double chance = 0.10;

    {
        bool pass = erm_conf >= 0.97 && erm_causal <= chance + 0.03 && obs_causal >= 0.07 && obs_causal <= 0.17 &&
                    int_causal >= 0.24 && int_causal >= obs_causal + 0.10 && run_seconds < 1800.0;
        report("criterion 1 (controlled-benchmark reproduction)", pass,
               "erm confounded " + fmt(erm_conf, 4) + " >= 0.97; erm causal " + fmt(erm_causal, 4) +
                   " <= 0.13; observational causal " + fmt(obs_causal, 4) + " in [0.07, 0.17]; interventional causal " +
                   fmt(int_causal, 4) + " >= 0.24 and >= obs+0.10; full run " + fmt(run_seconds / 60.0, 1) +
                   " min < 30 min");
    }
    {
        bool pass = int_causal >= irm_causal + 0.03 && irm_causal >= erm_causal + 0.03;
        report("criterion 2 (method ordering on the causal test)", pass,
               "interventional " + fmt(int_causal, 4) + " > irm " + fmt(irm_causal, 4) + " > erm " +
                   fmt(erm_causal, 4) + ", gaps >= 0.03");
    }
    {
        // Ablation grid: mean log P(x|z) strictly increasing, accuracy ranks
        // agree (ties within 1 accuracy point permitted).
        Json bound = Json::parse(read_text_file(fs::path(out1) / "reports" / "causal_bound.json"));
        std::map<std::string, double> logp, causal_acc;
        for (const auto& s : bound["strategies"]) logp[s["name"]] = s["mean_log_pxz"].get<double>();
        Json eval = Json::parse(read_text_file(fs::path(out1) / "reports" / "eval.json"));
        causal_acc["observational"] = eval["observational_cvae"]["test_causal"].get<double>();
        causal_acc["weak"] = eval["interventional_weak"]["test_causal"].get<double>();
        causal_acc["strong"] = eval["interventional_cvae"]["test_causal"].get<double>();
        bool increasing = logp["observational"] < logp["weak"] && logp["weak"] < logp["strong"];
        // Rank agreement with 1-point tie tolerance: a higher-logp strategy
        // may not trail a lower-logp one by more than 0.01 accuracy.
        bool ranks = causal_acc["weak"] >= causal_acc["observational"] - 0.01 &&
                     causal_acc["strong"] >= causal_acc["weak"] - 0.01 &&
                     causal_acc["strong"] >= causal_acc["observational"] - 0.01;
        report("criterion 3 (likelihood trend and rank agreement)", increasing && ranks,
               "mean log P(x|z): obs " + fmt(logp["observational"], 4) + " < weak " + fmt(logp["weak"], 4) +
                   " < strong " + fmt(logp["strong"], 4) + "; causal acc obs/weak/strong " +
                   fmt(causal_acc["observational"], 4) + "/" + fmt(causal_acc["weak"], 4) + "/" +
                   fmt(causal_acc["strong"], 4));
    }
    {
        Json corr = Json::parse(read_text_file(fs::path(out1) / "reports" / "corr_analysis.json"));
        double conf_ratio_10 = 0.0, genint_ratio_10 = 0.0;
        std::vector<int> conf_sizes;
        for (const auto& point : corr["confounded_color"]) {
            conf_sizes.push_back(point["subset_size"].get<int>());
            if (point["subset_size"].get<int>() == 10) conf_ratio_10 = point["ratio"].get<double>();
        }
        for (const auto& point : corr["genint_z"])
            if (point["subset_size"].get<int>() == 10) genint_ratio_10 = point["ratio"].get<double>();
        bool curve = conf_sizes == std::vector<int>{2, 5, 10};
        bool pass = conf_ratio_10 >= 5.0 && genint_ratio_10 <= 1.5 && curve;
        report("criterion 4 (correlation-probe ratios)", pass,
               "confounded ratio " + fmt(conf_ratio_10, 2) + "x >= 5x; generated-z ratio " +
                   fmt(genint_ratio_10, 2) + "x <= 1.5x; curve over {2,5,10} " + (curve ? "emitted" : "MISSING"));
    }

    // Trained-artifact checks backing the module-level contracts.
    {
        Json tlog = Json::parse(read_text_file(fs::path(out1) / "models" / "cvae" / "training_log.json"));
        std::vector<double> curve = tlog["heldout_neg_elbo_per_image"].get<std::vector<double>>();
        double init = tlog["heldout_init"].get<double>();
        double drop = (init - curve.back()) / init;
        bool epochs_improve = curve.back() < curve.front();
        Cvae model = load_cvae(fs::path(out1) / "models" / "cvae");
        auto test_conf = load_dataset(fs::path(out1) / "data" / "test_confounded");
        Tensor flat = test_conf.flat_images();
        auto [mean, logvar] = cvae_encode(model, flat, test_conf.labels);
        Tensor recon = cvae_decode(model, mean, test_conf.labels);
        double abs_err = 0.0;
        for (int64_t i = 0; i < flat.numel(); ++i) abs_err += std::fabs(flat[i] - recon[i]);
        abs_err /= static_cast<double>(flat.numel());

        auto train = load_dataset(fs::path(out1) / "data" / "train_confounded");
        auto [train_mean, train_logvar] = cvae_encode(model, train.flat_images(), train.labels);
        std::vector<double> agg(static_cast<size_t>(model.cfg.latent_dim), 0.0);
        for (int64_t i = 0; i < train_mean.dim(0); ++i)
            for (int64_t j = 0; j < model.cfg.latent_dim; ++j)
                agg[static_cast<size_t>(j)] += train_mean[i * model.cfg.latent_dim + j];
        double norm = 0.0;
        for (double& v : agg) {
            v /= static_cast<double>(train_mean.dim(0));
            norm += v * v;
        }
        norm = std::sqrt(norm);

        Tensor h0 = Tensor::zeros(Shape{2, model.cfg.latent_dim});
        Tensor two = cvae_decode(model, h0, {0, 1});
        double class_diff = 0.0;
        for (int64_t j = 0; j < model.cfg.input_dim; ++j)
            class_diff += std::fabs(two[j] - two[model.cfg.input_dim + j]);
        class_diff /= static_cast<double>(model.cfg.input_dim);

        bool pass = drop >= 0.20 && epochs_improve && abs_err < 0.15 && norm < 0.5 && class_diff > 0.01;
        report("trained-model checks (ELBO drop, reconstruction, posterior, conditioning)", pass,
               "held-out ELBO drop from init " + fmt(drop, 3) + " >= 0.20 and epoch-1 -> final decreasing; recon err " +
                   fmt(abs_err, 4) + " < 0.15; aggregate-posterior norm " + fmt(norm, 4) + " < 0.5; class diff " +
                   fmt(class_diff, 4) + " > 0.01");
    }

    // Criterion 10b: a second fresh run produces byte-identical results.csv.
    {
        Pipeline run2(acceptance_config(out2));
        run2.run();
        std::string a = read_text_file(fs::path(out1) / "reports" / "results.csv");
        std::string b = read_text_file(fs::path(out2) / "reports" / "results.csv");
        bool pass = a == b;
        report("criterion 10b (byte-identical results.csv across runs)", pass,
               pass ? "two fresh full runs agree byte for byte" : "results.csv differs between runs");
    }

    fs::remove_all(out2);
}

}  // namespace

int main() {
    std::printf("== acceptance suite ==\n");
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10_formats();
    pipeline_criteria();
    std::printf("== %s (%d failure%s) ==\n", g_failures == 0 ? "ALL CRITERIA PASS" : "FAILURES PRESENT", g_failures,
                g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
