#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
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
#include "genint/idx.hpp"
#include "genint/interventional.hpp"
#include "genint/iv.hpp"
#include "genint/latent.hpp"
#include "genint/likelihood.hpp"
#include "genint/probe.hpp"

namespace genint {

// ---- metrics emission --------------------------------------------------------

struct MetricRow {
    std::string run_id;
    std::string method;
    std::string split;
    double top1 = 0.0;
    double chance = 0.0;
    uint64_t seed = 0;
};

inline std::string format_prob(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// results.csv with a stable column order plus summary.json. The summary's
// deterministic payload goes under its own keys; wall-clock timings live in
// the separate "timing" field so reruns differ only there.
inline void emit_metrics(const std::vector<MetricRow>& rows, const Json& summary, const fs::path& out_dir) {
    if (rows.empty()) throw ValidationError("emit_metrics: no reports to emit");
    fs::create_directories(out_dir);
    std::string csv = "run_id,method,split,top1,chance,seed\n";
    for (const auto& r : rows)
        csv += r.run_id + "," + r.method + "," + r.split + "," + format_prob(r.top1) + "," + format_prob(r.chance) +
               "," + std::to_string(r.seed) + "\n";
    write_text_file(out_dir / "results.csv", csv);
    write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");
}

inline std::vector<MetricRow> parse_results_csv(const std::string& text) {
    std::vector<MetricRow> rows;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line != "run_id,method,split,top1,chance,seed")
                throw FormatError("results.csv: unexpected header '" + line + "'");
            continue;
        }
        std::istringstream cells(line);
        MetricRow r;
        std::string top1, chance, seed;
        if (!std::getline(cells, r.run_id, ',') || !std::getline(cells, r.method, ',') ||
            !std::getline(cells, r.split, ',') || !std::getline(cells, top1, ',') ||
            !std::getline(cells, chance, ',') || !std::getline(cells, seed, ','))
            throw FormatError("results.csv: malformed row '" + line + "'");
        r.top1 = std::stod(top1);
        r.chance = std::stod(chance);
        r.seed = static_cast<uint64_t>(std::stoull(seed));
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---- scm-verify ----------------------------------------------------------

// Property suites over random ground-truth SCMs: Lemma-style natural-bound
// soundness, post-intervention bound soundness, strict nesting of strategy
// intervals, and the linear instrumental-variable estimate.
inline Json scm_verify(uint64_t seed, int trials = 1000) {
    Json report;
    Rng rng(mix_seed(seed, 0x5c17));

    int natural_checked = 0, natural_violations = 0;
    for (int t = 0; t < trials; ++t) {
        auto scm = random_discrete_scm(rng, 4, 0.02);
        auto tables = observational_joint_discrete(scm);
        for (int x = 0; x < scm.nx; ++x)
            for (int y = 0; y < scm.ny; ++y) {
                double exact = backdoor_adjust_discrete(scm, x, y);
                if (!natural_bound(tables.pxy(x, y), tables.px(x)).contains(exact, 1e-12)) ++natural_violations;
                ++natural_checked;
            }
    }
    report["natural_bound"] = {{"trials", trials}, {"checked", natural_checked}, {"violations", natural_violations}};

    int intervened_checked = 0, intervened_violations = 0;
    for (int t = 0; t < trials; ++t) {
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
    report["intervened_bound"] = {
        {"trials", trials}, {"checked", intervened_checked}, {"violations", intervened_violations}};

    int nesting_failures = 0;
    double max_width_error = 0.0;
    for (int t = 0; t < trials; ++t) {
        double p_y_x = rng.uniform(0.05, 0.95);
        double p_x_z2 = rng.uniform(0.05, 0.90);
        double p_x_z1 = p_x_z2 + rng.uniform(0.01, 1.0 - p_x_z2 - 1e-6);
        auto cmp = compare_strategies({p_y_x * p_x_z1, p_x_z1}, {p_y_x * p_x_z2, p_x_z2}, p_y_x);
        if (cmp.order != StrategyOrder::a_tighter || !cmp.interval_a.strict_subset_of(cmp.interval_b))
            ++nesting_failures;
        max_width_error = std::max(max_width_error, std::fabs(cmp.interval_a.width() - (1.0 - p_x_z1)));
        max_width_error = std::max(max_width_error, std::fabs(cmp.interval_b.width() - (1.0 - p_x_z2)));
    }
    report["strategy_nesting"] = {
        {"trials", trials}, {"failures", nesting_failures}, {"max_width_error", max_width_error}};

    ScmLinear lin;
    lin.b = 0.5;
    auto draws = sample_linear_scm(lin, 1000000, mix_seed(seed, 0x11f));
    auto est = linear_iv_estimate(draws.z_i, draws.x, draws.y);
    report["linear_iv"] = {{"true_b", 0.5}, {"estimate", est.b_hat}, {"abs_error", std::fabs(est.b_hat - 0.5)},
                           {"n", est.n}};
    return report;
}

// ---- the pipeline ----------------------------------------------------------

class Pipeline {
public:
    Pipeline(ExperimentConfig cfg, bool force = false) : cfg_(std::move(cfg)), force_(force) {
        out_ = fs::path(cfg_.out_dir);
        run_id_ = hash_hex(fnv1a64(cfg_.canonical() + "#" + std::to_string(cfg_.seed)));
    }

    static const std::vector<std::string>& stage_order() {
        static const std::vector<std::string> kOrder = {
            "synth-data", "train-cvae",       "fit-pca",  "generate-int", "transfer-int",
            "train-classifier", "eval", "causal-bound", "corr-analysis", "ablate"};
        return kOrder;
    }

    const std::string& run_id() const { return run_id_; }
    const fs::path& out_dir() const { return out_; }

    // Runs the requested stages in canonical order (all stages if empty).
    void run(std::vector<std::string> stages = {}) {
        if (stages.empty()) stages = stage_order();
        for (const auto& name : stage_order()) {
            if (std::find(stages.begin(), stages.end(), name) == stages.end()) continue;
            run_stage(name);
        }
        write_summary();
    }

    void run_stage(const std::string& name) {
        if (name == "synth-data") return stage_synth_data();
        if (name == "train-cvae") return stage_train_cvae();
        if (name == "fit-pca") return stage_fit_pca();
        if (name == "generate-int") return stage_generate_int();
        if (name == "transfer-int") return stage_transfer_int();
        if (name == "train-classifier") return stage_train_classifier();
        if (name == "eval") return stage_eval();
        if (name == "causal-bound") return stage_causal_bound();
        if (name == "corr-analysis") return stage_corr_analysis();
        if (name == "ablate") return stage_ablate();
        throw ValidationError("unknown stage '" + name + "'");
    }

    struct StageRecord {
        std::string name;
        bool skipped = false;
        double seconds = 0.0;
    };
    const std::vector<StageRecord>& stage_records() const { return records_; }

    // ---- stages -------------------------------------------------------------

    void stage_synth_data() {
        std::string key = subsection_key("data", "data:" + cfg_.data_source + "," + cfg_.idx_images + "," +
                                                     cfg_.idx_labels + "," + std::to_string(cfg_.train_n) + "," +
                                                     std::to_string(cfg_.test_n) + "," +
                                                     std::to_string(cfg_.causal_unseen_hues) + ",seed=" +
                                                     std::to_string(cfg_.seed));
        guarded_stage("synth-data", key, [&] {
            ColorPalette palette;
            LabeledImageSet gray_train, gray_test;
            if (cfg_.data_source == "idx") {
                Tensor images = load_idx_images(cfg_.idx_images);
                auto labels = load_idx_labels(cfg_.idx_labels);
                gray_train.images = std::move(images);
                gray_train.labels = std::move(labels);
                gray_train.num_classes = 10;
                Tensor test_images = load_idx_images(cfg_.idx_test_images);
                auto test_labels = load_idx_labels(cfg_.idx_test_labels);
                gray_test.images = std::move(test_images);
                gray_test.labels = std::move(test_labels);
                gray_test.num_classes = 10;
                if (gray_train.size() > cfg_.train_n) {
                    std::vector<int64_t> head(static_cast<size_t>(cfg_.train_n));
                    for (int64_t i = 0; i < cfg_.train_n; ++i) head[static_cast<size_t>(i)] = i;
                    gray_train = gray_train.subset(head);
                }
                if (gray_test.size() > cfg_.test_n) {
                    std::vector<int64_t> head(static_cast<size_t>(cfg_.test_n));
                    for (int64_t i = 0; i < cfg_.test_n; ++i) head[static_cast<size_t>(i)] = i;
                    gray_test = gray_test.subset(head);
                }
            } else {
                gray_train = make_synthetic_digits(cfg_.train_n, mix_seed(cfg_.seed, 0x0d1));
                gray_test = make_synthetic_digits(cfg_.test_n, mix_seed(cfg_.seed, 0x0d2));
            }
            save_dataset(data_dir("gray_train"), gray_train, Json{{"kind", "gray"}});
            save_dataset(data_dir("gray_test"), gray_test, Json{{"kind", "gray"}});

            auto train = synth_colored_mnist(gray_train, palette, ColorMode::train_confounded,
                                             mix_seed(cfg_.seed, 0x1c1));
            auto test_conf = synth_colored_mnist(gray_test, palette, ColorMode::test_confounded,
                                                 mix_seed(cfg_.seed, 0x1c2));
            auto test_causal = synth_colored_mnist(gray_test, palette, ColorMode::test_causal,
                                                   mix_seed(cfg_.seed, 0x1c3), cfg_.causal_unseen_hues);
            Json meta{{"mode", "train_confounded"}, {"seed", cfg_.seed}};
            save_dataset(data_dir("train_confounded"), train, meta);
            save_dataset(data_dir("test_confounded"), test_conf, Json{{"mode", "test_confounded"}, {"seed", cfg_.seed}});
            save_dataset(data_dir("test_causal"), test_causal,
                         Json{{"mode", "test_causal"}, {"seed", cfg_.seed}, {"unseen_hues", cfg_.causal_unseen_hues}});

            // IRM environments from the same gray sources.
            std::vector<int64_t> even, odd;
            for (int64_t i = 0; i < gray_train.size(); ++i) (i % 2 == 0 ? even : odd).push_back(i);
            if (cfg_.irm_env_mode == "correlation_strengths") {
                auto env1 = colorize(gray_train.subset(even), palette, ColorMode::train_confounded,
                                     mix_seed(cfg_.seed, 0x1e1), cfg_.irm_env_noise_1);
                auto env2 = colorize(gray_train.subset(odd), palette, ColorMode::train_confounded,
                                     mix_seed(cfg_.seed, 0x1e2), cfg_.irm_env_noise_2);
                save_dataset(data_dir("irm_env1"), env1, Json{{"noise", cfg_.irm_env_noise_1}});
                save_dataset(data_dir("irm_env2"), env2, Json{{"noise", cfg_.irm_env_noise_2}});
            } else {
                // Split the confounded set by which of the class's two colors
                // each sample drew.
                std::vector<int64_t> first, second;
                for (int64_t i = 0; i < train.size(); ++i)
                    (nuisance_color_index(train, i) % 2 == 0 ? first : second).push_back(i);
                save_dataset(data_dir("irm_env1"), train.subset(first), Json{{"parity", 0}});
                save_dataset(data_dir("irm_env2"), train.subset(second), Json{{"parity", 1}});
            }
        });
    }

    void stage_train_cvae() {
        require_artifact(data_dir("train_confounded") / "images.gint", "synth-data");
        std::string key = subsection_key(
            "cvae", "cvae:" + std::to_string(cfg_.cvae_hidden) + "," + std::to_string(cfg_.cvae_latent_dim) + "," +
                        std::to_string(cfg_.cvae_epochs) + "," + std::to_string(cfg_.cvae_batch) + "," +
                        std::to_string(cfg_.cvae_lr) + "," + std::to_string(cfg_.cvae_beta) + ",seed=" +
                        std::to_string(cfg_.seed) + ",train=" +
                        hash_hex(file_checksum(data_dir("train_confounded") / "images.gint")));
        guarded_stage("train-cvae", key, [&] {
            auto train = load_dataset(data_dir("train_confounded"));
            CvaeConfig ccfg;
            ccfg.input_dim = static_cast<int>(train.pixels_per_image());
            ccfg.num_classes = train.num_classes;
            ccfg.hidden = cfg_.cvae_hidden;
            ccfg.latent_dim = cfg_.cvae_latent_dim;
            ccfg.epochs = cfg_.cvae_epochs;
            ccfg.batch = cfg_.cvae_batch;
            ccfg.lr = cfg_.cvae_lr;
            ccfg.beta = cfg_.cvae_beta;
            ccfg.seed = mix_seed(cfg_.seed, 0xc11ae);
            CvaeTrainLog log;
            Cvae model = train_cvae(train, ccfg, &log);
            save_cvae(model_dir("cvae"), model);
            Json jlog;
            jlog["heldout_init"] = log.heldout_init;
            jlog["heldout_neg_elbo_per_image"] = log.heldout_neg_elbo_per_image;
            write_text_file(model_dir("cvae") / "training_log.json", jlog.dump(2) + "\n");
        });
    }

    void stage_fit_pca() {
        require_artifact(model_dir("cvae") / "meta.json", "train-cvae");
        require_artifact(data_dir("train_confounded") / "images.gint", "synth-data");
        std::string key = subsection_key("fit-pca", "pca:src=" + cfg_.pca_source + ",model=" +
                                                        hash_hex(file_checksum(model_dir("cvae") / "dec_w2.gint")) +
                                                        ",train=" +
                                                        hash_hex(file_checksum(data_dir("train_confounded") / "images.gint")));
        guarded_stage("fit-pca", key, [&] {
            Cvae model = load_cvae(model_dir("cvae"));
            LatentBasis basis;
            if (cfg_.pca_source == "prior") {
                basis = fit_latent_basis_from_prior(model, 100000, 1.0, mix_seed(cfg_.seed, 0x9ca));
            } else {
                auto train = load_dataset(data_dir("train_confounded"));
                basis = fit_latent_basis(model, train);
            }
            save_latent_basis(out_ / "basis", basis, Json{{"source", cfg_.pca_source}});
        });
    }

    void stage_generate_int() {
        require_artifact(model_dir("cvae") / "meta.json", "train-cvae");
        require_artifact(out_ / "basis" / "directions.gint", "fit-pca");
        std::string strategies_desc;
        for (const auto& s : cfg_.strategies)
            strategies_desc += s.name + ":" + std::to_string(s.strategy.truncation) + "," +
                               std::to_string(s.strategy.top_k) + "," + std::to_string(s.strategy.scale) + "," +
                               std::to_string(s.strategy.directions_per_sample) + ";";
        std::string key = subsection_key(
            "generate-int", "gen:" + strategies_desc + ",n=" + std::to_string(cfg_.per_class_n) + ",src=" +
                                cfg_.latent_source + ",seed=" + std::to_string(cfg_.seed) + ",model=" +
                                hash_hex(file_checksum(model_dir("cvae") / "dec_w2.gint")) + ",basis=" +
                                hash_hex(file_checksum(out_ / "basis" / "directions.gint")));
        guarded_stage("generate-int", key, [&] {
            Cvae model = load_cvae(model_dir("cvae"));
            LatentBasis basis = load_latent_basis(out_ / "basis");
            LabeledImageSet train;
            const LabeledImageSet* encoded_from = nullptr;
            LatentSource source = LatentSource::prior;
            if (cfg_.latent_source == "encoded") {
                train = load_dataset(data_dir("train_confounded"));
                encoded_from = &train;
                source = LatentSource::encoded;
            }
            uint64_t basis_hash = file_checksum(out_ / "basis" / "directions.gint");
            for (const auto& spec : cfg_.strategies) {
                auto set = generate_interventional_set(model, basis, spec.strategy, cfg_.per_class_n,
                                                       mix_seed(cfg_.seed, fnv1a64(spec.name)), source, encoded_from);
                Json meta{{"strategy", spec.name},
                          {"t", spec.strategy.truncation},
                          {"k", spec.strategy.top_k},
                          {"s", spec.strategy.scale},
                          {"directions_per_sample", spec.strategy.directions_per_sample},
                          {"offset_mode", to_string(spec.strategy.offset_mode)},
                          {"source", cfg_.latent_source},
                          {"seed", cfg_.seed},
                          {"basis_checksum", hash_hex(basis_hash)}};
                save_dataset(data_dir("xint_" + spec.name), set.data, meta);
            }
        });
    }

    void stage_transfer_int() {
        require_artifact(data_dir("gray_train") / "images.gint", "synth-data");
        std::string key = subsection_key("transfer-int", "transfer:seed=" + std::to_string(cfg_.seed) + ",gray=" +
                                                             hash_hex(file_checksum(data_dir("gray_train") / "images.gint")));
        guarded_stage("transfer-int", key, [&] {
            ColorPalette palette;
            auto gray = load_dataset(data_dir("gray_train"));
            auto itr = transfer_intervention(gray, palette, mix_seed(cfg_.seed, 0x17a));
            save_dataset(data_dir("xitr"), itr, Json{{"kind", "transferred"}, {"seed", cfg_.seed}});
        });
    }

    void stage_train_classifier() {
        require_artifact(data_dir("train_confounded") / "images.gint", "synth-data");
        for (const auto& spec : cfg_.strategies)
            require_artifact(data_dir("xint_" + spec.name) / "images.gint", "generate-int");
        if (cfg_.train_transfer_model) require_artifact(data_dir("xitr") / "images.gint", "transfer-int");
        require_artifact(data_dir("irm_env1") / "images.gint", "synth-data");
        std::string key = subsection_key(
            "train-classifier",
            "clf:" + std::to_string(cfg_.clf_hidden) + "," + std::to_string(cfg_.clf_epochs) + "," +
                std::to_string(cfg_.clf_batch) + "," + std::to_string(cfg_.clf_lr) + ",l1=" +
                std::to_string(cfg_.lambda1) + ",l2=" + std::to_string(cfg_.lambda2) + ",tm=" +
                std::to_string(cfg_.train_transfer_model) + ",irm=" + std::to_string(cfg_.irm_penalty_weight) + "," +
                std::to_string(cfg_.irm_warmup_steps) + "," + std::to_string(cfg_.irm_epochs) + "," +
                std::to_string(cfg_.irm_batch_per_env) + "," + cfg_.irm_env_mode + ",seed=" +
                std::to_string(cfg_.seed) + ",train=" +
                hash_hex(file_checksum(data_dir("train_confounded") / "images.gint")) + ",xint=" +
                hash_hex(file_checksum(data_dir("xint_" + cfg_.train_strategy) / "images.gint")));
        guarded_stage("train-classifier", key, [&] {
            auto train = load_dataset(data_dir("train_confounded"));

            TrainConfig base;
            base.hidden = cfg_.clf_hidden;
            base.epochs = cfg_.clf_epochs;
            base.batch_x = cfg_.clf_batch;
            base.batch_int = cfg_.clf_batch;
            base.batch_itr = cfg_.clf_batch;
            base.lr = cfg_.clf_lr;

            // Baseline: original data only.
            {
                TrainConfig cfg = base;
                cfg.seed = mix_seed(cfg_.seed, fnv1a64("erm"));
                Classifier clf = train_classifier(&train, nullptr, nullptr, cfg);
                save_classifier(model_dir("clf_erm"), clf, Json{{"method", "erm"}});
            }
            // One classifier per strategy, trained on its generated data only.
            for (const auto& spec : cfg_.strategies) {
                auto xint = load_dataset(data_dir("xint_" + spec.name));
                TrainConfig cfg = base;
                cfg.use_original_data = false;
                cfg.lambda1 = 1.0;
                cfg.seed = mix_seed(cfg_.seed, fnv1a64("clf_" + spec.name));
                Classifier clf = train_classifier(nullptr, &xint, nullptr, cfg);
                save_classifier(model_dir("clf_strategy_" + spec.name), clf,
                                Json{{"method", "strategy"}, {"strategy", spec.name}});
            }
            // Three-term model with the transferred data.
            if (cfg_.train_transfer_model) {
                auto xint = load_dataset(data_dir("xint_" + cfg_.train_strategy));
                auto xitr = load_dataset(data_dir("xitr"));
                TrainConfig cfg = base;
                cfg.lambda1 = cfg_.lambda1;
                cfg.lambda2 = cfg_.lambda2;
                cfg.seed = mix_seed(cfg_.seed, fnv1a64("transfer"));
                Classifier clf = train_classifier(&train, cfg.lambda1 > 0 ? &xint : nullptr,
                                                  cfg.lambda2 > 0 ? &xitr : nullptr, cfg);
                save_classifier(model_dir("clf_transfer"), clf,
                                Json{{"method", "transfer"}, {"lambda1", cfg_.lambda1}, {"lambda2", cfg_.lambda2}});
            }
            // IRM over the two environments.
            {
                auto env1 = load_dataset(data_dir("irm_env1"));
                auto env2 = load_dataset(data_dir("irm_env2"));
                IrmConfig icfg;
                icfg.penalty_weight = cfg_.irm_penalty_weight;
                icfg.warmup_steps = cfg_.irm_warmup_steps;
                icfg.epochs = cfg_.irm_epochs;
                icfg.batch_per_env = cfg_.irm_batch_per_env;
                icfg.hidden = cfg_.clf_hidden;
                icfg.lr = cfg_.clf_lr;
                icfg.seed = mix_seed(cfg_.seed, fnv1a64("irm"));
                Classifier clf = irm_train({&env1, &env2}, cfg_.irm_penalty_weight, icfg);
                save_classifier(model_dir("clf_irm"), clf, Json{{"method", "irm"}});
            }
        });
    }

    std::vector<std::string> classifier_names() const {
        std::vector<std::string> names = {"erm"};
        for (const auto& spec : cfg_.strategies) names.push_back("strategy_" + spec.name);
        if (cfg_.train_transfer_model) names.push_back("transfer");
        names.push_back("irm");
        return names;
    }

    // Public method name for a classifier directory name.
    std::string method_label(const std::string& clf_name) const {
        if (clf_name == "strategy_" + cfg_.observational_strategy) return "observational_cvae";
        if (clf_name == "strategy_" + cfg_.train_strategy) return "interventional_cvae";
        if (clf_name.rfind("strategy_", 0) == 0) return "interventional_" + clf_name.substr(9);
        if (clf_name == "transfer") return "genint_transfer";
        return clf_name;
    }

    void stage_eval() {
        for (const auto& name : classifier_names())
            require_artifact(model_dir("clf_" + name) / "meta.json", "train-classifier");
        require_artifact(data_dir("test_confounded") / "images.gint", "synth-data");
        std::string models_hash;
        for (const auto& name : classifier_names())
            models_hash += hash_hex(file_checksum(model_dir("clf_" + name) / "w1.gint"));
        std::string key = subsection_key("eval", "eval:" + models_hash + ",tests=" +
                                                     hash_hex(file_checksum(data_dir("test_confounded") / "images.gint")) +
                                                     hash_hex(file_checksum(data_dir("test_causal") / "images.gint")));
        guarded_stage("eval", key, [&] {
            auto test_conf = load_dataset(data_dir("test_confounded"));
            auto test_causal = load_dataset(data_dir("test_causal"));
            std::vector<MetricRow> rows;
            Json eval_json;
            for (const auto& name : classifier_names()) {
                Classifier clf = load_classifier(model_dir("clf_" + name));
                auto conf = evaluate(clf, test_conf);
                auto causal = evaluate(clf, test_causal);
                std::string method = method_label(name);
                rows.push_back({run_id_, method, "test_confounded", conf.top1, conf.chance, cfg_.seed});
                rows.push_back({run_id_, method, "test_causal", causal.top1, causal.chance, cfg_.seed});
                eval_json[method] = {{"test_confounded", conf.top1},
                                     {"test_causal", causal.top1},
                                     {"chance", conf.chance},
                                     {"per_class_causal", causal.per_class}};
            }
            fs::create_directories(reports_dir());
            write_text_file(reports_dir() / "eval.json", eval_json.dump(2) + "\n");
            emit_metrics(rows, deterministic_summary(eval_json), reports_dir());
        });
    }

    void stage_causal_bound() {
        require_artifact(model_dir("clf_erm") / "meta.json", "train-classifier");
        for (const auto& spec : cfg_.strategies)
            require_artifact(data_dir("xint_" + spec.name) / "images.gint", "generate-int");
        std::string key = subsection_key(
            "causal-bound", "bound:paired,tau=" + std::to_string(cfg_.tau) + ",split=" + cfg_.query_split + ",qn=" +
                                std::to_string(cfg_.causal_query_n) + ",erm=" +
                                hash_hex(file_checksum(model_dir("clf_erm") / "w1.gint")));
        guarded_stage("causal-bound", key, [&] {
            Classifier feature_model = load_classifier(model_dir("clf_erm"));
            auto queries = load_dataset(data_dir(cfg_.query_split == "test_causal" ? "test_causal" : "test_confounded"));
            int64_t qn = std::min<int64_t>(cfg_.causal_query_n, queries.size());
            std::vector<int64_t> head(static_cast<size_t>(qn));
            for (int64_t i = 0; i < qn; ++i) head[static_cast<size_t>(i)] = i;
            auto query_subset = queries.subset(head);

            Json bound_json;
            bound_json["tau"] = cfg_.tau;
            bound_json["query_split"] = cfg_.query_split;
            bound_json["query_n"] = qn;
            Json strategies = Json::array();
            fs::create_directories(reports_dir());
            // Per-category protocol: the queries of class k are scored against
            // the samples generated for class k, and contributions are summed
            // over categories.
            const int classes = query_subset.num_classes;
            for (const auto& spec : cfg_.strategies) {
                auto xint = load_dataset(data_dir("xint_" + spec.name));
                double total = 0.0;
                int64_t count = 0;
                std::string csv = "query_idx,label,nearest_distance,log_contribution\n";
                for (int cls = 0; cls < classes; ++cls) {
                    std::vector<int64_t> qi, gi;
                    for (int64_t i = 0; i < query_subset.size(); ++i)
                        if (query_subset.labels[static_cast<size_t>(i)] == cls) qi.push_back(i);
                    for (int64_t i = 0; i < xint.size(); ++i)
                        if (xint.labels[static_cast<size_t>(i)] == cls) gi.push_back(i);
                    if (qi.empty() || gi.empty()) continue;
                    Tensor qf = feature_extract(feature_model, query_subset.subset(qi).flat_images());
                    Tensor gf = feature_extract(feature_model, xint.subset(gi).flat_images());
                    auto report = estimate_log_px_given_z(qf, gf, cfg_.tau);
                    for (size_t i = 0; i < report.contribution.size(); ++i)
                        csv += std::to_string(qi[i]) + "," + std::to_string(cls) + "," +
                               format_prob(report.nearest_distance[i]) + "," + format_prob(report.contribution[i]) +
                               "\n";
                    total += report.total;
                    count += static_cast<int64_t>(report.contribution.size());
                }
                write_text_file(reports_dir() / ("likelihood_" + spec.name + ".csv"), csv);
                strategies.push_back({{"name", spec.name},
                                      {"t", spec.strategy.truncation},
                                      {"k", spec.strategy.top_k},
                                      {"s", spec.strategy.scale},
                                      {"total_log_pxz", total},
                                      {"mean_log_pxz", count > 0 ? total / static_cast<double>(count) : 0.0}});
            }
            bound_json["strategies"] = strategies;

            // A worked discrete-SCM example with exact intervals, so the bound
            // report carries interval endpoints next to the likelihoods.
            Rng rng(mix_seed(cfg_.seed, 0xb0d));
            auto scm = random_discrete_scm(rng, 3, 0.05);
            auto tables = observational_joint_discrete(scm);
            double exact = backdoor_adjust_discrete(scm, 0, 0);
            auto nat = natural_bound(tables.pxy(0, 0), tables.px(0));
            Json intervals = Json::array();
            auto cut = scm.with_exogenous_z(std::vector<double>(static_cast<size_t>(scm.nz), 1.0 / scm.nz));
            auto cut_tables = observational_joint_discrete(cut);
            double cut_exact = backdoor_adjust_discrete(cut, 0, 0);
            for (int z = 0; z < cut.nz; ++z) {
                auto bound = intervened_bound({cut_tables.pyx_z(z, 0, 0), cut_tables.px_z(z, 0)});
                intervals.push_back({{"z", z}, {"lower", bound.lower}, {"upper", bound.upper}});
            }
            bound_json["scm_example"] = {{"natural", {{"lower", nat.lower}, {"upper", nat.upper}}},
                                         {"exact_do", exact},
                                         {"intervened", intervals},
                                         {"intervened_exact_do", cut_exact}};
            write_text_file(reports_dir() / "causal_bound.json", bound_json.dump(2) + "\n");
        });
    }

    void stage_corr_analysis() {
        require_artifact(data_dir("train_confounded") / "nuisance.gint", "synth-data");
        require_artifact(data_dir("xint_" + cfg_.train_strategy) / "nuisance.gint", "generate-int");
        std::string key = subsection_key(
            "corr-analysis", "corr:epochs=" + std::to_string(cfg_.probe_epochs) + ",hidden=" +
                                 std::to_string(cfg_.probe_hidden) + ",reg=" + std::to_string(cfg_.probe_use_regressor) +
                                 "," + std::to_string(cfg_.regressor_epochs) + ",xint=" +
                                 hash_hex(file_checksum(data_dir("xint_" + cfg_.train_strategy) / "nuisance.gint")));
        guarded_stage("corr-analysis", key, [&] {
            auto train = load_dataset(data_dir("train_confounded"));
            auto xint = load_dataset(data_dir("xint_" + cfg_.train_strategy));
            std::string csv = "dataset,subset_size,accuracy,chance,ratio\n";
            Json corr;
            ProbeConfig pcfg;
            pcfg.hidden = cfg_.probe_hidden;
            pcfg.epochs = cfg_.probe_epochs;
            pcfg.seed = mix_seed(cfg_.seed, 0x9097);
            auto run_probe = [&](const std::string& name, const Tensor& z, const std::vector<int>& labels) {
                Json curve = Json::array();
                for (int subset : cfg_.probe_subset_sizes) {
                    auto result = correlation_probe(z, labels, subset, pcfg);
                    csv += name + "," + std::to_string(subset) + "," + format_prob(result.heldout_accuracy) + "," +
                           format_prob(result.chance) + "," + format_prob(result.times_over_chance) + "\n";
                    curve.push_back({{"subset_size", subset},
                                     {"accuracy", result.heldout_accuracy},
                                     {"ratio", result.times_over_chance}});
                }
                corr[name] = curve;
            };
            run_probe("confounded_color", *train.nuisance, train.labels);
            run_probe("genint_z", *xint.nuisance, xint.labels);

            if (cfg_.probe_use_regressor) {
                RegressorConfig rcfg;
                rcfg.epochs = cfg_.regressor_epochs;
                rcfg.seed = mix_seed(cfg_.seed, 0x9098);
                auto report = nuisance_regressor_train(xint, rcfg);
                corr["regressor"] = {{"train_mae", report.train_mae},
                                     {"val_mae", report.val_mae},
                                     {"mean_predictor_mae", report.mean_predictor_mae}};
                // The paper's check that predicted nuisances carry no class
                // information: probe z-hat -> y on the generated set.
                Tensor zhat = regressor_predict(report.model, xint.flat_images());
                auto chance_probe = correlation_probe(zhat, xint.labels, 10, pcfg);
                corr["regressor"]["class_from_zhat_accuracy"] = chance_probe.heldout_accuracy;
                corr["regressor"]["class_from_zhat_ratio"] = chance_probe.times_over_chance;
                csv += "genint_zhat,10," + format_prob(chance_probe.heldout_accuracy) + "," +
                       format_prob(chance_probe.chance) + "," + format_prob(chance_probe.times_over_chance) + "\n";
            }
            fs::create_directories(reports_dir());
            write_text_file(reports_dir() / "corr_analysis.csv", csv);
            write_text_file(reports_dir() / "corr_analysis.json", corr.dump(2) + "\n");
        });
    }

    void stage_ablate() {
        require_artifact(reports_dir() / "eval.json", "eval");
        require_artifact(reports_dir() / "causal_bound.json", "causal-bound");
        std::string key = subsection_key("ablate", "ablate:" + hash_hex(file_checksum(reports_dir() / "eval.json")) +
                                                       hash_hex(file_checksum(reports_dir() / "causal_bound.json")));
        guarded_stage("ablate", key, [&] {
            Json eval_json = Json::parse(read_text_file(reports_dir() / "eval.json"));
            Json bound_json = Json::parse(read_text_file(reports_dir() / "causal_bound.json"));
            struct Row {
                std::string name;
                double t, s;
                int k;
                double mean_logpxz, total_logpxz, causal, confounded;
            };
            std::vector<Row> rows;
            for (const auto& s : bound_json["strategies"]) {
                Row r;
                r.name = s["name"];
                r.t = s["t"];
                r.k = s["k"];
                r.s = s["s"];
                r.mean_logpxz = s["mean_log_pxz"];
                r.total_logpxz = s["total_log_pxz"];
                std::string method = method_label("strategy_" + r.name);
                r.causal = eval_json[method]["test_causal"];
                r.confounded = eval_json[method]["test_confounded"];
                rows.push_back(r);
            }
            std::stable_sort(rows.begin(), rows.end(),
                             [](const Row& a, const Row& b) { return a.mean_logpxz < b.mean_logpxz; });
            std::string csv = "strategy,t,k,s,mean_log_pxz,total_log_pxz,causal_top1,confounded_top1\n";
            for (const auto& r : rows)
                csv += r.name + "," + format_prob(r.t) + "," + std::to_string(r.k) + "," + format_prob(r.s) + "," +
                       format_prob(r.mean_logpxz) + "," + format_prob(r.total_logpxz) + "," + format_prob(r.causal) +
                       "," + format_prob(r.confounded) + "\n";
            write_text_file(reports_dir() / "ablation.csv", csv);
        });
    }

    // ---- summary -----------------------------------------------------------

    Json deterministic_summary(const Json& eval_json) const {
        Json s;
        s["run_id"] = run_id_;
        s["seed"] = cfg_.seed;
        s["config"] = config_to_json(cfg_);
        s["metrics"] = eval_json;
        Json checksums;
        for (const auto& rel : {"data/train_confounded/images.gint", "data/test_confounded/images.gint",
                                "data/test_causal/images.gint"}) {
            fs::path p = out_ / rel;
            if (fs::exists(p)) checksums[rel] = hash_hex(file_checksum(p));
        }
        for (const auto& spec : cfg_.strategies) {
            fs::path p = data_dir("xint_" + spec.name) / "images.gint";
            if (fs::exists(p)) checksums["data/xint_" + spec.name + "/images.gint"] = hash_hex(file_checksum(p));
        }
        s["artifact_checksums"] = checksums;
        return s;
    }

    void write_summary() {
        fs::create_directories(reports_dir());
        Json eval_json = Json::object();
        if (fs::exists(reports_dir() / "eval.json"))
            eval_json = Json::parse(read_text_file(reports_dir() / "eval.json"));
        Json s = deterministic_summary(eval_json);
        // Wall-clock lives in its own field, outside any determinism checks.
        Json timing = Json::array();
        for (const auto& rec : records_)
            timing.push_back({{"stage", rec.name}, {"seconds", rec.seconds}, {"skipped", rec.skipped}});
        s["timing"] = timing;
        write_text_file(reports_dir() / "summary.json", s.dump(2) + "\n");
    }

    fs::path data_dir(const std::string& name) const { return out_ / "data" / name; }
    fs::path model_dir(const std::string& name) const { return out_ / "models" / name; }
    fs::path reports_dir() const { return out_ / "reports"; }

private:
    std::string subsection_key(const std::string& stage, const std::string& material) const {
        return hash_hex(fnv1a64(stage + "|" + material));
    }

    void require_artifact(const fs::path& path, const std::string& producer) const {
        if (!fs::exists(path))
            throw DependencyError("missing artifact '" + path.string() + "'; run stage '" + producer + "' first");
    }

    void guarded_stage(const std::string& name, const std::string& key, const std::function<void()>& body) {
        fs::path marker = out_ / "stages" / (name + ".json");
        if (!force_ && fs::exists(marker)) {
            Json m = Json::parse(read_text_file(marker));
            if (m.value("key", "") == key) {
                records_.push_back({name, true, 0.0});
                return;
            }
        }
        auto start = std::chrono::steady_clock::now();
        body();
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        fs::create_directories(out_ / "stages");
        Json m{{"key", key}, {"stage", name}};
        write_text_file(marker, m.dump(2) + "\n");
        records_.push_back({name, false, seconds});
    }

    ExperimentConfig cfg_;
    bool force_ = false;
    fs::path out_;
    std::string run_id_;
    std::vector<StageRecord> records_;
};

}  // namespace genint
