#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "genint/bundle.hpp"
#include "genint/errors.hpp"
#include "genint/latent.hpp"

namespace genint {

// One cell of the intervention-strategy grid.
struct StrategySpec {
    std::string name;
    InterventionStrategy strategy;
};

inline std::vector<StrategySpec> default_strategies() {
    std::vector<StrategySpec> out;
    {
        StrategySpec s;
        s.name = "observational";
        s.strategy = InterventionStrategy{1.0, 1, 0.0, 1, OffsetMode::none};
        out.push_back(s);
    }
    {
        StrategySpec s;
        s.name = "weak";
        s.strategy = InterventionStrategy{1.0, 1, 1.0, 1, OffsetMode::none};
        out.push_back(s);
    }
    {
        StrategySpec s;
        s.name = "strong";
        s.strategy = InterventionStrategy{1.0, 2, 3.0, 2, OffsetMode::none};
        out.push_back(s);
    }
    return out;
}

struct ExperimentConfig {
    // [data]
    std::string data_source = "builtin";  // builtin | idx
    std::string idx_images, idx_labels, idx_test_images, idx_test_labels;
    int64_t train_n = 16000;
    int64_t test_n = 4000;
    bool causal_unseen_hues = false;

    // [cvae]
    int cvae_hidden = 400;
    int cvae_latent_dim = 16;
    int cvae_epochs = 20;
    int cvae_batch = 128;
    double cvae_lr = 1e-3;
    double cvae_beta = 1.0;

    // [intervention]
    int64_t per_class_n = 1600;
    std::string latent_source = "encoded";  // encoded | prior
    std::string pca_source = "posterior";    // posterior | prior
    std::vector<StrategySpec> strategies = default_strategies();
    std::string train_strategy = "strong";
    std::string observational_strategy = "observational";

    // [classifier]
    int clf_hidden = 256;
    int clf_epochs = 10;
    int clf_batch = 128;
    double clf_lr = 1e-3;
    double lambda1 = 0.05;
    double lambda2 = 1.0;
    bool train_transfer_model = true;

    // [irm]
    double irm_penalty_weight = 0.1;
    int irm_warmup_steps = 100;
    int irm_epochs = 10;
    int irm_batch_per_env = 64;
    std::string irm_env_mode = "correlation_strengths";  // correlation_strengths | color_parity
    double irm_env_noise_1 = 0.05;
    double irm_env_noise_2 = 0.15;

    // [causal]
    double tau = 1.0;
    std::string query_split = "test_causal";  // test_causal | test_confounded
    int64_t causal_query_n = 2000;

    // [probe]
    std::vector<int> probe_subset_sizes = {2, 5, 10};
    int probe_epochs = 60;
    int probe_hidden = 128;
    bool probe_use_regressor = true;
    int regressor_epochs = 8;

    // [output]
    std::string out_dir = "out";

    // [run]
    uint64_t seed = 7;

    // Canonical serialization: feeds run ids and stage keys.
    std::string canonical() const;
};

namespace config_detail {

struct IniDoc {
    // section -> key -> value, plus the order encountered for messages.
    std::map<std::string, std::map<std::string, std::string>> sections;
};

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline IniDoc parse_ini(const std::string& text, std::vector<std::string>& errors) {
    IniDoc doc;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t comment = line.find_first_of(";#");
        if (comment != std::string::npos) line = line.substr(0, comment);
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                errors.push_back("line " + std::to_string(lineno) + ": unterminated section header");
                continue;
            }
            section = trim(t.substr(1, t.size() - 2));
            doc.sections[section];
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value, got '" + t + "'");
            continue;
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (section.empty()) {
            errors.push_back("line " + std::to_string(lineno) + ": key '" + key + "' outside any [section]");
            continue;
        }
        doc.sections[section][key] = value;
    }
    return doc;
}

inline int edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1, 0));
    for (size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
    for (size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
    for (size_t i = 1; i <= a.size(); ++i)
        for (size_t j = 1; j <= b.size(); ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
    return d[a.size()][b.size()];
}

inline std::string nearest_key(const std::string& key, const std::vector<std::string>& known) {
    std::string best;
    int best_d = 1 << 20;
    for (const auto& k : known) {
        int d = edit_distance(key, k);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

// Typed readers accumulating errors instead of throwing.
class SectionReader {
public:
    SectionReader(const std::string& section, const std::map<std::string, std::string>* kv,
                  std::vector<std::string>& errors)
        : section_(section), kv_(kv), errors_(errors) {}

    void expect_keys(std::vector<std::string> keys) {
        known_ = std::move(keys);
        if (!kv_) return;
        for (const auto& [key, value] : *kv_) {
            if (std::find(known_.begin(), known_.end(), key) == known_.end())
                errors_.push_back("[" + section_ + "] unknown key '" + key + "' (nearest valid key: '" +
                                  nearest_key(key, known_) + "')");
        }
    }

    bool has(const std::string& key) const { return kv_ && kv_->count(key) > 0; }

    std::string str(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        return kv_->at(key);
    }

    std::string choice(const std::string& key, const std::string& fallback, std::vector<std::string> allowed) {
        std::string v = str(key, fallback);
        if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
            std::string opts;
            for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
            errors_.push_back("[" + section_ + "] " + key + " = '" + v + "' is not one of {" + opts + "}");
            return fallback;
        }
        return v;
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        std::string v = kv_->at(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        errors_.push_back("[" + section_ + "] " + key + " = '" + v + "' is not a boolean");
        return fallback;
    }

    double real(const std::string& key, double fallback, double lo, double hi, const std::string& bound_desc) {
        if (!has(key)) return fallback;
        try {
            size_t pos = 0;
            double v = std::stod(kv_->at(key), &pos);
            if (pos != kv_->at(key).size()) throw std::invalid_argument("trailing");
            if (v < lo || v > hi) {
                errors_.push_back("[" + section_ + "] " + key + " = " + kv_->at(key) + " violates " + bound_desc);
                return fallback;
            }
            return v;
        } catch (const std::exception&) {
            errors_.push_back("[" + section_ + "] " + key + " = '" + kv_->at(key) + "' is not a number");
            return fallback;
        }
    }

    int64_t integer(const std::string& key, int64_t fallback, int64_t lo, int64_t hi, const std::string& bound_desc) {
        if (!has(key)) return fallback;
        try {
            size_t pos = 0;
            long long v = std::stoll(kv_->at(key), &pos);
            if (pos != kv_->at(key).size()) throw std::invalid_argument("trailing");
            if (v < lo || v > hi) {
                errors_.push_back("[" + section_ + "] " + key + " = " + kv_->at(key) + " violates " + bound_desc);
                return fallback;
            }
            return v;
        } catch (const std::exception&) {
            errors_.push_back("[" + section_ + "] " + key + " = '" + kv_->at(key) + "' is not an integer");
            return fallback;
        }
    }

private:
    std::string section_;
    const std::map<std::string, std::string>* kv_;
    std::vector<std::string>& errors_;
    std::vector<std::string> known_;
};

// Strategy grid syntax (cells separated by '|', since ';' opens an inline
// comment):
//   name:t=1,k=2,s=3,d=2[,offset=none] | name2:...
inline std::vector<StrategySpec> parse_strategies(const std::string& text, std::vector<std::string>& errors) {
    std::vector<StrategySpec> out;
    std::istringstream cells(text);
    std::string cell;
    while (std::getline(cells, cell, '|')) {
        cell = trim(cell);
        if (cell.empty()) continue;
        size_t colon = cell.find(':');
        if (colon == std::string::npos) {
            errors.push_back("[intervention] strategies: cell '" + cell + "' missing 'name:' prefix");
            continue;
        }
        StrategySpec spec;
        spec.name = trim(cell.substr(0, colon));
        std::istringstream fields(cell.substr(colon + 1));
        std::string field;
        bool ok = true;
        while (std::getline(fields, field, ',')) {
            field = trim(field);
            size_t eq = field.find('=');
            if (eq == std::string::npos) {
                errors.push_back("[intervention] strategies: field '" + field + "' in '" + spec.name +
                                 "' is not key=value");
                ok = false;
                continue;
            }
            std::string key = trim(field.substr(0, eq));
            std::string value = trim(field.substr(eq + 1));
            try {
                if (key == "t") {
                    spec.strategy.truncation = std::stod(value);
                } else if (key == "k") {
                    spec.strategy.top_k = std::stoi(value);
                } else if (key == "s") {
                    spec.strategy.scale = std::stod(value);
                } else if (key == "d") {
                    spec.strategy.directions_per_sample = std::stoi(value);
                } else if (key == "offset") {
                    if (value == "none") {
                        spec.strategy.offset_mode = OffsetMode::none;
                    } else if (value == "mean_projection") {
                        spec.strategy.offset_mode = OffsetMode::mean_projection;
                    } else {
                        errors.push_back("[intervention] strategies: offset '" + value + "' in '" + spec.name +
                                         "' is not none|mean_projection");
                        ok = false;
                    }
                } else {
                    errors.push_back("[intervention] strategies: unknown field '" + key + "' in '" + spec.name + "'");
                    ok = false;
                }
            } catch (const std::exception&) {
                errors.push_back("[intervention] strategies: value '" + value + "' for '" + key + "' in '" +
                                 spec.name + "' is not numeric");
                ok = false;
            }
        }
        spec.strategy.directions_per_sample = std::min(spec.strategy.directions_per_sample, spec.strategy.top_k);
        if (ok) out.push_back(spec);
    }
    if (out.empty()) errors.push_back("[intervention] strategies: grid is empty");
    return out;
}

}  // namespace config_detail

// Parses and fully validates a config, reporting every failure at once.
inline ExperimentConfig parse_config_text(const std::string& text) {
    using namespace config_detail;
    std::vector<std::string> errors;
    IniDoc doc = parse_ini(text, errors);

    const std::vector<std::string> known_sections = {"data", "cvae", "intervention", "classifier",
                                                     "irm",  "causal", "probe",       "output",
                                                     "run"};
    for (const auto& [name, kv] : doc.sections) {
        if (std::find(known_sections.begin(), known_sections.end(), name) == known_sections.end())
            errors.push_back("unknown section [" + name + "] (nearest: [" + nearest_key(name, known_sections) + "])");
    }

    auto section = [&](const std::string& name) -> const std::map<std::string, std::string>* {
        auto it = doc.sections.find(name);
        return it == doc.sections.end() ? nullptr : &it->second;
    };

    ExperimentConfig cfg;

    {
        SectionReader r("data", section("data"), errors);
        r.expect_keys({"source", "idx_images", "idx_labels", "idx_test_images", "idx_test_labels", "train_n",
                       "test_n", "causal_unseen_hues"});
        cfg.data_source = r.choice("source", cfg.data_source, {"builtin", "idx"});
        cfg.idx_images = r.str("idx_images", "");
        cfg.idx_labels = r.str("idx_labels", "");
        cfg.idx_test_images = r.str("idx_test_images", "");
        cfg.idx_test_labels = r.str("idx_test_labels", "");
        cfg.train_n = r.integer("train_n", cfg.train_n, 100, 1000000, "train_n in [100, 1e6]");
        cfg.test_n = r.integer("test_n", cfg.test_n, 100, 1000000, "test_n in [100, 1e6]");
        cfg.causal_unseen_hues = r.boolean("causal_unseen_hues", cfg.causal_unseen_hues);
        if (cfg.data_source == "idx") {
            for (const auto& [key, value] : {std::pair<std::string, std::string>{"idx_images", cfg.idx_images},
                                             {"idx_labels", cfg.idx_labels},
                                             {"idx_test_images", cfg.idx_test_images},
                                             {"idx_test_labels", cfg.idx_test_labels}}) {
                if (value.empty()) {
                    errors.push_back("[data] source = idx requires " + key);
                } else if (!fs::exists(value)) {
                    errors.push_back("[data] " + key + " = '" + value + "' does not resolve to a file");
                }
            }
        }
    }
    {
        SectionReader r("cvae", section("cvae"), errors);
        r.expect_keys({"hidden", "latent_dim", "epochs", "batch", "lr", "beta"});
        cfg.cvae_hidden = static_cast<int>(r.integer("hidden", cfg.cvae_hidden, 1, 65536, "hidden >= 1"));
        cfg.cvae_latent_dim = static_cast<int>(r.integer("latent_dim", cfg.cvae_latent_dim, 2, 1024, "latent_dim >= 2"));
        cfg.cvae_epochs = static_cast<int>(r.integer("epochs", cfg.cvae_epochs, 0, 10000, "epochs >= 0"));
        cfg.cvae_batch = static_cast<int>(r.integer("batch", cfg.cvae_batch, 1, 65536, "batch >= 1"));
        cfg.cvae_lr = r.real("lr", cfg.cvae_lr, 0.0, 10.0, "lr in [0, 10]");
        cfg.cvae_beta = r.real("beta", cfg.cvae_beta, 0.0, 1000.0, "beta >= 0");
    }
    {
        SectionReader r("intervention", section("intervention"), errors);
        r.expect_keys({"per_class_n", "source", "pca_source", "strategies", "train_strategy",
                       "observational_strategy"});
        cfg.per_class_n = r.integer("per_class_n", cfg.per_class_n, 1, 1000000, "per_class_n >= 1");
        cfg.latent_source = r.choice("source", cfg.latent_source, {"prior", "encoded"});
        cfg.pca_source = r.choice("pca_source", cfg.pca_source, {"posterior", "prior"});
        if (r.has("strategies")) cfg.strategies = parse_strategies(r.str("strategies", ""), errors);
        cfg.train_strategy = r.str("train_strategy", cfg.train_strategy);
        cfg.observational_strategy = r.str("observational_strategy", cfg.observational_strategy);
        for (const std::string& name : {cfg.train_strategy, cfg.observational_strategy}) {
            bool found = false;
            for (const auto& s : cfg.strategies) found = found || s.name == name;
            if (!found) errors.push_back("[intervention] strategy '" + name + "' is not in the grid");
        }
        for (const auto& s : cfg.strategies) {
            try {
                s.strategy.validate(cfg.cvae_latent_dim);
            } catch (const std::exception& e) {
                errors.push_back("[intervention] strategy '" + s.name + "': " + e.what());
            }
        }
    }
    {
        SectionReader r("classifier", section("classifier"), errors);
        r.expect_keys({"hidden", "epochs", "batch", "lr", "lambda1", "lambda2", "train_transfer_model"});
        cfg.clf_hidden = static_cast<int>(r.integer("hidden", cfg.clf_hidden, 1, 65536, "hidden >= 1"));
        cfg.clf_epochs = static_cast<int>(r.integer("epochs", cfg.clf_epochs, 0, 10000, "epochs >= 0"));
        cfg.clf_batch = static_cast<int>(r.integer("batch", cfg.clf_batch, 1, 65536, "batch >= 1"));
        cfg.clf_lr = r.real("lr", cfg.clf_lr, 0.0, 10.0, "lr in [0, 10]");
        cfg.lambda1 = r.real("lambda1", cfg.lambda1, 0.0, 1e6, "lambda1 >= 0");
        cfg.lambda2 = r.real("lambda2", cfg.lambda2, 0.0, 1e6, "lambda2 >= 0");
        cfg.train_transfer_model = r.boolean("train_transfer_model", cfg.train_transfer_model);
    }
    {
        SectionReader r("irm", section("irm"), errors);
        r.expect_keys({"penalty_weight", "warmup_steps", "epochs", "batch_per_env", "env_mode", "env_noise_1",
                       "env_noise_2"});
        cfg.irm_penalty_weight = r.real("penalty_weight", cfg.irm_penalty_weight, 0.0, 1e9, "penalty_weight >= 0");
        cfg.irm_warmup_steps = static_cast<int>(r.integer("warmup_steps", cfg.irm_warmup_steps, 0, 1000000, "warmup_steps >= 0"));
        cfg.irm_epochs = static_cast<int>(r.integer("epochs", cfg.irm_epochs, 0, 10000, "epochs >= 0"));
        cfg.irm_batch_per_env = static_cast<int>(r.integer("batch_per_env", cfg.irm_batch_per_env, 1, 65536, "batch_per_env >= 1"));
        cfg.irm_env_mode = r.choice("env_mode", cfg.irm_env_mode, {"correlation_strengths", "color_parity"});
        cfg.irm_env_noise_1 = r.real("env_noise_1", cfg.irm_env_noise_1, 0.0, 1.0, "env_noise_1 in [0, 1]");
        cfg.irm_env_noise_2 = r.real("env_noise_2", cfg.irm_env_noise_2, 0.0, 1.0, "env_noise_2 in [0, 1]");
    }
    {
        SectionReader r("causal", section("causal"), errors);
        r.expect_keys({"tau", "query_split", "query_n"});
        cfg.tau = r.real("tau", cfg.tau, 1e-6, 1e6, "tau > 0");
        cfg.query_split = r.choice("query_split", cfg.query_split, {"test_causal", "test_confounded"});
        cfg.causal_query_n = r.integer("query_n", cfg.causal_query_n, 10, 1000000, "query_n >= 10");
    }
    {
        SectionReader r("probe", section("probe"), errors);
        r.expect_keys({"subset_sizes", "epochs", "hidden", "use_regressor", "regressor_epochs"});
        if (r.has("subset_sizes")) {
            cfg.probe_subset_sizes.clear();
            std::istringstream in(r.str("subset_sizes", ""));
            std::string tok;
            while (std::getline(in, tok, ',')) {
                try {
                    int v = std::stoi(config_detail::trim(tok));
                    if (v < 2 || v > 10) {
                        errors.push_back("[probe] subset size " + tok + " violates 2 <= size <= 10");
                    } else {
                        cfg.probe_subset_sizes.push_back(v);
                    }
                } catch (const std::exception&) {
                    errors.push_back("[probe] subset_sizes entry '" + tok + "' is not an integer");
                }
            }
            if (cfg.probe_subset_sizes.empty()) errors.push_back("[probe] subset_sizes is empty");
        }
        cfg.probe_epochs = static_cast<int>(r.integer("epochs", cfg.probe_epochs, 1, 10000, "epochs >= 1"));
        cfg.probe_hidden = static_cast<int>(r.integer("hidden", cfg.probe_hidden, 1, 65536, "hidden >= 1"));
        cfg.probe_use_regressor = r.boolean("use_regressor", cfg.probe_use_regressor);
        cfg.regressor_epochs = static_cast<int>(r.integer("regressor_epochs", cfg.regressor_epochs, 1, 10000, "regressor_epochs >= 1"));
    }
    {
        SectionReader r("output", section("output"), errors);
        r.expect_keys({"dir"});
        cfg.out_dir = r.str("dir", cfg.out_dir);
    }
    {
        SectionReader r("run", section("run"), errors);
        r.expect_keys({"seed"});
        cfg.seed = static_cast<uint64_t>(r.integer("seed", static_cast<int64_t>(cfg.seed), 0, INT64_MAX, "seed >= 0"));
    }

    if (!errors.empty()) {
        std::string msg = "config validation failed (" + std::to_string(errors.size()) + " error(s)):";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
    return parse_config_text(read_text_file(path));
}

inline std::string ExperimentConfig::canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "data:" << data_source << "," << idx_images << "," << idx_labels << "," << idx_test_images << ","
       << idx_test_labels << "," << train_n << "," << test_n << "," << causal_unseen_hues << "\n";
    os << "cvae:" << cvae_hidden << "," << cvae_latent_dim << "," << cvae_epochs << "," << cvae_batch << ","
       << cvae_lr << "," << cvae_beta << "\n";
    os << "intervention:" << per_class_n << "," << latent_source << "," << pca_source << "," << train_strategy
       << "," << observational_strategy;
    for (const auto& s : strategies)
        os << ";" << s.name << ":t=" << s.strategy.truncation << ",k=" << s.strategy.top_k
           << ",s=" << s.strategy.scale << ",d=" << s.strategy.directions_per_sample
           << ",offset=" << to_string(s.strategy.offset_mode);
    os << "\n";
    os << "classifier:" << clf_hidden << "," << clf_epochs << "," << clf_batch << "," << clf_lr << "," << lambda1
       << "," << lambda2 << "," << train_transfer_model << "\n";
    os << "irm:" << irm_penalty_weight << "," << irm_warmup_steps << "," << irm_epochs << "," << irm_batch_per_env
       << "," << irm_env_mode << "," << irm_env_noise_1 << "," << irm_env_noise_2 << "\n";
    os << "causal:" << tau << "," << query_split << "," << causal_query_n << "\n";
    os << "probe:";
    for (int s : probe_subset_sizes) os << s << " ";
    os << probe_epochs << "," << probe_hidden << "," << probe_use_regressor << "," << regressor_epochs << "\n";
    os << "run:" << seed << "\n";
    return os.str();
}

inline Json config_to_json(const ExperimentConfig& cfg) {
    Json j;
    j["data"] = {{"source", cfg.data_source}, {"train_n", cfg.train_n}, {"test_n", cfg.test_n},
                 {"causal_unseen_hues", cfg.causal_unseen_hues}};
    j["cvae"] = {{"hidden", cfg.cvae_hidden}, {"latent_dim", cfg.cvae_latent_dim}, {"epochs", cfg.cvae_epochs},
                 {"batch", cfg.cvae_batch},   {"lr", cfg.cvae_lr},                 {"beta", cfg.cvae_beta}};
    Json strategies = Json::array();
    for (const auto& s : cfg.strategies)
        strategies.push_back({{"name", s.name},
                              {"t", s.strategy.truncation},
                              {"k", s.strategy.top_k},
                              {"s", s.strategy.scale},
                              {"directions_per_sample", s.strategy.directions_per_sample},
                              {"offset_mode", to_string(s.strategy.offset_mode)}});
    j["intervention"] = {{"per_class_n", cfg.per_class_n},
                         {"source", cfg.latent_source},
                         {"pca_source", cfg.pca_source},
                         {"strategies", strategies},
                         {"train_strategy", cfg.train_strategy},
                         {"observational_strategy", cfg.observational_strategy}};
    j["classifier"] = {{"hidden", cfg.clf_hidden}, {"epochs", cfg.clf_epochs}, {"batch", cfg.clf_batch},
                       {"lr", cfg.clf_lr},         {"lambda1", cfg.lambda1},   {"lambda2", cfg.lambda2},
                       {"train_transfer_model", cfg.train_transfer_model}};
    j["irm"] = {{"penalty_weight", cfg.irm_penalty_weight},
                {"warmup_steps", cfg.irm_warmup_steps},
                {"epochs", cfg.irm_epochs},
                {"batch_per_env", cfg.irm_batch_per_env},
                {"env_mode", cfg.irm_env_mode},
                {"env_noise_1", cfg.irm_env_noise_1},
                {"env_noise_2", cfg.irm_env_noise_2}};
    j["causal"] = {{"tau", cfg.tau}, {"query_split", cfg.query_split}, {"query_n", cfg.causal_query_n}};
    j["probe"] = {{"subset_sizes", cfg.probe_subset_sizes},
                  {"epochs", cfg.probe_epochs},
                  {"hidden", cfg.probe_hidden},
                  {"use_regressor", cfg.probe_use_regressor},
                  {"regressor_epochs", cfg.regressor_epochs}};
    j["output"] = {{"dir", cfg.out_dir}};
    j["run"] = {{"seed", cfg.seed}};
    return j;
}

}  // namespace genint
