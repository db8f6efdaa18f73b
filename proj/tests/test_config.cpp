#include <doctest.h>

#include "genint/config.hpp"

using namespace genint;

TEST_CASE("minimal config parses with defaults filled") {
    auto cfg = parse_config_text("[run]\nseed = 42\n");
    CHECK(cfg.seed == 42);
    CHECK(cfg.cvae_latent_dim == 16);
    CHECK(cfg.cvae_hidden == 400);
    CHECK(cfg.clf_hidden == 256);
    CHECK(cfg.strategies.size() == 3);
    CHECK(cfg.strategies[0].name == "observational");
    CHECK(cfg.strategies[2].strategy.scale == doctest::Approx(3.0));
    CHECK(cfg.train_strategy == "strong");
}

TEST_CASE("empty config equals compiled defaults") {
    auto cfg = parse_config_text("");
    CHECK(cfg.seed == 7);
    CHECK(cfg.out_dir == "out");
    CHECK(cfg.probe_subset_sizes == std::vector<int>{2, 5, 10});
}

TEST_CASE("negative lambda1 is rejected citing the bound") {
    try {
        parse_config_text("[classifier]\nlambda1 = -1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("lambda1") != std::string::npos);
        CHECK(msg.find(">= 0") != std::string::npos);
    }
}

TEST_CASE("all validation errors are reported together") {
    try {
        parse_config_text("[classifier]\nlambda1 = -1\nlambda2 = -2\n[cvae]\nlatent_dim = 0\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("lambda1") != std::string::npos);
        CHECK(msg.find("lambda2") != std::string::npos);
        CHECK(msg.find("latent_dim") != std::string::npos);
        CHECK(msg.find("3 error(s)") != std::string::npos);
    }
}

TEST_CASE("unknown key names the nearest valid key") {
    try {
        parse_config_text("[cvae]\nlatentdim = 8\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("latentdim") != std::string::npos);
        CHECK(msg.find("latent_dim") != std::string::npos);
    }
}

TEST_CASE("unknown section is flagged") {
    CHECK_THROWS_AS(parse_config_text("[clasifier]\nhidden = 2\n"), ConfigError);
}

TEST_CASE("strategy grid parsing") {
    auto cfg = parse_config_text(
        "[intervention]\n"
        "strategies = obs:t=1,k=1,s=0,d=1 | wide:t=0.5,k=4,s=2.5,d=2,offset=mean_projection\n"
        "train_strategy = wide\n"
        "observational_strategy = obs\n");
    REQUIRE(cfg.strategies.size() == 2);
    CHECK(cfg.strategies[0].name == "obs");
    CHECK(cfg.strategies[1].strategy.truncation == doctest::Approx(0.5));
    CHECK(cfg.strategies[1].strategy.top_k == 4);
    CHECK(cfg.strategies[1].strategy.scale == doctest::Approx(2.5));
    CHECK(cfg.strategies[1].strategy.offset_mode == OffsetMode::mean_projection);

    // Naming a strategy outside the grid is an error.
    CHECK_THROWS_AS(parse_config_text("[intervention]\nstrategies = a:t=1,k=1,s=1,d=1\ntrain_strategy = missing\n"
                                      "observational_strategy = a\n"),
                    ConfigError);
}

TEST_CASE("idx source requires resolvable paths") {
    CHECK_THROWS_AS(parse_config_text("[data]\nsource = idx\nidx_images = /nonexistent/images\n"), ConfigError);
}

TEST_CASE("invalid numerics and booleans are reported") {
    CHECK_THROWS_AS(parse_config_text("[cvae]\nlr = fast\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[probe]\nuse_regressor = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[probe]\nsubset_sizes = 2,fifty\n"), ConfigError);
}

TEST_CASE("canonical serialization is stable and seed-sensitive") {
    auto a = parse_config_text("[run]\nseed = 1\n");
    auto b = parse_config_text("[run]\nseed = 1\n");
    auto c = parse_config_text("[run]\nseed = 2\n");
    CHECK(a.canonical() == b.canonical());
    CHECK(a.canonical() != c.canonical());
}
