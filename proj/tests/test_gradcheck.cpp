#include <doctest.h>

#include <cmath>

#include "genint/gradcheck.hpp"
#include "genint/rng.hpp"
#include "genint/tape.hpp"

using namespace genint;

TEST_CASE("quadratic loss checks to near round-off") {
    Tensor theta = Tensor::vec({0.7f, -1.3f, 2.0f});
    auto loss = [&]() {
        double s = 0.0;
        for (float v : theta.storage()) s += 0.5 * static_cast<double>(v) * static_cast<double>(v);
        return s;
    };
    std::vector<Tensor> grads = {theta};  // d(0.5 x^2)/dx = x
    std::vector<NamedParam> params = {{"theta", &theta}};
    auto report = finite_difference_check_with_grads(params, loss, grads, 1e-3, 3);
    CHECK(report.coords_checked == 3);
    CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("negative control: doubled gradient fails with error near 0.5") {
    Tensor theta = Tensor::vec({0.7f, -1.3f, 2.0f});
    auto loss = [&]() {
        double s = 0.0;
        for (float v : theta.storage()) s += 0.5 * static_cast<double>(v) * static_cast<double>(v);
        return s;
    };
    Tensor wrong = theta;
    for (auto& v : wrong.storage()) v *= 2.0f;  // deliberately scaled x2
    std::vector<NamedParam> params = {{"theta", &theta}};
    auto report = finite_difference_check_with_grads(params, loss, {wrong}, 1e-3, 3);
    CHECK(report.max_rel_err == doctest::Approx(0.5).epsilon(0.01));
    CHECK_FALSE(report.passed(1e-4));
}

TEST_CASE("non-finite loss raises") {
    Tensor theta = Tensor::vec({1.0f});
    auto loss = [&]() { return std::nan(""); };
    std::vector<NamedParam> params = {{"theta", &theta}};
    CHECK_THROWS_AS(finite_difference_check_with_grads(params, loss, {Tensor::vec({0.0f})}), NonFiniteError);
}

TEST_CASE("step must be positive") {
    Tensor theta = Tensor::vec({1.0f});
    auto loss = [&]() { return 0.0; };
    std::vector<NamedParam> params = {{"theta", &theta}};
    CHECK_THROWS_AS(finite_difference_check_with_grads(params, loss, {Tensor::vec({0.0f})}, 0.0), ValidationError);
}

TEST_CASE("kink inside the probing interval is skipped, not failed") {
    // Loss |x| with x = 5e-4: the interval [x-h, x+h] straddles the kink, so
    // the central difference (0.5) disagrees with the true one-sided
    // derivative (1). The smoothness probe must skip this coordinate instead
    // of reporting a false failure.
    Tensor theta = Tensor::vec({5e-4f, 1.0f});
    auto loss = [&]() {
        double s = 0.0;
        for (float v : theta.storage()) s += std::fabs(static_cast<double>(v));
        return s;
    };
    std::vector<Tensor> grads = {Tensor::vec({1.0f, 1.0f})};
    std::vector<NamedParam> params = {{"theta", &theta}};
    auto report = finite_difference_check_with_grads(params, loss, grads, 1e-3, 2);
    CHECK(report.coords_skipped_nonsmooth >= 1);
    CHECK(report.max_rel_err < 1e-6);
}
