#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "genint/errors.hpp"
#include "genint/tensor.hpp"

namespace genint {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. Moment buffers mirror each registered parameter;
// the step counter advances by exactly one per update.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    int add_param(std::string name, const Tensor& like) {
        slots_.push_back({std::move(name), Tensor::zeros(like.shape()), Tensor::zeros(like.shape())});
        return static_cast<int>(slots_.size()) - 1;
    }

    // Updates params in place. Order must match registration order.
    void step(std::span<Tensor* const> params, std::span<const Tensor* const> grads) {
        if (params.size() != slots_.size() || grads.size() != slots_.size())
            throw ValidationError("adam: expected " + std::to_string(slots_.size()) + " parameters, got " +
                                  std::to_string(params.size()));
        ++step_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
        for (size_t p = 0; p < slots_.size(); ++p) {
            Slot& s = slots_[p];
            Tensor& theta = *params[p];
            const Tensor& g = *grads[p];
            if (!theta.same_shape(s.m))
                throw DimensionError("adam: parameter '" + s.name + "' shape changed");
            require_same_shape(theta, g, "adam gradient");
            for (int64_t i = 0; i < g.numel(); ++i) {
                double gv = g[i];
                if (!std::isfinite(gv))
                    throw NonFiniteError("adam: non-finite gradient in parameter '" + s.name + "' at index " +
                                         std::to_string(i));
                double m = cfg_.beta1 * s.m[i] + (1.0 - cfg_.beta1) * gv;
                double v = cfg_.beta2 * s.v[i] + (1.0 - cfg_.beta2) * gv * gv;
                s.m[i] = static_cast<float>(m);
                s.v[i] = static_cast<float>(v);
                double mhat = m / bc1;
                double vhat = v / bc2;
                theta[i] = static_cast<float>(theta[i] - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
            }
        }
    }

    int64_t steps() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

private:
    struct Slot {
        std::string name;
        Tensor m, v;
    };
    AdamConfig cfg_;
    int64_t step_ = 0;
    std::vector<Slot> slots_;
};

}  // namespace genint
