#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "genint/tensor.hpp"
#include "genint/tensor_ops.hpp"

namespace genint {

// Reverse-mode autodiff over a per-step computation record. Nodes are
// appended in execution order (inputs always precede consumers), outputs are
// cached per node, and adjoints are zeroed before each backward pass. The
// record is rebuilt for every forward pass; nothing is reused across steps.
//
// Two forward modes share the same op definitions:
//   - fast (default): values stored as float32, reductions accumulated in
//     64-bit. This is the training path.
//   - precise: every node keeps a float64 shadow of its value and ops chain
//     through the shadows. Loss scalars read through `scalar()` are then free
//     of float32 storage rounding, which is what the finite-difference
//     checker needs to resolve gradients at 1e-4 relative error.
// Scalar-valued reductions keep a 64-bit copy (`scalar64`) in both modes.
class Tape {
public:
    struct Var {
        int id = -1;
        bool valid() const { return id >= 0; }
    };

    explicit Tape(bool precise = false) : precise_(precise) {}

    bool precise() const { return precise_; }

    Var leaf(const Tensor& t, bool needs_grad = true) {
        Node n;
        n.value = t;
        n.needs_grad = needs_grad;
        if (precise_) {
            n.shadow.assign(t.storage().begin(), t.storage().end());
        }
        return push(std::move(n));
    }

    Var constant(const Tensor& t) { return leaf(t, false); }

    const Tensor& value(Var v) const { return node(v).value; }

    double scalar(Var v) const {
        const Node& n = node(v);
        if (n.value.numel() != 1) throw ValidationError("scalar(): node is not scalar-valued");
        if (!std::isnan(n.scalar64)) return n.scalar64;
        if (!n.shadow.empty()) return n.shadow[0];
        return static_cast<double>(n.value[0]);
    }

    const Tensor& grad(Var v) const {
        const Node& n = node(v);
        if (n.grad.numel() == 0) {
            static const Tensor kEmpty;
            if (n.value.numel() == 0) return kEmpty;
            // Lazily materialize a zero gradient for untouched nodes.
            const_cast<Node&>(n).grad = Tensor::zeros(n.value.shape());
        }
        return n.grad;
    }

    // ---- primitive ops -----------------------------------------------------

    Var affine(Var x, Var w, Var b) {
        Node n;
        if (precise_) {
            const auto& xs = shadow(x);
            const auto& ws = shadow(w);
            const auto& bs = shadow(b);
            const Tensor& xv = value(x);
            const Tensor& wv = value(w);
            if (xv.ndim() != 2 || wv.ndim() != 2 || xv.dim(1) != wv.dim(0))
                throw DimensionError("affine: inner dimensions disagree");
            const int64_t rows = xv.dim(0), k = xv.dim(1), m = wv.dim(1);
            if (value(b).numel() != m) throw DimensionError("affine: bias width mismatch");
            std::vector<double> out(static_cast<size_t>(rows * m));
            for (int64_t i = 0; i < rows; ++i) {
                for (int64_t j = 0; j < m; ++j) {
                    double acc = bs[static_cast<size_t>(j)];
                    for (int64_t kk = 0; kk < k; ++kk)
                        acc += xs[static_cast<size_t>(i * k + kk)] * ws[static_cast<size_t>(kk * m + j)];
                    out[static_cast<size_t>(i * m + j)] = acc;
                }
            }
            set_from_shadow(n, Shape{rows, m}, std::move(out));
        } else {
            n.value = affine_forward(value(x), value(w), value(b));
        }
        n.inputs = {x.id, w.id, b.id};
        n.backward = [x, w, b](Tape& t, int self) {
            const Tensor& up = t.nodes_[static_cast<size_t>(self)].grad;
            if (t.wants(x)) t.accumulate(x, matmul_nt(up, t.value(w)));
            if (t.wants(w)) t.accumulate(w, matmul_tn(t.value(x), up));
            if (t.wants(b)) {
                const int64_t rows = up.dim(0), cols = up.dim(1);
                Tensor db(Shape{cols});
                for (int64_t j = 0; j < cols; ++j) {
                    double acc = 0.0;
                    for (int64_t i = 0; i < rows; ++i) acc += up[i * cols + j];
                    db[j] = static_cast<float>(acc);
                }
                t.accumulate(b, db);
            }
        };
        return push(std::move(n));
    }

    Var relu(Var x) {
        Node n = unary_forward(x, [](double v) { return v > 0.0 ? v : 0.0; });
        n.backward = [x](Tape& t, int self) {
            if (!t.wants(x)) return;
            const Tensor& up = t.nodes_[static_cast<size_t>(self)].grad;
            const Tensor& xin = t.value(x);
            Tensor dx(xin.shape());
            for (int64_t i = 0; i < xin.numel(); ++i) dx[i] = xin[i] > 0.0f ? up[i] : 0.0f;
            t.accumulate(x, dx);
        };
        return push(std::move(n));
    }

    Var tanh_act(Var x) {
        Node n = unary_forward(x, [](double v) { return std::tanh(v); });
        n.backward = [x](Tape& t, int self) {
            if (!t.wants(x)) return;
            const Tensor& up = t.nodes_[static_cast<size_t>(self)].grad;
            const Tensor& y = t.nodes_[static_cast<size_t>(self)].value;
            Tensor dx(y.shape());
            for (int64_t i = 0; i < y.numel(); ++i) dx[i] = up[i] * (1.0f - y[i] * y[i]);
            t.accumulate(x, dx);
        };
        return push(std::move(n));
    }

    Var sigmoid(Var x) {
        Node n = unary_forward(x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
        n.backward = [x](Tape& t, int self) {
            if (!t.wants(x)) return;
            const Tensor& up = t.nodes_[static_cast<size_t>(self)].grad;
            const Tensor& y = t.nodes_[static_cast<size_t>(self)].value;
            Tensor dx(y.shape());
            for (int64_t i = 0; i < y.numel(); ++i) dx[i] = up[i] * y[i] * (1.0f - y[i]);
            t.accumulate(x, dx);
        };
        return push(std::move(n));
    }

    Var softmax(Var x) {
        const Tensor& xv = value(x);
        Node n;
        if (precise_) {
            const int64_t rows = xv.rows(), cols = xv.cols();
            std::vector<double> out(static_cast<size_t>(xv.numel()));
            for (int64_t i = 0; i < rows; ++i) {
                double mx = in(x, i * cols);
                for (int64_t j = 1; j < cols; ++j) mx = std::max(mx, in(x, i * cols + j));
                double z = 0.0;
                for (int64_t j = 0; j < cols; ++j) z += std::exp(in(x, i * cols + j) - mx);
                for (int64_t j = 0; j < cols; ++j)
                    out[static_cast<size_t>(i * cols + j)] = std::exp(in(x, i * cols + j) - mx) / z;
            }
            set_from_shadow(n, xv.shape(), std::move(out));
        } else {
            n.value = softmax_rows(xv);
        }
        n.inputs = {x.id};
        n.backward = [x](Tape& t, int self) {
            if (!t.wants(x)) return;
            const Tensor& up = t.nodes_[static_cast<size_t>(self)].grad;
            const Tensor& p = t.nodes_[static_cast<size_t>(self)].value;
            const int64_t rows = p.rows(), cols = p.cols();
            Tensor dx(p.shape());
            for (int64_t i = 0; i < rows; ++i) {
                double dot = 0.0;
                for (int64_t j = 0; j < cols; ++j)
                    dot += static_cast<double>(up[i * cols + j]) * static_cast<double>(p[i * cols + j]);
                for (int64_t j = 0; j < cols; ++j)
                    dx[i * cols + j] =
                        static_cast<float>(p[i * cols + j] * (static_cast<double>(up[i * cols + j]) - dot));
            }
            t.accumulate(x, dx);
        };
        return push(std::move(n));
    }

    Var add(Var a, Var b) {
        require_same_shape(value(a), value(b), "add");
        Node n = binary_forward(a, b, [](double x, double y) { return x + y; });
        n.backward = [a, b](Tape& t, int self) {
            const Tensor& up = t.nodes_[static_cast<size_t>(self)].grad;
            if (t.wants(a)) t.accumulate(a, up);
            if (t.wants(b)) t.accumulate(b, up);
        };
        return push(std::move(n));
    }

    Var sub(Var a, Var b) {
        require_same_shape(value(a), value(b), "sub");
        Node n = binary_forward(a, b, [](double x, double y) { return x - y; });
        n.backward = [a, b](Tape& t, int self) {
            const Tensor& up = t.nodes_[static_cast<size_t>(self)].grad;
            if (t.wants(a)) t.accumulate(a, up);
            if (t.wants(b)) {
                Tensor neg = up;
                for (auto& v : neg.storage()) v = -v;
                t.accumulate(b, neg);
            }
        };
        return push(std::move(n));
    }

    Var mul(Var a, Var b) {
        require_same_shape(value(a), value(b), "mul");
        Node n = binary_forward(a, b, [](double x, double y) { return x * y; });
        n.backward = [a, b](Tape& t, int self) {
            const Tensor& up = t.nodes_[static_cast<size_t>(self)].grad;
            if (t.wants(a)) {
                Tensor da(up.shape());
                for (int64_t i = 0; i < up.numel(); ++i) da[i] = up[i] * t.value(b)[i];
                t.accumulate(a, da);
            }
            if (t.wants(b)) {
                Tensor db(up.shape());
                for (int64_t i = 0; i < up.numel(); ++i) db[i] = up[i] * t.value(a)[i];
                t.accumulate(b, db);
            }
        };
        return push(std::move(n));
    }

    Var scale(Var x, double c) {
        Node n = unary_forward(x, [c](double v) { return v * c; });
        n.backward = [x, c](Tape& t, int self) {
            if (!t.wants(x)) return;
            Tensor dx = t.nodes_[static_cast<size_t>(self)].grad;
            for (auto& v : dx.storage()) v = static_cast<float>(v * c);
            t.accumulate(x, dx);
        };
        return push(std::move(n));
    }

    Var add_const(Var x, double c) {
        Node n = unary_forward(x, [c](double v) { return v + c; });
        n.backward = [x](Tape& t, int self) {
            if (t.wants(x)) t.accumulate(x, t.nodes_[static_cast<size_t>(self)].grad);
        };
        return push(std::move(n));
    }

    Var square(Var x) {
        Node n = unary_forward(x, [](double v) { return v * v; });
        n.backward = [x](Tape& t, int self) {
            if (!t.wants(x)) return;
            const Tensor& up = t.nodes_[static_cast<size_t>(self)].grad;
            const Tensor& xin = t.value(x);
            Tensor dx(xin.shape());
            for (int64_t i = 0; i < xin.numel(); ++i) dx[i] = 2.0f * xin[i] * up[i];
            t.accumulate(x, dx);
        };
        return push(std::move(n));
    }

    Var exp_elem(Var x) {
        Node n = unary_forward(x, [](double v) { return std::exp(v); });
        n.backward = [x](Tape& t, int self) {
            if (!t.wants(x)) return;
            const Tensor& up = t.nodes_[static_cast<size_t>(self)].grad;
            const Tensor& y = t.nodes_[static_cast<size_t>(self)].value;
            Tensor dx(y.shape());
            for (int64_t i = 0; i < y.numel(); ++i) dx[i] = up[i] * y[i];
            t.accumulate(x, dx);
        };
        return push(std::move(n));
    }

    Var concat_cols(Var a, Var b) {
        const Tensor& av = value(a);
        const Tensor& bv = value(b);
        if (av.ndim() != 2 || bv.ndim() != 2 || av.dim(0) != bv.dim(0))
            throw DimensionError("concat_cols: row counts disagree");
        const int64_t rows = av.dim(0), ca = av.dim(1), cb = bv.dim(1);
        Node n;
        if (precise_) {
            std::vector<double> out(static_cast<size_t>(rows * (ca + cb)));
            for (int64_t i = 0; i < rows; ++i) {
                for (int64_t j = 0; j < ca; ++j) out[static_cast<size_t>(i * (ca + cb) + j)] = in(a, i * ca + j);
                for (int64_t j = 0; j < cb; ++j)
                    out[static_cast<size_t>(i * (ca + cb) + ca + j)] = in(b, i * cb + j);
            }
            set_from_shadow(n, Shape{rows, ca + cb}, std::move(out));
        } else {
            n.value = genint::concat_cols(av, bv);
        }
        n.inputs = {a.id, b.id};
        n.backward = [a, b](Tape& t, int self) {
            const Tensor& up = t.nodes_[static_cast<size_t>(self)].grad;
            const int64_t rows = up.dim(0);
            const int64_t ca = t.value(a).dim(1), cb = t.value(b).dim(1);
            if (t.wants(a)) {
                Tensor da(Shape{rows, ca});
                for (int64_t i = 0; i < rows; ++i)
                    for (int64_t j = 0; j < ca; ++j) da[i * ca + j] = up[i * (ca + cb) + j];
                t.accumulate(a, da);
            }
            if (t.wants(b)) {
                Tensor db(Shape{rows, cb});
                for (int64_t i = 0; i < rows; ++i)
                    for (int64_t j = 0; j < cb; ++j) db[i * cb + j] = up[i * (ca + cb) + ca + j];
                t.accumulate(b, db);
            }
        };
        return push(std::move(n));
    }

    Var sum_all(Var x) {
        double s = 0.0;
        for (int64_t i = 0; i < value(x).numel(); ++i) s += in(x, i);
        Node n = scalar_node(s);
        n.inputs = {x.id};
        n.backward = [x](Tape& t, int self) {
            if (!t.wants(x)) return;
            float up = t.nodes_[static_cast<size_t>(self)].grad[0];
            t.accumulate(x, Tensor::full(t.value(x).shape(), up));
        };
        return push(std::move(n));
    }

    Var mean_all(Var x) {
        const int64_t count = value(x).numel();
        if (count == 0) throw ValidationError("mean_all: empty tensor");
        double s = 0.0;
        for (int64_t i = 0; i < count; ++i) s += in(x, i);
        Node n = scalar_node(s / static_cast<double>(count));
        n.inputs = {x.id};
        n.backward = [x, count](Tape& t, int self) {
            if (!t.wants(x)) return;
            float up = t.nodes_[static_cast<size_t>(self)].grad[0] / static_cast<float>(count);
            t.accumulate(x, Tensor::full(t.value(x).shape(), up));
        };
        return push(std::move(n));
    }

    // total = sum_i weights[i] * scalars[i]; every input must be scalar.
    Var weighted_sum(std::span<const Var> scalars, std::span<const double> weights) {
        if (scalars.size() != weights.size() || scalars.empty())
            throw ValidationError("weighted_sum: needs matching, non-empty spans");
        double s = 0.0;
        for (size_t i = 0; i < scalars.size(); ++i) {
            if (value(scalars[i]).numel() != 1) throw ValidationError("weighted_sum: non-scalar term");
            s += weights[i] * scalar(scalars[i]);
        }
        Node n = scalar_node(s);
        n.inputs.reserve(scalars.size());
        for (Var v : scalars) n.inputs.push_back(v.id);
        std::vector<Var> vars(scalars.begin(), scalars.end());
        std::vector<double> ws(weights.begin(), weights.end());
        n.backward = [vars, ws](Tape& t, int self) {
            float up = t.nodes_[static_cast<size_t>(self)].grad[0];
            for (size_t i = 0; i < vars.size(); ++i) {
                if (!t.wants(vars[i])) continue;
                t.accumulate(vars[i], Tensor::scalar(static_cast<float>(up * ws[i])));
            }
        };
        return push(std::move(n));
    }

    // Mean over rows of (logsumexp(row) - row[target]), stabilized.
    Var softmax_cross_entropy(Var logits, const std::vector<int>& targets) {
        const Tensor& l = value(logits);
        if (l.ndim() != 2 || static_cast<int64_t>(targets.size()) != l.dim(0))
            throw DimensionError("softmax_cross_entropy: logits " + shape_str(l.shape()) + " vs " +
                                 std::to_string(targets.size()) + " targets");
        const int64_t rows = l.dim(0), cols = l.dim(1);
        for (int y : targets)
            if (y < 0 || y >= cols)
                throw IndexError("softmax_cross_entropy: target " + std::to_string(y) + " outside [0," +
                                 std::to_string(cols) + ")");
        Tensor probs(Shape{rows, cols});
        double total = 0.0;
        for (int64_t i = 0; i < rows; ++i) {
            double mx = in(logits, i * cols);
            for (int64_t j = 1; j < cols; ++j) mx = std::max(mx, in(logits, i * cols + j));
            double z = 0.0;
            for (int64_t j = 0; j < cols; ++j) z += std::exp(in(logits, i * cols + j) - mx);
            for (int64_t j = 0; j < cols; ++j)
                probs[i * cols + j] = static_cast<float>(std::exp(in(logits, i * cols + j) - mx) / z);
            total += mx + std::log(z) - in(logits, i * cols + targets[static_cast<size_t>(i)]);
        }
        total /= static_cast<double>(rows);
        Node n = scalar_node(total);
        n.inputs = {logits.id};
        n.backward = [logits, targets, probs = std::move(probs)](Tape& t, int self) {
            if (!t.wants(logits)) return;
            float up = t.nodes_[static_cast<size_t>(self)].grad[0];
            const int64_t rows = probs.dim(0), cols = probs.dim(1);
            Tensor dl(probs.shape());
            const float inv_n = 1.0f / static_cast<float>(rows);
            for (int64_t i = 0; i < rows; ++i) {
                for (int64_t j = 0; j < cols; ++j) {
                    float g = probs[i * cols + j];
                    if (j == targets[static_cast<size_t>(i)]) g -= 1.0f;
                    dl[i * cols + j] = up * inv_n * g;
                }
            }
            t.accumulate(logits, dl);
        };
        return push(std::move(n));
    }

    // Sum over all elements of the Bernoulli cross-entropy between
    // sigmoid(logits) and targets in [0,1]. Stable for large |logits|.
    Var bce_with_logits_sum(Var logits, const Tensor& target) {
        require_same_shape(value(logits), target, "bce_with_logits_sum");
        const int64_t count = value(logits).numel();
        double total = 0.0;
        if (precise_) {
            for (int64_t i = 0; i < count; ++i) {
                double lv = in(logits, i), tv = target[i];
                total += std::max(lv, 0.0) - lv * tv + std::log1p(std::exp(-std::fabs(lv)));
            }
        } else {
            const Tensor& l = value(logits);
            for (int64_t i = 0; i < count; ++i) {
                double lv = l[i], tv = target[i];
                total += std::max(lv, 0.0) - lv * tv + std::log1p(std::exp(-std::fabs(lv)));
            }
        }
        Node n = scalar_node(total);
        n.inputs = {logits.id};
        n.backward = [logits, target](Tape& t, int self) {
            if (!t.wants(logits)) return;
            float up = t.nodes_[static_cast<size_t>(self)].grad[0];
            const Tensor& l = t.value(logits);
            Tensor dl(l.shape());
            for (int64_t i = 0; i < l.numel(); ++i) {
                double s = 1.0 / (1.0 + std::exp(-static_cast<double>(l[i])));
                dl[i] = static_cast<float>(up * (s - static_cast<double>(target[i])));
            }
            t.accumulate(logits, dl);
        };
        return push(std::move(n));
    }

    // 0.5 * sum(exp(logvar) + mean^2 - 1 - logvar): KL(q || N(0, I)).
    Var gaussian_kl_sum(Var mean, Var logvar) {
        require_same_shape(value(mean), value(logvar), "gaussian_kl_sum");
        const int64_t count = value(mean).numel();
        double total = 0.0;
        for (int64_t i = 0; i < count; ++i) {
            double mv = in(mean, i), vv = in(logvar, i);
            total += 0.5 * (std::exp(vv) + mv * mv - 1.0 - vv);
        }
        Node n = scalar_node(total);
        n.inputs = {mean.id, logvar.id};
        n.backward = [mean, logvar](Tape& t, int self) {
            float up = t.nodes_[static_cast<size_t>(self)].grad[0];
            if (t.wants(mean)) {
                const Tensor& m = t.value(mean);
                Tensor dm(m.shape());
                for (int64_t i = 0; i < m.numel(); ++i) dm[i] = up * m[i];
                t.accumulate(mean, dm);
            }
            if (t.wants(logvar)) {
                const Tensor& lv = t.value(logvar);
                Tensor dv(lv.shape());
                for (int64_t i = 0; i < lv.numel(); ++i)
                    dv[i] = static_cast<float>(up * 0.5 * (std::exp(static_cast<double>(lv[i])) - 1.0));
                t.accumulate(logvar, dv);
            }
        };
        return push(std::move(n));
    }

    // h = mean + exp(logvar / 2) * noise, with noise held constant.
    Var reparameterize(Var mean, Var logvar, const Tensor& noise) {
        require_same_shape(value(mean), value(logvar), "reparameterize");
        require_same_shape(value(mean), noise, "reparameterize");
        const int64_t count = value(mean).numel();
        Node n;
        if (precise_) {
            std::vector<double> out(static_cast<size_t>(count));
            for (int64_t i = 0; i < count; ++i)
                out[static_cast<size_t>(i)] = in(mean, i) + std::exp(0.5 * in(logvar, i)) * noise[i];
            set_from_shadow(n, value(mean).shape(), std::move(out));
        } else {
            const Tensor& mv = value(mean);
            const Tensor& lv = value(logvar);
            n.value = Tensor(mv.shape());
            for (int64_t i = 0; i < count; ++i)
                n.value[i] = static_cast<float>(mv[i] + std::exp(0.5 * static_cast<double>(lv[i])) * noise[i]);
        }
        n.inputs = {mean.id, logvar.id};
        n.backward = [mean, logvar, noise](Tape& t, int self) {
            const Tensor& up = t.nodes_[static_cast<size_t>(self)].grad;
            if (t.wants(mean)) t.accumulate(mean, up);
            if (t.wants(logvar)) {
                const Tensor& lv = t.value(logvar);
                Tensor dv(lv.shape());
                for (int64_t i = 0; i < lv.numel(); ++i)
                    dv[i] = static_cast<float>(up[i] * 0.5 * std::exp(0.5 * static_cast<double>(lv[i])) * noise[i]);
                t.accumulate(logvar, dv);
            }
        };
        return push(std::move(n));
    }

    // Mean absolute error against a constant target.
    Var l1_loss(Var pred, const Tensor& target) {
        require_same_shape(value(pred), target, "l1_loss");
        const int64_t count = value(pred).numel();
        if (count == 0) throw ValidationError("l1_loss: empty input");
        double total = 0.0;
        for (int64_t i = 0; i < count; ++i) total += std::fabs(in(pred, i) - target[i]);
        Node n = scalar_node(total / static_cast<double>(count));
        n.inputs = {pred.id};
        n.backward = [pred, target, count](Tape& t, int self) {
            if (!t.wants(pred)) return;
            float up = t.nodes_[static_cast<size_t>(self)].grad[0] / static_cast<float>(count);
            const Tensor& p = t.value(pred);
            Tensor dp(p.shape());
            for (int64_t i = 0; i < count; ++i) {
                float d = p[i] - target[i];
                dp[i] = d > 0.0f ? up : (d < 0.0f ? -up : 0.0f);
            }
            t.accumulate(pred, dp);
        };
        return push(std::move(n));
    }

    // ---- backward pass -----------------------------------------------------

    void backward(Var loss) {
        Node& ln = node_mut(loss);
        if (ln.value.numel() != 1) throw ValidationError("backward: loss must be a scalar node");
        for (auto& n : nodes_) n.grad = Tensor();
        ln.grad = Tensor::full(ln.value.shape(), 1.0f);
        for (int i = loss.id; i >= 0; --i) {
            Node& n = nodes_[static_cast<size_t>(i)];
            if (n.grad.numel() == 0 || !n.backward) continue;
            n.backward(*this, i);
        }
    }

    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::vector<double> shadow;
        double scalar64 = std::nan("");
        std::vector<int> inputs;
        std::function<void(Tape&, int)> backward;
        bool needs_grad = true;
    };

    // Reads element i of a node's value at the tape's working precision.
    double in(Var v, int64_t i) const {
        const Node& n = node(v);
        if (!n.shadow.empty()) return n.shadow[static_cast<size_t>(i)];
        return static_cast<double>(n.value[i]);
    }

    const std::vector<double>& shadow(Var v) const {
        const Node& n = node(v);
        if (n.shadow.empty()) throw ValidationError("tape: missing shadow values in precise mode");
        return n.shadow;
    }

    void set_from_shadow(Node& n, Shape shape, std::vector<double>&& out) {
        n.value = Tensor(std::move(shape));
        for (int64_t i = 0; i < n.value.numel(); ++i) n.value[i] = static_cast<float>(out[static_cast<size_t>(i)]);
        if (precise_) n.shadow = std::move(out);
    }

    template <typename Fn>
    Node unary_forward(Var x, Fn&& fn) {
        Node n;
        const Tensor& xv = value(x);
        const int64_t count = xv.numel();
        if (precise_) {
            std::vector<double> out(static_cast<size_t>(count));
            for (int64_t i = 0; i < count; ++i) out[static_cast<size_t>(i)] = fn(in(x, i));
            set_from_shadow(n, xv.shape(), std::move(out));
        } else {
            n.value = Tensor(xv.shape());
            for (int64_t i = 0; i < count; ++i)
                n.value[i] = static_cast<float>(fn(static_cast<double>(xv[i])));
        }
        n.inputs = {x.id};
        return n;
    }

    template <typename Fn>
    Node binary_forward(Var a, Var b, Fn&& fn) {
        Node n;
        const Tensor& av = value(a);
        const Tensor& bv = value(b);
        const int64_t count = av.numel();
        if (precise_) {
            std::vector<double> out(static_cast<size_t>(count));
            for (int64_t i = 0; i < count; ++i) out[static_cast<size_t>(i)] = fn(in(a, i), in(b, i));
            set_from_shadow(n, av.shape(), std::move(out));
        } else {
            n.value = Tensor(av.shape());
            for (int64_t i = 0; i < count; ++i)
                n.value[i] = static_cast<float>(fn(static_cast<double>(av[i]), static_cast<double>(bv[i])));
        }
        n.inputs = {a.id, b.id};
        return n;
    }

    Node scalar_node(double s) {
        Node n;
        n.value = Tensor::scalar(static_cast<float>(s));
        n.scalar64 = s;
        if (precise_) n.shadow = {s};
        return n;
    }

    Var push(Node&& n) {
        // Propagate needs_grad from inputs so dead subtrees skip adjoint work.
        if (!n.inputs.empty()) {
            bool any = false;
            for (int id : n.inputs) any = any || nodes_[static_cast<size_t>(id)].needs_grad;
            n.needs_grad = any;
        }
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    const Node& node(Var v) const {
        if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) throw IndexError("tape: invalid node handle");
        return nodes_[static_cast<size_t>(v.id)];
    }
    Node& node_mut(Var v) { return const_cast<Node&>(node(v)); }

    bool wants(Var v) const { return nodes_[static_cast<size_t>(v.id)].needs_grad; }

    void accumulate(Var v, const Tensor& delta) {
        Node& n = node_mut(v);
        if (n.grad.numel() == 0) {
            n.grad = delta;
        } else {
            for (int64_t i = 0; i < delta.numel(); ++i) n.grad[i] += delta[i];
        }
    }

    bool precise_ = false;
    std::vector<Node> nodes_;
};

using Var = Tape::Var;

}  // namespace genint
