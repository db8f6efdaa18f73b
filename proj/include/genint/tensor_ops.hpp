#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "genint/parallel.hpp"
#include "genint/rng.hpp"
#include "genint/tensor.hpp"

namespace genint {

// Dense kernels shared by the tape and by inference-only forward passes.
// Reductions accumulate in 64-bit with a fixed sequential order over the
// contraction index; parallelism only splits independent output elements,
// so results are bitwise identical for any worker count.

// C[n,m] = A[n,k] * B[k,m]
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0))
        throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    const int64_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
    Tensor c(Shape{n, m});
    const float* pa = a.data();
    const float* pb = b.data();
    float* pc = c.data();
    parallel_chunks(n, [&](int64_t lo, int64_t hi) {
        std::vector<double> acc(static_cast<size_t>(m));
        for (int64_t i = lo; i < hi; ++i) {
            for (auto& v : acc) v = 0.0;
            const float* arow = pa + i * k;
            for (int64_t kk = 0; kk < k; ++kk) {
                double av = arow[kk];
                const float* brow = pb + kk * m;
                for (int64_t j = 0; j < m; ++j) acc[static_cast<size_t>(j)] += av * brow[j];
            }
            float* crow = pc + i * m;
            for (int64_t j = 0; j < m; ++j) crow[j] = static_cast<float>(acc[static_cast<size_t>(j)]);
        }
    }, 1);
    return c;
}

// C[n,k] = A[n,m] * B[k,m]^T
inline Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(1))
        throw DimensionError("matmul_nt: incompatible shapes " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    const int64_t n = a.dim(0), m = a.dim(1), k = b.dim(0);
    Tensor c(Shape{n, k});
    const float* pa = a.data();
    const float* pb = b.data();
    float* pc = c.data();
    parallel_chunks(n, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            const float* arow = pa + i * m;
            float* crow = pc + i * k;
            for (int64_t kk = 0; kk < k; ++kk) {
                const float* brow = pb + kk * m;
                // Eight fixed-order partial sums keep the FMA pipeline full;
                // the reduction order is fixed, so results stay reproducible.
                double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
                int64_t j = 0;
                for (; j + 8 <= m; j += 8)
                    for (int64_t u = 0; u < 8; ++u)
                        acc[u] += static_cast<double>(arow[j + u]) * static_cast<double>(brow[j + u]);
                double tail = 0.0;
                for (; j < m; ++j) tail += static_cast<double>(arow[j]) * static_cast<double>(brow[j]);
                crow[kk] = static_cast<float>(((acc[0] + acc[1]) + (acc[2] + acc[3])) +
                                              ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail);
            }
        }
    }, 1);
    return c;
}

// C[k,m] = A[n,k]^T * B[n,m]
inline Tensor matmul_tn(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.dim(0) != b.dim(0))
        throw DimensionError("matmul_tn: incompatible shapes " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    const int64_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
    Tensor c(Shape{k, m});
    const float* pa = a.data();
    const float* pb = b.data();
    float* pc = c.data();
    parallel_chunks(k, [&](int64_t lo, int64_t hi) {
        std::vector<double> acc(static_cast<size_t>(m));
        for (int64_t kk = lo; kk < hi; ++kk) {
            for (auto& v : acc) v = 0.0;
            for (int64_t i = 0; i < n; ++i) {
                double av = pa[i * k + kk];
                const float* brow = pb + i * m;
                for (int64_t j = 0; j < m; ++j) acc[static_cast<size_t>(j)] += av * brow[j];
            }
            float* crow = pc + kk * m;
            for (int64_t j = 0; j < m; ++j) crow[j] = static_cast<float>(acc[static_cast<size_t>(j)]);
        }
    }, 1);
    return c;
}

// out[i,j] = sum_k x[i,k] W[k,j] + b[j]
inline Tensor affine_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
    if (x.ndim() != 2 || w.ndim() != 2 || x.dim(1) != w.dim(0))
        throw DimensionError("affine_forward: inner dimensions disagree: x " + shape_str(x.shape()) + ", W " +
                             shape_str(w.shape()));
    if (b.numel() != w.dim(1))
        throw DimensionError("affine_forward: bias length " + std::to_string(b.numel()) + " != output width " +
                             std::to_string(w.dim(1)));
    const int64_t n = x.dim(0), k = x.dim(1), m = w.dim(1);
    Tensor out(Shape{n, m});
    const float* px = x.data();
    const float* pw = w.data();
    const float* pb = b.data();
    float* po = out.data();
    parallel_chunks(n, [&](int64_t lo, int64_t hi) {
        std::vector<double> acc(static_cast<size_t>(m));
        for (int64_t i = lo; i < hi; ++i) {
            for (int64_t j = 0; j < m; ++j) acc[static_cast<size_t>(j)] = pb[j];
            const float* xrow = px + i * k;
            for (int64_t kk = 0; kk < k; ++kk) {
                double xv = xrow[kk];
                const float* wrow = pw + kk * m;
                for (int64_t j = 0; j < m; ++j) acc[static_cast<size_t>(j)] += xv * wrow[j];
            }
            float* orow = po + i * m;
            for (int64_t j = 0; j < m; ++j) orow[j] = static_cast<float>(acc[static_cast<size_t>(j)]);
        }
    }, 1);
    return out;
}

inline Tensor relu(const Tensor& x) {
    Tensor out = x;
    for (auto& v : out.storage()) v = v > 0.0f ? v : 0.0f;
    return out;
}

inline Tensor sigmoid(const Tensor& x) {
    Tensor out = x;
    for (auto& v : out.storage()) v = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(v))));
    return out;
}

// Row-wise softmax with log-sum-exp stabilization.
inline Tensor softmax_rows(const Tensor& x) {
    const int64_t n = x.rows(), c = x.cols();
    Tensor out(x.shape());
    for (int64_t i = 0; i < n; ++i) {
        const float* row = x.data() + i * c;
        float* orow = out.data() + i * c;
        double mx = row[0];
        for (int64_t j = 1; j < c; ++j) mx = std::max(mx, static_cast<double>(row[j]));
        double z = 0.0;
        for (int64_t j = 0; j < c; ++j) z += std::exp(static_cast<double>(row[j]) - mx);
        for (int64_t j = 0; j < c; ++j) orow[j] = static_cast<float>(std::exp(static_cast<double>(row[j]) - mx) / z);
    }
    return out;
}

inline Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.dim(0) != b.dim(0))
        throw DimensionError("concat_cols: row counts disagree: " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    const int64_t n = a.dim(0), ca = a.dim(1), cb = b.dim(1);
    Tensor out(Shape{n, ca + cb});
    for (int64_t i = 0; i < n; ++i) {
        float* orow = out.data() + i * (ca + cb);
        const float* arow = a.data() + i * ca;
        const float* brow = b.data() + i * cb;
        for (int64_t j = 0; j < ca; ++j) orow[j] = arow[j];
        for (int64_t j = 0; j < cb; ++j) orow[ca + j] = brow[j];
    }
    return out;
}

inline Tensor concat_rows(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(1))
        throw DimensionError("concat_rows: column counts disagree: " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    Tensor out(Shape{a.dim(0) + b.dim(0), a.dim(1)});
    std::copy(a.storage().begin(), a.storage().end(), out.storage().begin());
    std::copy(b.storage().begin(), b.storage().end(), out.storage().begin() + a.numel());
    return out;
}

inline Tensor one_hot(const std::vector<int>& labels, int64_t num_classes) {
    Tensor out(Shape{static_cast<int64_t>(labels.size()), num_classes});
    for (size_t i = 0; i < labels.size(); ++i) {
        int y = labels[i];
        if (y < 0 || y >= num_classes)
            throw IndexError("one_hot: label " + std::to_string(y) + " outside [0," + std::to_string(num_classes) + ")");
        out[static_cast<int64_t>(i) * num_classes + y] = 1.0f;
    }
    return out;
}

inline Tensor gather_rows(const Tensor& x, const std::vector<int64_t>& idx) {
    const int64_t c = x.cols();
    Tensor out(Shape{static_cast<int64_t>(idx.size()), c});
    for (size_t i = 0; i < idx.size(); ++i) {
        const float* src = x.data() + idx[i] * c;
        float* dst = out.data() + static_cast<int64_t>(i) * c;
        for (int64_t j = 0; j < c; ++j) dst[j] = src[j];
    }
    return out;
}

inline Tensor random_normal(Shape shape, Rng& rng, double stddev = 1.0) {
    Tensor t(std::move(shape));
    for (auto& v : t.storage()) v = static_cast<float>(rng.normal() * stddev);
    return t;
}

inline double sum64(const Tensor& t) {
    double s = 0.0;
    for (float v : t.storage()) s += v;
    return s;
}

}  // namespace genint
