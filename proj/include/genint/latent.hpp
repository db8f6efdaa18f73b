#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "genint/cvae.hpp"
#include "genint/dataset.hpp"
#include "genint/rng.hpp"
#include "genint/tensor.hpp"

namespace genint {

// Orthonormal principal directions of the aggregate posterior, ordered by
// explained variance. Row j of `directions` is r_j; sigmas[j] is the standard
// deviation of the data along it.
struct LatentBasis {
    Tensor directions;  // [d, d]
    Tensor sigmas;      // [d], descending
    Tensor data_mean;   // [d]

    int64_t dim() const { return data_mean.numel(); }

    void validate() const {
        const int64_t d = dim();
        if (directions.shape() != Shape{d, d} || sigmas.numel() != d)
            throw DimensionError("latent basis: inconsistent shapes");
        for (int64_t i = 0; i < d; ++i) {
            for (int64_t j = 0; j < d; ++j) {
                double dot = 0.0;
                for (int64_t k = 0; k < d; ++k)
                    dot += static_cast<double>(directions[i * d + k]) * static_cast<double>(directions[j * d + k]);
                double want = i == j ? 1.0 : 0.0;
                if (std::fabs(dot - want) > 1e-5)
                    throw ValidationError("latent basis: rows " + std::to_string(i) + "," + std::to_string(j) +
                                          " not orthonormal (dot " + std::to_string(dot) + ")");
            }
        }
        for (int64_t j = 0; j + 1 < d; ++j)
            if (sigmas[j] < sigmas[j + 1] - 1e-6f)
                throw ValidationError("latent basis: sigmas not sorted descending");
    }
};

namespace pca_detail {

// Cyclic Jacobi eigendecomposition of a symmetric matrix (double precision).
// Returns eigenvalues and eigenvectors (columns of V).
inline void jacobi_eigen(std::vector<double>& a, int n, std::vector<double>& eigvals, std::vector<double>& v) {
    v.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i * n + i)] = 1.0;
    auto at = [&](int r, int c) -> double& { return a[static_cast<size_t>(r * n + c)]; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
        if (off < 1e-24) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::fabs(at(p, q)) < 1e-300) continue;
                double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = v[static_cast<size_t>(k * n + p)], vkq = v[static_cast<size_t>(k * n + q)];
                    v[static_cast<size_t>(k * n + p)] = c * vkp - s * vkq;
                    v[static_cast<size_t>(k * n + q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    eigvals.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) eigvals[static_cast<size_t>(i)] = at(i, i);
}

}  // namespace pca_detail

// PCA over raw latent rows [n, d]. Rank deficiency is allowed (sigma_j = 0);
// fewer than two rows is an error.
inline LatentBasis fit_latent_basis_from_latents(const Tensor& latents) {
    if (latents.ndim() != 2) throw DimensionError("fit_latent_basis: latents must be [n, d]");
    const int64_t n = latents.dim(0), d = latents.dim(1);
    if (n < 2) throw InsufficientDataError("fit_latent_basis: need at least 2 rows, got " + std::to_string(n));

    std::vector<double> mean(static_cast<size_t>(d), 0.0);
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < d; ++j) mean[static_cast<size_t>(j)] += latents[i * d + j];
    for (auto& m : mean) m /= static_cast<double>(n);

    std::vector<double> cov(static_cast<size_t>(d) * d, 0.0);
    for (int64_t i = 0; i < n; ++i) {
        for (int64_t a = 0; a < d; ++a) {
            double da = latents[i * d + a] - mean[static_cast<size_t>(a)];
            for (int64_t b = a; b < d; ++b) {
                double db = latents[i * d + b] - mean[static_cast<size_t>(b)];
                cov[static_cast<size_t>(a * d + b)] += da * db;
            }
        }
    }
    for (int64_t a = 0; a < d; ++a)
        for (int64_t b = a; b < d; ++b) {
            cov[static_cast<size_t>(a * d + b)] /= static_cast<double>(n - 1);
            cov[static_cast<size_t>(b * d + a)] = cov[static_cast<size_t>(a * d + b)];
        }

    std::vector<double> eigvals, v;
    pca_detail::jacobi_eigen(cov, static_cast<int>(d), eigvals, v);

    std::vector<int> order(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) order[static_cast<size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return eigvals[static_cast<size_t>(a)] > eigvals[static_cast<size_t>(b)]; });

    LatentBasis basis;
    basis.directions = Tensor(Shape{d, d});
    basis.sigmas = Tensor(Shape{d});
    basis.data_mean = Tensor(Shape{d});
    for (int64_t j = 0; j < d; ++j) basis.data_mean[j] = static_cast<float>(mean[static_cast<size_t>(j)]);
    for (int64_t r = 0; r < d; ++r) {
        int col = order[static_cast<size_t>(r)];
        double lambda = std::max(0.0, eigvals[static_cast<size_t>(col)]);
        basis.sigmas[r] = static_cast<float>(std::sqrt(lambda));
        // Sign convention: make the largest-magnitude component positive so
        // the basis is deterministic.
        double largest = 0.0;
        for (int64_t k = 0; k < d; ++k) {
            double e = v[static_cast<size_t>(k * d + col)];
            if (std::fabs(e) > std::fabs(largest)) largest = e;
        }
        double flip = largest < 0.0 ? -1.0 : 1.0;
        for (int64_t k = 0; k < d; ++k)
            basis.directions[r * d + k] = static_cast<float>(flip * v[static_cast<size_t>(k * d + col)]);
    }
    return basis;
}

// Encodes the dataset in batches and fits PCA over the posterior means (the
// aggregate posterior).
inline LatentBasis fit_latent_basis(const Cvae& cvae, const LabeledImageSet& dataset, int64_t batch = 256) {
    if (dataset.size() == 0) throw InsufficientDataError("fit_latent_basis: empty dataset");
    Tensor flat = dataset.flat_images();
    const int64_t n = dataset.size();
    Tensor latents(Shape{n, cvae.cfg.latent_dim});
    for (int64_t lo = 0; lo < n; lo += batch) {
        int64_t hi = std::min(n, lo + batch);
        std::vector<int64_t> idx;
        for (int64_t i = lo; i < hi; ++i) idx.push_back(i);
        Tensor xb = gather_rows(flat, idx);
        std::vector<int> yb;
        for (int64_t i = lo; i < hi; ++i) yb.push_back(dataset.labels[static_cast<size_t>(i)]);
        auto [mean, logvar] = cvae_encode(cvae, xb, yb);
        for (int64_t i = lo; i < hi; ++i)
            for (int64_t j = 0; j < cvae.cfg.latent_dim; ++j) latents[i * cvae.cfg.latent_dim + j] = mean[(i - lo) * cvae.cfg.latent_dim + j];
    }
    return fit_latent_basis_from_latents(latents);
}

// PCA over truncated-prior draws instead of the aggregate posterior. With a
// standard-normal prior this is nearly isotropic; provided as the documented
// alternative basis source.
inline LatentBasis fit_latent_basis_from_prior(const Cvae& cvae, int64_t n, double truncation, uint64_t seed) {
    if (n < 2) throw InsufficientDataError("fit_latent_basis_from_prior: need at least 2 draws");
    Tensor latents = sample_truncated_gaussian(cvae.cfg.latent_dim, truncation, n, seed);
    return fit_latent_basis_from_latents(latents);
}

enum class OffsetMode { none, mean_projection };

inline std::string to_string(OffsetMode m) { return m == OffsetMode::none ? "none" : "mean_projection"; }

// h* = h + sigma_j s' r_j (offset none), or with the component of h along r_j
// replaced: h* = h + (sigma_j s' - (h - mean) . r_j) r_j.
// Directions are 1-based: 1 <= j <= latent_dim.
inline Tensor apply_intervention(const Tensor& h, const LatentBasis& basis, int j, double s_prime,
                                 OffsetMode offset_mode = OffsetMode::none) {
    const int64_t d = basis.dim();
    if (h.numel() != d) throw DimensionError("apply_intervention: latent length mismatch");
    if (j < 1 || j > d) throw IndexError("apply_intervention: direction " + std::to_string(j) + " outside [1," +
                                         std::to_string(d) + "]");
    if (!std::isfinite(s_prime)) throw ValidationError("apply_intervention: s' must be finite");
    const int64_t r = j - 1;
    double step = static_cast<double>(basis.sigmas[r]) * s_prime;
    if (offset_mode == OffsetMode::mean_projection) {
        double proj = 0.0;
        for (int64_t k = 0; k < d; ++k)
            proj += (static_cast<double>(h[k]) - basis.data_mean[k]) * basis.directions[r * d + k];
        step -= proj;
    }
    Tensor out = h;
    for (int64_t k = 0; k < d; ++k)
        out[k] = static_cast<float>(h[k] + step * basis.directions[r * d + k]);
    return out;
}

// A strategy fixes the truncation of the source noise, how many leading
// principal directions are eligible, the scale range in sigma units, and how
// many eligible directions each sample perturbs.
struct InterventionStrategy {
    double truncation = 1.0;       // t
    int top_k = 2;                 // k
    double scale = 3.0;            // s, in units of sigma_j
    int directions_per_sample = 2;
    OffsetMode offset_mode = OffsetMode::none;

    void validate(int64_t latent_dim) const {
        if (!(truncation > 0.0)) throw ValidationError("strategy: truncation must be > 0");
        if (top_k < 1 || top_k > latent_dim)
            throw ValidationError("strategy: top_k must lie in [1," + std::to_string(latent_dim) + "]");
        if (!(scale >= 0.0)) throw ValidationError("strategy: scale must be >= 0");
        if (directions_per_sample < 1 || directions_per_sample > top_k)
            throw ValidationError("strategy: directions_per_sample must lie in [1, top_k]");
    }
};

struct StrategyDraw {
    std::vector<int> directions;   // 1-based indices into the basis
    std::vector<double> s_prime;   // one per drawn direction, in [-s, s]
};

// Directions drawn uniformly without replacement from the top-k; each step
// size uniform on [-s, s]. The draw never sees the class label, so its
// distribution is identical across categories.
inline StrategyDraw sample_strategy_draw(const InterventionStrategy& strategy, const LatentBasis& basis, Rng& rng) {
    strategy.validate(basis.dim());
    StrategyDraw draw;
    std::vector<int> pool(static_cast<size_t>(strategy.top_k));
    for (int i = 0; i < strategy.top_k; ++i) pool[static_cast<size_t>(i)] = i + 1;
    for (int pick = 0; pick < strategy.directions_per_sample; ++pick) {
        int64_t at = rng.uniform_int(static_cast<int64_t>(pool.size()));
        draw.directions.push_back(pool[static_cast<size_t>(at)]);
        pool.erase(pool.begin() + at);
        draw.s_prime.push_back(rng.uniform(-strategy.scale, strategy.scale));
    }
    return draw;
}

// ---- basis I/O --------------------------------------------------------------

inline void save_latent_basis(const fs::path& dir, const LatentBasis& basis, Json extra_meta = Json::object()) {
    fs::create_directories(dir);
    write_tensor_file((dir / "directions.gint").string(), basis.directions);
    write_tensor_file((dir / "sigmas.gint").string(), basis.sigmas);
    write_tensor_file((dir / "mean.gint").string(), basis.data_mean);
    Json meta = std::move(extra_meta);
    meta["dim"] = basis.dim();
    write_text_file(dir / "meta.json", meta.dump(2) + "\n");
}

inline LatentBasis load_latent_basis(const fs::path& dir) {
    LatentBasis basis;
    basis.directions = read_tensor_file((dir / "directions.gint").string());
    basis.sigmas = read_tensor_file((dir / "sigmas.gint").string());
    basis.data_mean = read_tensor_file((dir / "mean.gint").string());
    basis.validate();
    return basis;
}

}  // namespace genint
