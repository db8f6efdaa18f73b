#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "genint/errors.hpp"
#include "genint/rng.hpp"

namespace genint {

// Ground-truth structural causal models for oracle verification. Graph:
// C -> Z, C -> Y, Z -> X, X -> Y. F is folded into the noise of P(X|Z); the
// exogenous U_x, U_y live inside the conditional tables.
struct ScmDiscrete {
    int nc = 2, nz = 2, nx = 2, ny = 2;
    std::vector<double> p_c;           // [nc]
    std::vector<double> p_z_given_c;   // [nc][nz]
    std::vector<double> p_x_given_z;   // [nz][nx]
    std::vector<double> p_y_given_xc;  // [nx][nc][ny]

    double pz(int c, int z) const { return p_z_given_c[static_cast<size_t>(c * nz + z)]; }
    double px(int z, int x) const { return p_x_given_z[static_cast<size_t>(z * nx + x)]; }
    double py(int x, int c, int y) const { return p_y_given_xc[static_cast<size_t>((x * nc + c) * ny + y)]; }

    void validate() const {
        auto check_rows = [](const std::vector<double>& table, int rows, int cols, const std::string& name) {
            if (static_cast<int>(table.size()) != rows * cols)
                throw ValidationError("scm: table " + name + " has wrong size");
            for (int r = 0; r < rows; ++r) {
                double s = 0.0;
                for (int c = 0; c < cols; ++c) {
                    double v = table[static_cast<size_t>(r * cols + c)];
                    if (v < 0.0) throw ValidationError("scm: negative entry in " + name);
                    s += v;
                }
                if (std::fabs(s - 1.0) > 1e-9)
                    throw ValidationError("scm: row " + std::to_string(r) + " of " + name + " sums to " +
                                          std::to_string(s));
            }
        };
        check_rows(p_c, 1, nc, "P(C)");
        check_rows(p_z_given_c, nc, nz, "P(Z|C)");
        check_rows(p_x_given_z, nz, nx, "P(X|Z)");
        check_rows(p_y_given_xc, nx * nc, ny, "P(Y|X,C)");
    }

    // Cuts the C -> Z edge, replacing it with an exogenous distribution q(z).
    ScmDiscrete with_exogenous_z(const std::vector<double>& q_z) const {
        if (static_cast<int>(q_z.size()) != nz) throw ValidationError("scm: q(z) size mismatch");
        ScmDiscrete out = *this;
        for (int c = 0; c < nc; ++c)
            for (int z = 0; z < nz; ++z) out.p_z_given_c[static_cast<size_t>(c * nz + z)] = q_z[static_cast<size_t>(z)];
        return out;
    }
};

struct DiscreteDraws {
    std::vector<int> c, z, x, y;
    size_t size() const { return c.size(); }
};

namespace scm_detail {
inline int draw_categorical(const double* probs, int k, Rng& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    for (int i = 0; i < k; ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return k - 1;
}
}  // namespace scm_detail

// Ancestral sampling of (c, z, x, y) tuples.
inline DiscreteDraws sample_discrete_scm(const ScmDiscrete& scm, int64_t n, uint64_t seed) {
    scm.validate();
    DiscreteDraws out;
    out.c.resize(static_cast<size_t>(n));
    out.z.resize(static_cast<size_t>(n));
    out.x.resize(static_cast<size_t>(n));
    out.y.resize(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        Rng rng = derive_rng(seed, static_cast<uint64_t>(i));
        int c = scm_detail::draw_categorical(scm.p_c.data(), scm.nc, rng);
        int z = scm_detail::draw_categorical(scm.p_z_given_c.data() + c * scm.nz, scm.nz, rng);
        int x = scm_detail::draw_categorical(scm.p_x_given_z.data() + z * scm.nx, scm.nx, rng);
        int y = scm_detail::draw_categorical(scm.p_y_given_xc.data() + (x * scm.nc + c) * scm.ny, scm.ny, rng);
        out.c[static_cast<size_t>(i)] = c;
        out.z[static_cast<size_t>(i)] = z;
        out.x[static_cast<size_t>(i)] = x;
        out.y[static_cast<size_t>(i)] = y;
    }
    return out;
}

// Linear-Gaussian model for the instrumental-variable analysis:
//   X = a4 F + a5 Z_i + a6 Z_U + U_x,  Y = a1 C + b X + U_y.
// Z_U = C + noise keeps the confounding path X <- Z_U <- C -> Y alive. When
// `z_i_exogenous` (the intervened graph, the identification setting) Z_i is
// an independent Gaussian; otherwise Z_i = C + noise, the observational graph
// in which the covariance-ratio estimate is biased.
struct ScmLinear {
    double a1 = 1.0, a4 = 1.0, a5 = 1.0, a6 = 1.0, b = 0.5;
    double var_c = 1.0, var_f = 1.0, var_zi = 1.0, var_zu = 1.0, var_ux = 1.0, var_uy = 1.0;
    bool z_i_exogenous = true;

    void validate() const {
        for (double v : {var_c, var_f, var_zi, var_zu, var_ux, var_uy})
            if (!(v > 0.0)) throw ValidationError("linear scm: variances must be > 0");
    }
};

struct LinearDraws {
    std::vector<double> c, f, z_i, z_u, x, y;
    size_t size() const { return c.size(); }
};

inline LinearDraws sample_linear_scm(const ScmLinear& scm, int64_t n, uint64_t seed) {
    scm.validate();
    LinearDraws out;
    out.c.resize(static_cast<size_t>(n));
    out.f.resize(static_cast<size_t>(n));
    out.z_i.resize(static_cast<size_t>(n));
    out.z_u.resize(static_cast<size_t>(n));
    out.x.resize(static_cast<size_t>(n));
    out.y.resize(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        Rng rng = derive_rng(seed, static_cast<uint64_t>(i));
        double c = rng.normal() * std::sqrt(scm.var_c);
        double f = rng.normal() * std::sqrt(scm.var_f);
        double zi_noise = rng.normal() * std::sqrt(scm.var_zi);
        double zu_noise = rng.normal() * std::sqrt(scm.var_zu);
        double ux = rng.normal() * std::sqrt(scm.var_ux);
        double uy = rng.normal() * std::sqrt(scm.var_uy);
        double z_i = scm.z_i_exogenous ? zi_noise : c + zi_noise;
        double z_u = c + zu_noise;
        double x = scm.a4 * f + scm.a5 * z_i + scm.a6 * z_u + ux;
        double y = scm.a1 * c + scm.b * x + uy;
        size_t k = static_cast<size_t>(i);
        out.c[k] = c;
        out.f[k] = f;
        out.z_i[k] = z_i;
        out.z_u[k] = z_u;
        out.x[k] = x;
        out.y[k] = y;
    }
    return out;
}

// A random SCM with Dirichlet-ish rows (normalized positive draws); used by
// the property suites and the scm-verify command.
inline ScmDiscrete random_discrete_scm(Rng& rng, int max_card = 4, double min_prob = 0.0) {
    ScmDiscrete scm;
    scm.nc = 2 + static_cast<int>(rng.uniform_int(max_card - 1));
    scm.nz = 2 + static_cast<int>(rng.uniform_int(max_card - 1));
    scm.nx = 2 + static_cast<int>(rng.uniform_int(max_card - 1));
    scm.ny = 2 + static_cast<int>(rng.uniform_int(max_card - 1));
    auto fill = [&](std::vector<double>& table, int rows, int cols) {
        table.resize(static_cast<size_t>(rows) * cols);
        for (int r = 0; r < rows; ++r) {
            double s = 0.0;
            for (int c = 0; c < cols; ++c) {
                double v = min_prob + rng.uniform();
                table[static_cast<size_t>(r * cols + c)] = v;
                s += v;
            }
            for (int c = 0; c < cols; ++c) table[static_cast<size_t>(r * cols + c)] /= s;
        }
    };
    fill(scm.p_c, 1, scm.nc);
    fill(scm.p_z_given_c, scm.nc, scm.nz);
    fill(scm.p_x_given_z, scm.nz, scm.nx);
    fill(scm.p_y_given_xc, scm.nx * scm.nc, scm.ny);
    return scm;
}

}  // namespace genint
