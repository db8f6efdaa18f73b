#pragma once

#include <string>
#include <vector>

#include "genint/errors.hpp"
#include "genint/scm.hpp"

namespace genint {

// Exact observational tables of a discrete SCM, by full enumeration of
// P(c, z, x, y) = P(c) P(z|c) P(x|z) P(y|x,c).
struct ObservationalTables {
    int nx = 0, ny = 0, nz = 0;
    std::vector<double> p_xy;          // [nx][ny]
    std::vector<double> p_x;           // [nx]
    std::vector<double> p_z;           // [nz]
    std::vector<double> p_yx_given_z;  // [nz][nx][ny]
    std::vector<double> p_x_given_z;   // [nz][nx]

    double pxy(int x, int y) const { return p_xy[static_cast<size_t>(x * ny + y)]; }
    double px(int x) const { return p_x[static_cast<size_t>(x)]; }
    double pz(int z) const { return p_z[static_cast<size_t>(z)]; }
    double pyx_z(int z, int x, int y) const { return p_yx_given_z[static_cast<size_t>((z * nx + x) * ny + y)]; }
    double px_z(int z, int x) const { return p_x_given_z[static_cast<size_t>(z * nx + x)]; }
};

inline ObservationalTables observational_joint_discrete(const ScmDiscrete& scm) {
    scm.validate();
    ObservationalTables t;
    t.nx = scm.nx;
    t.ny = scm.ny;
    t.nz = scm.nz;
    t.p_xy.assign(static_cast<size_t>(scm.nx) * scm.ny, 0.0);
    t.p_x.assign(static_cast<size_t>(scm.nx), 0.0);
    t.p_z.assign(static_cast<size_t>(scm.nz), 0.0);
    t.p_yx_given_z.assign(static_cast<size_t>(scm.nz) * scm.nx * scm.ny, 0.0);
    t.p_x_given_z.assign(static_cast<size_t>(scm.nz) * scm.nx, 0.0);
    for (int c = 0; c < scm.nc; ++c) {
        for (int z = 0; z < scm.nz; ++z) {
            double pcz = scm.p_c[static_cast<size_t>(c)] * scm.pz(c, z);
            t.p_z[static_cast<size_t>(z)] += pcz;
            for (int x = 0; x < scm.nx; ++x) {
                double pczx = pcz * scm.px(z, x);
                t.p_x[static_cast<size_t>(x)] += pczx;
                for (int y = 0; y < scm.ny; ++y) {
                    double p = pczx * scm.py(x, c, y);
                    t.p_xy[static_cast<size_t>(x * scm.ny + y)] += p;
                    t.p_yx_given_z[static_cast<size_t>((z * scm.nx + x) * scm.ny + y)] += p;
                }
            }
        }
    }
    for (int z = 0; z < scm.nz; ++z) {
        double pz = t.p_z[static_cast<size_t>(z)];
        for (int x = 0; x < scm.nx; ++x) {
            double joint_zx = 0.0;
            for (int y = 0; y < scm.ny; ++y) joint_zx += t.p_yx_given_z[static_cast<size_t>((z * scm.nx + x) * scm.ny + y)];
            t.p_x_given_z[static_cast<size_t>(z * scm.nx + x)] = pz > 0.0 ? joint_zx / pz : 0.0;
            for (int y = 0; y < scm.ny; ++y) {
                auto& cell = t.p_yx_given_z[static_cast<size_t>((z * scm.nx + x) * scm.ny + y)];
                cell = pz > 0.0 ? cell / pz : 0.0;
            }
        }
    }
    return t;
}

// Marginal P(x | c) = sum_z P(z|c) P(x|z); the positivity requirement of the
// adjustment formula.
inline double marginal_x_given_c(const ScmDiscrete& scm, int x, int c) {
    double p = 0.0;
    for (int z = 0; z < scm.nz; ++z) p += scm.pz(c, z) * scm.px(z, x);
    return p;
}

// Exact P(y | do(x)) by backdoor adjustment over the confounder:
// sum_c P(y|x,c) P(c). Positivity of P(x|c) is required wherever P(c) > 0.
inline double backdoor_adjust_discrete(const ScmDiscrete& scm, int x, int y) {
    scm.validate();
    if (x < 0 || x >= scm.nx || y < 0 || y >= scm.ny)
        throw IndexError("backdoor_adjust_discrete: (x,y) outside the SCM's ranges");
    double result = 0.0;
    for (int c = 0; c < scm.nc; ++c) {
        double pc = scm.p_c[static_cast<size_t>(c)];
        if (pc <= 0.0) continue;
        if (marginal_x_given_c(scm, x, c) <= 0.0)
            throw IdentifiabilityError("backdoor_adjust_discrete: positivity violated, P(x=" + std::to_string(x) +
                                       "|c=" + std::to_string(c) + ") = 0 while P(c) > 0");
        result += scm.py(x, c, y) * pc;
    }
    return result;
}

}  // namespace genint
