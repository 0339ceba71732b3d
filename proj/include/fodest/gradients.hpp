#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fodest/common.hpp"
#include "fodest/design_tables.hpp"
#include "fodest/direction.hpp"
#include "fodest/icosphere.hpp"

namespace fod {

/// Sampling design: unit gradient directions with their b-values. Entries
/// with b = 0 are non-diffusion-weighted frames.
struct GradientTable {
    std::vector<Direction> directions;
    std::vector<double> bvals;

    int size() const { return static_cast<int>(directions.size()); }

    std::vector<int> diffusion_indices() const {
        std::vector<int> idx;
        for (int i = 0; i < size(); ++i)
            if (bvals[i] > 0.0) idx.push_back(i);
        return idx;
    }

    std::vector<int> b0_indices() const {
        std::vector<int> idx;
        for (int i = 0; i < size(); ++i)
            if (bvals[i] == 0.0) idx.push_back(i);
        return idx;
    }

    /// Directions of the diffusion-weighted entries only.
    std::vector<Direction> diffusion_directions() const {
        std::vector<Direction> out;
        for (int i : diffusion_indices()) out.push_back(directions[i]);
        return out;
    }

    /// Common b-value of the diffusion-weighted entries (single-shell data).
    double shell_b() const {
        const auto idx = diffusion_indices();
        require(!idx.empty(), "GradientTable: no diffusion-weighted entries");
        const double b = bvals[idx.front()];
        for (int i : idx)
            require(std::abs(bvals[i] - b) <= 1e-6 * b, "GradientTable: multi-shell table not supported");
        return b;
    }
};

namespace detail {

inline std::vector<double> read_numbers(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open " + path);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    return out;
}

} // namespace detail

/// bvecs/bvals convention: a 3 x n whitespace-delimited direction file and a
/// 1 x n b-value file. Zero vectors are only accepted on b = 0 entries.
inline GradientTable read_bvecs_bvals(const std::string& bvecs_path, const std::string& bvals_path) {
    const auto vecs = detail::read_numbers(bvecs_path);
    const auto vals = detail::read_numbers(bvals_path);
    require(!vals.empty(), "bvals file is empty: " + bvals_path);
    require(vecs.size() == 3 * vals.size(),
            "bvecs/bvals mismatch: expected 3*" + std::to_string(vals.size()) + " direction components");
    const std::size_t n = vals.size();
    GradientTable table;
    table.bvals = vals;
    table.directions.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Direction d{vecs[i], vecs[n + i], vecs[2 * n + i]};
        if (vals[i] == 0.0 && d.norm() == 0.0) {
            table.directions[i] = {0, 0, 1}; // placeholder, never used for fitting
        } else {
            require(d.norm() > 0.0, "bvecs: zero direction on a diffusion-weighted entry");
            table.directions[i] = d.normalized();
        }
    }
    return table;
}

/// Deterministic spiral point set covering the upper hemisphere; used for
/// design sizes that match no icosphere vertex/face count.
inline std::vector<Direction> fibonacci_hemisphere(int n) {
    require(n >= 1, "fibonacci_hemisphere: n must be positive");
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    std::vector<Direction> dirs(n);
    for (int i = 0; i < n; ++i) {
        const double z = (i + 0.5) / n;
        const double r = std::sqrt(1.0 - z * z);
        const double phi = golden_angle * i;
        dirs[i] = {r * std::cos(phi), r * std::sin(phi), z};
    }
    return dirs;
}

/// Axial electrostatic repulsion with an annealed step; spreads a point set
/// uniformly over the projective sphere. Deterministic.
inline std::vector<Direction> repulsion_optimize(std::vector<Direction> d, int iters = 800) {
    const int n = static_cast<int>(d.size());
    std::vector<Direction> grad(n);
    for (int it = 0; it < iters; ++it) {
        const double step = 0.02 * std::pow(1e-4 / 0.02, static_cast<double>(it) / iters);
        for (auto& v : grad) v = {0, 0, 0};
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (double s : {1.0, -1.0}) {
                    const double dx = d[i].x - s * d[j].x;
                    const double dy = d[i].y - s * d[j].y;
                    const double dz = d[i].z - s * d[j].z;
                    const double r2 = dx * dx + dy * dy + dz * dz + 1e-12;
                    const double inv = 1.0 / (r2 * std::sqrt(r2));
                    grad[i].x += dx * inv;
                    grad[i].y += dy * inv;
                    grad[i].z += dz * inv;
                    grad[j].x -= s * dx * inv;
                    grad[j].y -= s * dy * inv;
                    grad[j].z -= s * dz * inv;
                }
        double gmax = 1e-30;
        for (const auto& v : grad) gmax = std::max(gmax, v.norm());
        for (int i = 0; i < n; ++i)
            d[i] = Direction{d[i].x + step * grad[i].x / gmax, d[i].y + step * grad[i].y / gmax,
                             d[i].z + step * grad[i].z / gmax}
                       .normalized();
    }
    for (auto& v : d)
        if (!detail::in_upper_hemisphere(v)) v = -v;
    return d;
}

/// n-point single-shell design at b-value b: icosphere upper-half face
/// centers when n matches 10*4^s, the shipped optimized tables at n = 41 and
/// 91, otherwise a repulsion-optimized Fibonacci hemisphere set.
inline GradientTable make_design(int n, double b) {
    require(n >= 7, "make_design: need at least 7 gradients");
    require(b > 0.0, "make_design: b must be positive");
    GradientTable table;
    if (n == 41) {
        for (const auto& p : detail::kDesign41) table.directions.push_back({p[0], p[1], p[2]});
    } else if (n == 91) {
        for (const auto& p : detail::kDesign91) table.directions.push_back({p[0], p[1], p[2]});
    } else {
        for (int s = 0; s <= 6; ++s) {
            if (n == 10 * (1 << (2 * s))) {
                table.directions =
                    icosphere_grid(s, GridMode::FaceCenters, Hemisphere::Upper).directions;
                break;
            }
        }
        if (table.directions.empty())
            table.directions = repulsion_optimize(fibonacci_hemisphere(n));
    }
    table.bvals.assign(n, b);
    return table;
}

/// CSV export of a grid as x,y,z[,weight] rows.
inline void write_grid_csv(const SphericalGrid& grid, std::ostream& out) {
    out << (grid.has_weights() ? "x,y,z,weight\n" : "x,y,z\n");
    char buf[160];
    for (int i = 0; i < grid.size(); ++i) {
        const Direction& d = grid.directions[i];
        if (grid.has_weights())
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", d.x, d.y, d.z,
                          grid.quadrature_weights[i]);
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", d.x, d.y, d.z);
        out << buf;
    }
}

} // namespace fod
