#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "fodest/common.hpp"
#include "fodest/direction.hpp"
#include "fodest/sh.hpp"

namespace fod {

enum class GridSource { IcosphereVertices, IcosphereFaceCenters, UserSupplied };
enum class GridMode { Vertices, FaceCenters };
enum class Hemisphere { Full, Upper };

/// A set of evaluation directions on S^2. Vertex grids carry Voronoi-area
/// quadrature weights (summing to 4*pi) and mesh adjacency; face-center
/// and user grids carry directions only.
struct SphericalGrid {
    std::vector<Direction> directions;
    std::vector<double> quadrature_weights;      // empty or one per direction
    std::vector<std::vector<int>> adjacency;     // empty or one list per direction
    GridSource source = GridSource::UserSupplied;
    Hemisphere hemisphere = Hemisphere::Full;

    int size() const { return static_cast<int>(directions.size()); }
    bool has_weights() const { return !quadrature_weights.empty(); }
    bool has_adjacency() const { return !adjacency.empty(); }
};

namespace detail {

struct IcoMesh {
    std::vector<Direction> verts;
    std::vector<std::array<int, 3>> faces;
};

inline IcoMesh base_icosahedron() {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    const double n = std::sqrt(1.0 + phi * phi);
    const double a = 1.0 / n, b = phi / n;
    IcoMesh m;
    m.verts = {
        {-a, b, 0}, {a, b, 0}, {-a, -b, 0}, {a, -b, 0},
        {0, -a, b}, {0, a, b}, {0, -a, -b}, {0, a, -b},
        {b, 0, -a}, {b, 0, a}, {-b, 0, -a}, {-b, 0, a},
    };
    m.faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };
    return m;
}

inline IcoMesh subdivide(const IcoMesh& in) {
    IcoMesh out;
    out.verts = in.verts;
    std::unordered_map<std::uint64_t, int> midpoint;
    auto mid = [&](int i, int j) {
        const std::uint64_t key = i < j
            ? (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j)
            : (static_cast<std::uint64_t>(j) << 32) | static_cast<std::uint32_t>(i);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const Direction& a = out.verts[i];
        const Direction& b = out.verts[j];
        Direction m{(a.x + b.x) / 2, (a.y + b.y) / 2, (a.z + b.z) / 2};
        out.verts.push_back(m.normalized());
        const int idx = static_cast<int>(out.verts.size()) - 1;
        midpoint.emplace(key, idx);
        return idx;
    };
    for (const auto& f : in.faces) {
        const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
        out.faces.push_back({f[0], ab, ca});
        out.faces.push_back({f[1], bc, ab});
        out.faces.push_back({f[2], ca, bc});
        out.faces.push_back({ab, bc, ca});
    }
    return out;
}

// Signed solid angle of the spherical triangle (a,b,c) (Van Oosterom-Strackee).
inline double solid_angle(const Direction& a, const Direction& b, const Direction& c) {
    const double num = a.dot(b.cross(c));
    const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    return 2.0 * std::atan2(num, den);
}

inline Direction circumcenter(const Direction& a, const Direction& b, const Direction& c) {
    Direction ab{b.x - a.x, b.y - a.y, b.z - a.z};
    Direction ac{c.x - a.x, c.y - a.y, c.z - a.z};
    Direction n = ab.cross(ac).normalized();
    if (n.dot(a) < 0.0) n = -n;
    return n;
}

inline Direction edge_midpoint_on_sphere(const Direction& a, const Direction& b) {
    return Direction{(a.x + b.x) / 2, (a.y + b.y) / 2, (a.z + b.z) / 2}.normalized();
}

/// Circumcentric-dual (Voronoi) cell areas: within each face the dual piece
/// of a corner vertex is the quad (v, mid(v,a), circumcenter, mid(v,b)).
/// The pieces tile the sphere, so the areas sum to 4*pi by construction;
/// they are renormalized to pin the sum exactly.
inline std::vector<double> voronoi_weights(const IcoMesh& m) {
    std::vector<double> w(m.verts.size(), 0.0);
    for (const auto& f : m.faces) {
        const Direction cc = circumcenter(m.verts[f[0]], m.verts[f[1]], m.verts[f[2]]);
        for (int k = 0; k < 3; ++k) {
            const Direction& v = m.verts[f[k]];
            const Direction m1 = edge_midpoint_on_sphere(v, m.verts[f[(k + 1) % 3]]);
            const Direction m2 = edge_midpoint_on_sphere(v, m.verts[f[(k + 2) % 3]]);
            w[f[k]] += std::abs(solid_angle(v, m1, cc)) + std::abs(solid_angle(v, cc, m2));
        }
    }
    double total = 0.0;
    for (double x : w) total += x;
    for (double& x : w) x *= kFourPi / total;
    return w;
}

/// Least-norm adjustment of the weights so that all even spherical harmonics
/// through the highest affordable degree integrate exactly. Raw Voronoi areas
/// alone leave a few-1e-3 quadrature error in SH Gram matrices; the moment
/// correction removes it while keeping the weights positive and summing to
/// 4*pi. Falls back to lower degrees if positivity would be lost.
inline void moment_correct_weights(const std::vector<Direction>& dirs, std::vector<double>& w) {
    const int n = static_cast<int>(dirs.size());
    int deg = 24;
    while (deg > 0 && sh_coeff_count(deg) > n / 2) deg -= 2;
    Eigen::Map<Eigen::VectorXd> w0(w.data(), n);
    for (; deg >= 2; deg -= 2) {
        const ShBasisMatrix basis = eval_sh_basis(dirs, deg);
        Eigen::VectorXd target = Eigen::VectorXd::Zero(basis.coeff_count());
        target[0] = std::sqrt(kFourPi);
        const Eigen::VectorXd resid = target - basis.values.transpose() * w0;
        const Eigen::MatrixXd ata = basis.values.transpose() * basis.values;
        const Eigen::VectorXd corrected = w0 + basis.values * ata.ldlt().solve(resid);
        if (corrected.minCoeff() > 0.0) {
            w0 = corrected;
            return;
        }
    }
}

inline std::vector<std::vector<int>> vertex_adjacency(const IcoMesh& m) {
    std::vector<std::vector<int>> adj(m.verts.size());
    auto add = [&](int i, int j) {
        for (int k : adj[i])
            if (k == j) return;
        adj[i].push_back(j);
    };
    for (const auto& f : m.faces) {
        add(f[0], f[1]); add(f[1], f[0]);
        add(f[1], f[2]); add(f[2], f[1]);
        add(f[2], f[0]); add(f[0], f[2]);
    }
    return adj;
}

/// One representative per antipodal pair: z > 0, ties on the equator broken
/// by y > 0, then x > 0 (lexicographic, deterministic).
inline bool in_upper_hemisphere(const Direction& d, double tol = 1e-12) {
    if (d.z > tol) return true;
    if (d.z < -tol) return false;
    if (d.y > tol) return true;
    if (d.y < -tol) return false;
    return d.x > 0.0;
}

} // namespace detail

/// Recursive icosahedron subdivision projected to the unit sphere.
/// Vertices mode: 10*4^s+2 points with Voronoi quadrature weights and mesh
/// adjacency; face-centers mode: 20*4^s points. Upper mode keeps one
/// representative per antipodal pair.
inline SphericalGrid icosphere_grid(int subdivision, GridMode mode,
                                    Hemisphere hemisphere = Hemisphere::Full) {
    require(subdivision >= 0 && subdivision <= 6, "icosphere_grid: subdivision must be in [0, 6]");
    detail::IcoMesh mesh = detail::base_icosahedron();
    for (int s = 0; s < subdivision; ++s) mesh = detail::subdivide(mesh);

    SphericalGrid grid;
    grid.hemisphere = hemisphere;
    if (mode == GridMode::Vertices) {
        grid.source = GridSource::IcosphereVertices;
        grid.directions = mesh.verts;
        grid.quadrature_weights = detail::voronoi_weights(mesh);
        detail::moment_correct_weights(grid.directions, grid.quadrature_weights);
        grid.adjacency = detail::vertex_adjacency(mesh);
    } else {
        grid.source = GridSource::IcosphereFaceCenters;
        grid.directions.reserve(mesh.faces.size());
        for (const auto& f : mesh.faces) {
            const Direction& a = mesh.verts[f[0]];
            const Direction& b = mesh.verts[f[1]];
            const Direction& c = mesh.verts[f[2]];
            grid.directions.push_back(
                Direction{a.x + b.x + c.x, a.y + b.y + c.y, a.z + b.z + c.z}.normalized());
        }
    }

    if (hemisphere == Hemisphere::Upper) {
        std::vector<int> keep;
        for (int i = 0; i < grid.size(); ++i)
            if (detail::in_upper_hemisphere(grid.directions[i])) keep.push_back(i);
        SphericalGrid upper;
        upper.source = grid.source;
        upper.hemisphere = Hemisphere::Upper;
        for (int i : keep) {
            upper.directions.push_back(grid.directions[i]);
            // each representative stands for an antipodal pair, so its weight
            // doubles and the sum stays 4*pi (valid for even integrands)
            if (grid.has_weights()) upper.quadrature_weights.push_back(2.0 * grid.quadrature_weights[i]);
        }
        // adjacency is dropped: the cut mesh is no longer a closed surface
        return upper;
    }
    return grid;
}

/// Vertex indices within `hops` mesh edges of `start` (excluding `start`).
inline std::vector<int> mesh_neighborhood(const SphericalGrid& grid, int start, int hops) {
    require(grid.has_adjacency(), "mesh_neighborhood: grid has no adjacency");
    std::vector<int> dist(grid.size(), -1);
    std::vector<int> frontier{start}, result;
    dist[start] = 0;
    for (int h = 1; h <= hops; ++h) {
        std::vector<int> next;
        for (int v : frontier)
            for (int u : grid.adjacency[v])
                if (dist[u] < 0) {
                    dist[u] = h;
                    next.push_back(u);
                    result.push_back(u);
                }
        frontier = std::move(next);
    }
    return result;
}

} // namespace fod
