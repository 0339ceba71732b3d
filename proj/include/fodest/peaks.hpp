#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <vector>

#include "fodest/estimators.hpp"
#include "fodest/icosphere.hpp"

namespace fod {

/// Spherical-function samples over a meshed grid.
struct FodField {
    Eigen::VectorXd values;
    const SphericalGrid* grid = nullptr;

    void validate() const {
        require(grid != nullptr && values.size() == grid->size(), "FodField: size mismatch");
        require(grid->has_adjacency(), "FodField: grid carries no mesh adjacency");
    }
};

struct Peak {
    Direction direction;
    double value = 0.0;
    int prominence_rank = 0; // 1 = largest
};

struct PeakOptions {
    double rel_threshold = 0.25;
    int neighborhood_hops = 2;
    int max_peaks = 4;
    double merge_angle_deg = 15.0;
};

/// Mesh local maxima of a sampled spherical function: vertices strictly above
/// every vertex within the hop neighborhood, at or above rel_threshold of the
/// global maximum, merged axially within merge_angle_deg keeping the larger.
/// An empty result means isotropic / no peak.
inline std::vector<Peak> detect_peaks_on_field(const FodField& field,
                                               const PeakOptions& opts = {}) {
    field.validate();
    const SphericalGrid& grid = *field.grid;
    const double gmax = field.values.maxCoeff();
    if (gmax <= 0.0) return {};
    const double floor = opts.rel_threshold * gmax;

    std::vector<int> candidates;
    for (int i = 0; i < grid.size(); ++i) {
        const double v = field.values[i];
        if (v <= 0.0 || v < floor) continue;
        bool is_max = true;
        for (int j : mesh_neighborhood(grid, i, opts.neighborhood_hops))
            if (field.values[j] >= v) {
                is_max = false;
                break;
            }
        if (is_max) candidates.push_back(i);
    }

    // larger value first; index breaks exact ties deterministically
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
        if (field.values[a] != field.values[b]) return field.values[a] > field.values[b];
        return a < b;
    });

    std::vector<Peak> peaks;
    for (int i : candidates) {
        const Direction& d = grid.directions[i];
        bool merged = false;
        for (const Peak& p : peaks)
            if (acute_angle_deg(p.direction, d) <= opts.merge_angle_deg) {
                merged = true; // the kept peak is the larger by sort order
                break;
            }
        if (!merged) {
            peaks.push_back({d, field.values[i], static_cast<int>(peaks.size()) + 1});
            if (static_cast<int>(peaks.size()) == opts.max_peaks) break;
        }
    }
    return peaks;
}

/// Evaluate SH coefficients on the dense grid, then find peaks.
inline std::vector<Peak> detect_peaks(const ShCoefficients& f, const SphericalGrid& dense,
                                      const PeakOptions& opts = {}) {
    f.validate();
    const ShBasisMatrix basis = eval_sh_basis(dense.directions, f.l_max);
    FodField field{basis.values * f.values, &dense};
    return detect_peaks_on_field(field, opts);
}

struct PeakMatch {
    bool counts_match = false;
    std::vector<int> assignment;  // truth index -> estimated index
    std::vector<double> angles;   // acute angle per truth fiber, degrees
    double total_angle = 0.0;
};

/// Exhaustive minimum-total-angle assignment of estimated peaks to true
/// directions. A count mismatch flags the replicate as a detection failure.
inline PeakMatch match_peaks(const std::vector<Peak>& estimated,
                             const std::vector<Direction>& truth) {
    PeakMatch m;
    if (estimated.size() != truth.size()) return m;
    const int k = static_cast<int>(truth.size());
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_perm;
    do {
        double total = 0.0;
        for (int i = 0; i < k; ++i) total += acute_angle_deg(truth[i], estimated[perm[i]].direction);
        if (total < best) {
            best = total;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    m.counts_match = true;
    m.assignment = best_perm;
    m.total_angle = best;
    m.angles.resize(k);
    for (int i = 0; i < k; ++i) m.angles[i] = acute_angle_deg(truth[i], estimated[best_perm[i]].direction);
    return m;
}

} // namespace fod
