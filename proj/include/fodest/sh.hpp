#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fodest/common.hpp"
#include "fodest/direction.hpp"

namespace fod {

/// Number of real symmetrized SH basis functions through even level l_max.
inline int sh_coeff_count(int l_max) {
    require(l_max >= 0 && l_max % 2 == 0, "sh_coeff_count: l_max must be even and >= 0");
    return (l_max + 1) * (l_max + 2) / 2;
}

/// Column offset of level l (even) in the blocked coefficient layout.
inline int sh_level_offset(int l) { return l * (l - 1) / 2; }

struct LevelBlock {
    int l;
    int start;
    int length; // 2l+1
};

/// Contiguous per-level partition of a coefficient vector: block l spans
/// [start, start+2l+1) for l = 0, 2, ..., l_max.
struct LevelBlockIndex {
    int l_max = 0;
    std::vector<LevelBlock> blocks;

    static LevelBlockIndex for_l_max(int l_max) {
        require(l_max >= 0 && l_max % 2 == 0, "LevelBlockIndex: l_max must be even");
        LevelBlockIndex idx;
        idx.l_max = l_max;
        for (int l = 0; l <= l_max; l += 2)
            idx.blocks.push_back({l, sh_level_offset(l), 2 * l + 1});
        return idx;
    }
};

/// Evaluation of the real symmetrized SH basis on a set of directions.
/// Row i holds the L basis values at direction i; columns are blocked by
/// even level l with m = -l..l inside each block.
struct ShBasisMatrix {
    Eigen::MatrixXd values; // n x L
    int l_max = 0;

    int coeff_count() const { return static_cast<int>(values.cols()); }
    int n_directions() const { return static_cast<int>(values.rows()); }

    int column(int l, int m) const {
        require(l >= 0 && l <= l_max && l % 2 == 0 && m >= -l && m <= l,
                "ShBasisMatrix::column: index out of range");
        return sh_level_offset(l) + (m + l);
    }
};

namespace detail {

/// Fully normalized associated Legendre values P(l,m) for 0 <= m <= l <= l_max,
/// normalized so the real basis assembled below is orthonormal on the sphere.
/// Standard three-term recurrence in l with the diagonal seeded along m.
class NormalizedLegendre {
public:
    explicit NormalizedLegendre(int l_max) : l_max_(l_max), p_((l_max + 1) * (l_max + 2) / 2) {}

    void compute(double cos_theta, double sin_theta) {
        const double ct = cos_theta, st = sin_theta;
        double pmm = std::sqrt(1.0 / kFourPi);
        for (int m = 0; m <= l_max_; ++m) {
            if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * st;
            at(m, m) = pmm;
            if (m < l_max_) at(m + 1, m) = std::sqrt(2.0 * m + 3.0) * ct * pmm;
            for (int l = m + 2; l <= l_max_; ++l) {
                const double a =
                    std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
                const double b = std::sqrt(
                    ((static_cast<double>(l - 1) * (l - 1)) - static_cast<double>(m) * m) /
                    (4.0 * static_cast<double>(l - 1) * (l - 1) - 1.0));
                at(l, m) = a * (ct * at(l - 1, m) - b * at(l - 2, m));
            }
        }
    }

    double operator()(int l, int m) const { return p_[l * (l + 1) / 2 + m]; }

private:
    double& at(int l, int m) { return p_[l * (l + 1) / 2 + m]; }

    int l_max_;
    std::vector<double> p_;
};

} // namespace detail

/// Evaluate one row of the real symmetrized even-level SH basis.
/// `out` must have sh_coeff_count(l_max) entries.
inline void eval_sh_row(const Direction& d, int l_max, Eigen::Ref<Eigen::RowVectorXd> out) {
    const double st = std::sqrt(d.x * d.x + d.y * d.y);
    const double cp = st > 0.0 ? d.x / st : 1.0;
    const double sp = st > 0.0 ? d.y / st : 0.0;

    detail::NormalizedLegendre leg(l_max);
    leg.compute(d.z, st);

    // cos(m phi), sin(m phi) by the Chebyshev-style recurrence
    std::vector<double> cm(l_max + 1), sm(l_max + 1);
    cm[0] = 1.0;
    sm[0] = 0.0;
    if (l_max >= 1) {
        cm[1] = cp;
        sm[1] = sp;
        for (int m = 2; m <= l_max; ++m) {
            cm[m] = 2.0 * cp * cm[m - 1] - cm[m - 2];
            sm[m] = 2.0 * cp * sm[m - 1] - sm[m - 2];
        }
    }

    const double sqrt2 = std::sqrt(2.0);
    for (int l = 0; l <= l_max; l += 2) {
        const int off = sh_level_offset(l);
        out[off + l] = leg(l, 0);
        for (int m = 1; m <= l; ++m) {
            const double p = sqrt2 * leg(l, m);
            out[off + l - m] = p * cm[m];
            out[off + l + m] = p * sm[m];
        }
    }
}

/// Basis matrix over a direction set. Directions must be unit vectors
/// (rejected beyond 1e-9 norm deviation); l_max must be even.
inline ShBasisMatrix eval_sh_basis(const std::vector<Direction>& directions, int l_max) {
    require(l_max >= 0 && l_max % 2 == 0, "eval_sh_basis: l_max must be even and >= 0");
    for (const auto& d : directions) check_unit(d);
    ShBasisMatrix basis;
    basis.l_max = l_max;
    basis.values.resize(static_cast<int>(directions.size()), sh_coeff_count(l_max));
    Eigen::RowVectorXd row(sh_coeff_count(l_max));
    for (int i = 0; i < static_cast<int>(directions.size()); ++i) {
        eval_sh_row(directions[i], l_max, row);
        basis.values.row(i) = row;
    }
    return basis;
}

} // namespace fod
