#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <utility>
#include <vector>

#include "fodest/common.hpp"
#include "fodest/icosphere.hpp"
#include "fodest/response.hpp"
#include "fodest/sh.hpp"

namespace fod {

/// Level-blocked coefficient vector of a symmetric spherical function.
struct ShCoefficients {
    Eigen::VectorXd values;
    int l_max = 0;

    LevelBlockIndex blocks() const { return LevelBlockIndex::for_l_max(l_max); }

    Eigen::VectorBlock<const Eigen::VectorXd> block(int l) const {
        return values.segment(sh_level_offset(l), 2 * l + 1);
    }

    void validate() const {
        require(values.size() == sh_coeff_count(l_max), "ShCoefficients: length/l_max mismatch");
    }
};

/// Zero-pad a coefficient vector to a higher even level.
inline ShCoefficients pad_coefficients(const ShCoefficients& f, int l_max_target) {
    require(l_max_target >= f.l_max && l_max_target % 2 == 0,
            "pad_coefficients: target level must be even and >= source level");
    ShCoefficients out;
    out.l_max = l_max_target;
    out.values = Eigen::VectorXd::Zero(sh_coeff_count(l_max_target));
    out.values.head(f.values.size()) = f.values;
    return out;
}

/// OLS-deconvolved observations z = R^-1 (Phi' Phi)^-1 Phi' y with their
/// covariance shape V and the noise-variance estimate.
struct TransformedObservations {
    Eigen::VectorXd z;
    Eigen::MatrixXd v; // V = R^-1 (Phi' Phi)^-1 R^-1
    double sigma2_hat = 0.0;
    int l_max = 0;
};

/// Estimator selection constants. Defaults follow the recommended values:
/// the first three levels (l = 0, 2, 4) are never shrunk, shrinkage exponent
/// c = 2, superCSD threshold/penalty 0.1/1.
struct FitConfig {
    int l_max = 10;
    int l_max_super = 12;
    int l0 = 4;
    double c = 2.0;
    std::vector<double> ridge_grid = default_ridge_grid();
    double scsd_tau = 0.1;
    double scsd_lambda = 1.0;
    int scsd_max_iters = 50;
    bool scsd_tau_relative = true; // threshold at tau * mean(F); false = raw tau tau

    static std::vector<double> default_ridge_grid() {
        std::vector<double> g(100);
        for (int i = 0; i < 100; ++i) g[i] = std::pow(10.0, -6.0 + 8.0 * i / 99.0);
        return g;
    }

    void validate() const {
        require(l_max >= 0 && l_max % 2 == 0, "FitConfig: l_max must be even");
        require(l_max_super >= l_max && l_max_super % 2 == 0,
                "FitConfig: l_max_super must be even and >= l_max");
        require(l0 >= 2 && l0 % 2 == 0, "FitConfig: l0 must be even and >= 2");
        require(c > 1.0, "FitConfig: c must exceed 1");
        require(!ridge_grid.empty(), "FitConfig: ridge grid must be nonempty");
        require(scsd_tau > 0.0 && scsd_lambda > 0.0 && scsd_max_iters >= 1,
                "FitConfig: invalid superCSD constants");
    }
};

/// Laplace-Beltrami ridge penalty: l^2 (l+1)^2 on the l-th block, zero at l=0.
inline Eigen::VectorXd ridge_penalty_diag(int l_max) {
    Eigen::VectorXd p(sh_coeff_count(l_max));
    for (int l = 0; l <= l_max; l += 2)
        p.segment(sh_level_offset(l), 2 * l + 1)
            .setConstant(static_cast<double>(l) * l * (l + 1.0) * (l + 1.0));
    return p;
}

/// Mean squared error of the OLS fit: |y - Phi (Phi'Phi)^-1 Phi' y|^2 / (n - rank(Phi)).
inline double estimate_noise_variance(const Eigen::VectorXd& y, const ShBasisMatrix& basis) {
    const int n = basis.n_directions();
    require(y.size() == n, "estimate_noise_variance: size mismatch");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis.values);
    const int rank = static_cast<int>(qr.rank());
    require(n > rank, "estimate_noise_variance: need n > rank(Phi)");
    const Eigen::VectorXd resid = y - basis.values * qr.solve(y);
    return resid.squaredNorm() / (n - rank);
}

namespace detail {

inline void check_response_levels(const RMatrix& r, int l_max) {
    for (int l = 0; l <= l_max; l += 2) {
        const double rl = r.diag[sh_level_offset(l)] / std::sqrt(kFourPi / (2.0 * l + 1.0));
        if (std::abs(rl) < 1e-12)
            throw std::runtime_error("response kernel kills SH level l=" + std::to_string(l) +
                                     " (|r_l| < 1e-12); deconvolution is unrecoverable");
    }
}

/// Positive-part James-Stein factor for one block given the eigenvalue norms
/// of its covariance shape.
inline double shrink_factor(double lam1, double lam2, double laminf, double t, double sigma2,
                            double znorm2) {
    if (znorm2 <= 0.0) return 0.0;
    const double threshold = sigma2 * (lam1 + 2.0 * lam2 * std::sqrt(t) + 2.0 * laminf * t);
    const double f = 1.0 - threshold / znorm2;
    return f > 0.0 ? f : 0.0;
}

} // namespace detail

/// Ridge-regularized deconvolution, the exact solution of
/// (R Phi'Phi R + lambda P) f = R Phi' y.
inline ShCoefficients shridge_fit(const Eigen::VectorXd& y, const ShBasisMatrix& basis,
                                  const RMatrix& r, double lambda) {
    require(lambda >= 0.0, "shridge_fit: lambda must be nonnegative");
    require(basis.l_max == r.l_max, "shridge_fit: basis/R level mismatch");
    const Eigen::MatrixXd phi_r = basis.values * r.diag.asDiagonal();
    Eigen::MatrixXd a = phi_r.transpose() * phi_r;
    a.diagonal() += lambda * ridge_penalty_diag(basis.l_max);
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("shridge_fit: singular penalized system");
    ShCoefficients f;
    f.l_max = basis.l_max;
    f.values = llt.solve(phi_r.transpose() * y);
    return f;
}

/// Grid search over lambda minimizing BIC(lambda) = n log(RSS/n) + df log n,
/// where df is the trace of the ridge hat matrix. First grid index wins ties.
inline std::pair<double, ShCoefficients> shridge_bic_select(const Eigen::VectorXd& y,
                                                            const ShBasisMatrix& basis,
                                                            const RMatrix& r,
                                                            const std::vector<double>& grid) {
    require(!grid.empty(), "shridge_bic_select: empty grid");
    const int n = basis.n_directions();
    const Eigen::MatrixXd phi_r = basis.values * r.diag.asDiagonal();
    const Eigen::MatrixXd rgr = phi_r.transpose() * phi_r;
    const Eigen::VectorXd b = phi_r.transpose() * y;
    const Eigen::VectorXd penalty = ridge_penalty_diag(basis.l_max);
    const double ynorm2 = y.squaredNorm();
    const double logn = std::log(static_cast<double>(n));

    double best_bic = std::numeric_limits<double>::infinity();
    double best_lambda = grid.front();
    Eigen::VectorXd best_f;
    Eigen::MatrixXd a(rgr.rows(), rgr.cols());
    for (double lambda : grid) {
        a = rgr;
        a.diagonal() += lambda * penalty;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("shridge_bic_select: singular penalized system");
        const Eigen::VectorXd f = llt.solve(b);
        const double rss = std::max(ynorm2 - 2.0 * b.dot(f) + f.dot(rgr * f), 1e-300);
        const double df = llt.solve(rgr).trace();
        const double bic = n * std::log(rss / n) + df * logn;
        if (bic < best_bic) {
            best_bic = bic;
            best_lambda = lambda;
            best_f = f;
        }
    }
    ShCoefficients f;
    f.l_max = basis.l_max;
    f.values = std::move(best_f);
    return {best_lambda, std::move(f)};
}

/// Step 1 of BJS: z = R^-1 (Phi'Phi)^-1 Phi' y. Fails loudly if the kernel
/// kills a level (r_l below 1e-12) since no shrinkage can undo that.
inline TransformedObservations bjs_transform(const Eigen::VectorXd& y, const ShBasisMatrix& basis,
                                             const RMatrix& r) {
    const int n = basis.n_directions();
    const int L = basis.coeff_count();
    require(n > L, "bjs_transform: need n > L");
    require(basis.l_max == r.l_max, "bjs_transform: basis/R level mismatch");
    detail::check_response_levels(r, r.l_max);

    const Eigen::MatrixXd gram = basis.values.transpose() * basis.values;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("bjs_transform: Phi'Phi is singular");
    const Eigen::MatrixXd gram_inv = llt.solve(Eigen::MatrixXd::Identity(L, L));
    const Eigen::VectorXd r_inv = r.diag.cwiseInverse();

    TransformedObservations t;
    t.l_max = basis.l_max;
    t.z = r_inv.asDiagonal() * llt.solve(basis.values.transpose() * y);
    t.v = r_inv.asDiagonal() * gram_inv * r_inv.asDiagonal();
    t.sigma2_hat = estimate_noise_variance(y, basis);
    return t;
}

/// Step 2 of BJS: blocks through l0 pass unshrunk; higher blocks are scaled
/// by the positive-part factor built from the tail bound on the quadratic
/// form of the block noise, with t = c log(2l+1).
inline ShCoefficients bjs_shrink(const TransformedObservations& t, const FitConfig& cfg) {
    cfg.validate();
    require(t.z.size() == sh_coeff_count(t.l_max), "bjs_shrink: malformed observations");
    ShCoefficients out;
    out.l_max = t.l_max;
    out.values = t.z;
    for (int l = cfg.l0 + 2; l <= t.l_max; l += 2) {
        const int start = sh_level_offset(l);
        const int len = 2 * l + 1;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.v.block(start, start, len, len),
                                                          Eigen::EigenvaluesOnly);
        const Eigen::VectorXd lam = es.eigenvalues();
        const double tl = cfg.c * std::log(2.0 * l + 1.0);
        const double factor =
            detail::shrink_factor(lam.cwiseAbs().sum(), lam.norm(), lam.cwiseAbs().maxCoeff(), tl,
                                  t.sigma2_hat, t.z.segment(start, len).squaredNorm());
        out.values.segment(start, len) *= factor;
    }
    return out;
}

namespace detail {

/// Shared core of the one-step sharpening and the superCSD update: solve
///   (A0 + weight * Phi_rows' Phi_rows) f = (Phi^s R^s)' y
/// where the rows are the dense-grid basis rows selected by a sign/threshold
/// rule. Rows from an upper-hemisphere grid stand for antipodal pairs of the
/// full grid, hence the weight 2 there.
inline Eigen::VectorXd augmented_solve(const Eigen::MatrixXd& a0, const Eigen::VectorXd& b,
                                       const Eigen::MatrixXd& dense_rows,
                                       const std::vector<int>& rows, double weight,
                                       const char* who) {
    const int ls = static_cast<int>(a0.rows());
    Eigen::MatrixXd a = a0;
    if (!rows.empty()) {
        Eigen::MatrixXd sel(static_cast<int>(rows.size()), ls);
        for (int k = 0; k < static_cast<int>(rows.size()); ++k) sel.row(k) = dense_rows.row(rows[k]);
        a.selfadjointView<Eigen::Lower>().rankUpdate(sel.transpose(), weight);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(a.selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success)
        throw std::runtime_error(std::string(who) + ": rank-deficient augmented system; densify the grid");
    return llt.solve(b);
}

inline double antipodal_weight(const SphericalGrid& grid) {
    return grid.hemisphere == Hemisphere::Upper ? 2.0 : 1.0;
}

} // namespace detail

/// Step 3 of BJS: evaluate the estimate on the dense grid, collect the
/// negatively valued points, and solve the least-squares system that stacks
/// the data rows over zero-targets at those points. Only negative values are
/// suppressed.
inline ShCoefficients sharpen_one_step(const ShCoefficients& f_hat, const Eigen::VectorXd& y,
                                       const ShBasisMatrix& basis_super, const RMatrix& r_super,
                                       const SphericalGrid& dense, const FitConfig& cfg) {
    cfg.validate();
    require(basis_super.l_max == cfg.l_max_super && r_super.l_max == cfg.l_max_super,
            "sharpen_one_step: super basis/R level mismatch");
    const int ls = sh_coeff_count(cfg.l_max_super);
    const ShCoefficients padded = pad_coefficients(f_hat, cfg.l_max_super);
    const ShBasisMatrix dense_basis = eval_sh_basis(dense.directions, cfg.l_max_super);
    const Eigen::VectorXd field = dense_basis.values * padded.values;

    std::vector<int> neg;
    for (int i = 0; i < field.size(); ++i)
        if (field[i] < 0.0) neg.push_back(i);
    require(static_cast<int>(y.size()) + static_cast<int>(neg.size()) >= ls,
            "sharpen_one_step: augmented system has fewer rows than unknowns");

    const Eigen::MatrixXd phi_sr = basis_super.values * r_super.diag.asDiagonal();
    const Eigen::MatrixXd a0 = phi_sr.transpose() * phi_sr;
    const Eigen::VectorXd b = phi_sr.transpose() * y;
    ShCoefficients out;
    out.l_max = cfg.l_max_super;
    out.values = detail::augmented_solve(a0, b, dense_basis.values, neg,
                                         detail::antipodal_weight(dense), "sharpen_one_step");
    return out;
}

/// Convenience overload building the super-level design from the kernel.
inline ShCoefficients sharpen_one_step(const ShCoefficients& f_hat, const Eigen::VectorXd& y,
                                       const ResponseKernel& kernel,
                                       const std::vector<Direction>& gradient_directions,
                                       const SphericalGrid& dense, const FitConfig& cfg) {
    const ShBasisMatrix basis_super = eval_sh_basis(gradient_directions, cfg.l_max_super);
    const RMatrix r_super = build_r_matrix(kernel, cfg.l_max_super);
    return sharpen_one_step(f_hat, y, basis_super, r_super, dense, cfg);
}

struct ScsdResult {
    ShCoefficients f;
    bool converged = false;
    int iterations = 0;
};

namespace detail {

inline ScsdResult super_csd_core(const ShCoefficients& f0, const Eigen::MatrixXd& a0,
                                 const Eigen::VectorXd& b, const Eigen::MatrixXd& dense_rows,
                                 double antipodal_weight, const FitConfig& cfg) {
    // filter step: keep levels through 4, zero everything above
    ShCoefficients f = pad_coefficients(f0, cfg.l_max_super);
    const int keep = sh_coeff_count(std::min(4, cfg.l_max_super));
    f.values.tail(f.values.size() - keep).setZero();

    const double weight = cfg.scsd_lambda * antipodal_weight;
    ScsdResult result;
    std::vector<int> prev_mask{-1};
    for (int it = 0; it < cfg.scsd_max_iters; ++it) {
        const Eigen::VectorXd field = dense_rows * f.values;
        const double tau = cfg.scsd_tau_relative ? cfg.scsd_tau * field.mean() : cfg.scsd_tau;
        std::vector<int> mask;
        for (int i = 0; i < field.size(); ++i)
            if (field[i] <= tau) mask.push_back(i);
        if (mask == prev_mask) {
            result.converged = true;
            break;
        }
        f.values = augmented_solve(a0, b, dense_rows, mask, weight, "super_csd");
        prev_mask = std::move(mask);
        result.iterations = it + 1;
    }
    result.f = std::move(f);
    return result;
}

} // namespace detail

/// superCSD: filter the initial estimate (levels above 4 zeroed in the super
/// representation), then iterate penalized least squares with the mask of
/// dense-grid points at or below tau until the mask stabilizes.
inline ScsdResult super_csd(const ShCoefficients& f0, const Eigen::VectorXd& y,
                            const ShBasisMatrix& basis_super, const RMatrix& r_super,
                            const SphericalGrid& dense, const FitConfig& cfg) {
    cfg.validate();
    require(basis_super.l_max == cfg.l_max_super && r_super.l_max == cfg.l_max_super,
            "super_csd: super basis/R level mismatch");
    const ShBasisMatrix dense_basis = eval_sh_basis(dense.directions, cfg.l_max_super);
    const Eigen::MatrixXd phi_sr = basis_super.values * r_super.diag.asDiagonal();
    return detail::super_csd_core(f0, phi_sr.transpose() * phi_sr, phi_sr.transpose() * y,
                                  dense_basis.values, detail::antipodal_weight(dense), cfg);
}

/// Full BJS pipeline: transform, blockwise shrink, one-step sharpening.
inline ShCoefficients bjs_estimate(const Eigen::VectorXd& y, const ShBasisMatrix& basis,
                                   const RMatrix& r, const ShBasisMatrix& basis_super,
                                   const RMatrix& r_super, const SphericalGrid& dense,
                                   const FitConfig& cfg) {
    const TransformedObservations t = bjs_transform(y, basis, r);
    const ShCoefficients shrunk = bjs_shrink(t, cfg);
    return sharpen_one_step(shrunk, y, basis_super, r_super, dense, cfg);
}

} // namespace fod
