#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fodest/estimators.hpp"
#include "fodest/gradients.hpp"
#include "fodest/icosphere.hpp"
#include "fodest/response.hpp"
#include "fodest/signal.hpp"

namespace fod {

/// Immutable per-design precomputation shared by all voxel fits: basis and
/// gram factorizations, per-block covariance eigenvalue norms, BIC degrees
/// of freedom per ridge lambda, and the dense-grid machinery for sharpening
/// and superCSD. Construction happens once; every per-voxel method is const
/// and safe for unsynchronized concurrent use.
class FitEngine {
public:
    FitEngine(std::vector<Direction> gradient_directions, const ResponseKernel& kernel,
              const FitConfig& cfg, int dense_subdivision = 4)
        : cfg_(cfg), directions_(std::move(gradient_directions)) {
        cfg_.validate();
        require(kernel.l_max() >= cfg_.l_max_super,
                "FitEngine: kernel response levels must reach l_max_super");
        n_ = static_cast<int>(directions_.size());

        basis_ = eval_sh_basis(directions_, cfg_.l_max);
        r_ = build_r_matrix(kernel, cfg_.l_max);
        detail::check_response_levels(r_, cfg_.l_max);
        const int L = basis_.coeff_count();
        require(n_ > L, "FitEngine: need more gradients than basis functions");

        gram_ = basis_.values.transpose() * basis_.values;
        gram_llt_.compute(gram_);
        require(gram_llt_.info() == Eigen::Success, "FitEngine: Phi'Phi is singular");
        gram_inv_ = gram_llt_.solve(Eigen::MatrixXd::Identity(L, L));
        r_inv_ = r_.diag.cwiseInverse();
        v_ = r_inv_.asDiagonal() * gram_inv_ * r_inv_.asDiagonal();

        // per-block eigenvalue norms of V (depend on the design only)
        for (int l = cfg_.l0 + 2; l <= cfg_.l_max; l += 2) {
            const int start = sh_level_offset(l), len = 2 * l + 1;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v_.block(start, start, len, len),
                                                              Eigen::EigenvaluesOnly);
            const Eigen::VectorXd lam = es.eigenvalues();
            shrink_levels_.push_back({l, lam.cwiseAbs().sum(), lam.norm(), lam.cwiseAbs().maxCoeff(),
                                      cfg_.c * std::log(2.0 * l + 1.0)});
        }

        // ridge pieces; df(lambda) is y-independent and cached here
        phi_r_ = basis_.values * r_.diag.asDiagonal();
        rgr_ = phi_r_.transpose() * phi_r_;
        penalty_ = ridge_penalty_diag(cfg_.l_max);
        df_.resize(cfg_.ridge_grid.size());
        for (std::size_t i = 0; i < cfg_.ridge_grid.size(); ++i) {
            Eigen::MatrixXd a = rgr_;
            a.diagonal() += cfg_.ridge_grid[i] * penalty_;
            df_[i] = Eigen::LLT<Eigen::MatrixXd>(a).solve(rgr_).trace();
        }

        // super-resolution pieces on an upper-hemisphere dense grid
        basis_super_ = eval_sh_basis(directions_, cfg_.l_max_super);
        r_super_ = build_r_matrix(kernel, cfg_.l_max_super);
        dense_up_ = icosphere_grid(dense_subdivision, GridMode::Vertices, Hemisphere::Upper);
        dense_up_basis_ = eval_sh_basis(dense_up_.directions, cfg_.l_max_super);
        phi_sr_ = basis_super_.values * r_super_.diag.asDiagonal();
        a0_ = phi_sr_.transpose() * phi_sr_;
        gd2_ = 2.0 * (dense_up_basis_.values.transpose() * dense_up_basis_.values);
    }

    int n_gradients() const { return n_; }
    const FitConfig& config() const { return cfg_; }
    const std::vector<Direction>& gradient_directions() const { return directions_; }
    const ShBasisMatrix& basis() const { return basis_; }
    const ShBasisMatrix& basis_super() const { return basis_super_; }
    const RMatrix& r_matrix() const { return r_; }
    const RMatrix& r_matrix_super() const { return r_super_; }
    const Eigen::MatrixXd& v_matrix() const { return v_; }
    const SphericalGrid& dense_upper_grid() const { return dense_up_; }

    double noise_variance(const Eigen::VectorXd& y) const {
        const Eigen::VectorXd w = basis_.values.transpose() * y;
        const Eigen::VectorXd u = gram_llt_.solve(w);
        const double rss = y.squaredNorm() - w.dot(u);
        return std::max(rss, 0.0) / (n_ - basis_.coeff_count());
    }

    TransformedObservations transform(const Eigen::VectorXd& y) const {
        TransformedObservations t;
        t.l_max = cfg_.l_max;
        const Eigen::VectorXd w = basis_.values.transpose() * y;
        const Eigen::VectorXd u = gram_llt_.solve(w);
        t.z = r_inv_.asDiagonal() * u;
        t.v = v_;
        t.sigma2_hat = std::max(y.squaredNorm() - w.dot(u), 0.0) / (n_ - basis_.coeff_count());
        return t;
    }

    ShCoefficients shrink(const TransformedObservations& t) const {
        ShCoefficients out;
        out.l_max = t.l_max;
        out.values = t.z;
        for (const auto& lvl : shrink_levels_) {
            const int start = sh_level_offset(lvl.l), len = 2 * lvl.l + 1;
            const double factor =
                detail::shrink_factor(lvl.lam1, lvl.lam2, lvl.laminf, lvl.t, t.sigma2_hat,
                                      t.z.segment(start, len).squaredNorm());
            out.values.segment(start, len) *= factor;
        }
        return out;
    }

    /// One-step sharpening against the cached upper-hemisphere grid. The
    /// normal equations use whichever of the negative set or its complement
    /// is smaller.
    ShCoefficients sharpen(const ShCoefficients& f_hat, const Eigen::VectorXd& y) const {
        const int ls = sh_coeff_count(cfg_.l_max_super);
        Eigen::VectorXd padded = Eigen::VectorXd::Zero(ls);
        padded.head(f_hat.values.size()) = f_hat.values;
        const Eigen::VectorXd field = dense_up_basis_.values * padded;

        const int nd = static_cast<int>(field.size());
        int n_neg = 0;
        for (int i = 0; i < nd; ++i)
            if (field[i] < 0.0) ++n_neg;
        require(static_cast<int>(y.size()) + 2 * n_neg >= ls,
                "sharpen: augmented system has fewer rows than unknowns");

        const bool use_neg = n_neg <= nd - n_neg;
        Eigen::MatrixXd sel(use_neg ? n_neg : nd - n_neg, ls);
        int k = 0;
        for (int i = 0; i < nd; ++i)
            if ((field[i] < 0.0) == use_neg) sel.row(k++) = dense_up_basis_.values.row(i);

        Eigen::MatrixXd a = use_neg ? a0_ : Eigen::MatrixXd(a0_ + gd2_);
        if (k > 0) a.selfadjointView<Eigen::Lower>().rankUpdate(sel.transpose(), use_neg ? 2.0 : -2.0);
        Eigen::LLT<Eigen::MatrixXd> llt(a.selfadjointView<Eigen::Lower>());
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("sharpen: rank-deficient augmented system");
        ShCoefficients out;
        out.l_max = cfg_.l_max_super;
        out.values = llt.solve(phi_sr_.transpose() * y);
        return out;
    }

    ShCoefficients bjs(const Eigen::VectorXd& y) const { return sharpen(shrink(transform(y)), y); }

    /// Ridge solve at one lambda; a fresh SPD factorization per call.
    ShCoefficients shridge(const Eigen::VectorXd& y, double lambda) const {
        Eigen::MatrixXd a = rgr_;
        a.diagonal() += lambda * penalty_;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("shridge: singular penalized system");
        ShCoefficients f;
        f.l_max = cfg_.l_max;
        f.values = llt.solve(phi_r_.transpose() * y);
        return f;
    }

    /// BIC grid search over the configured lambda grid, one penalized solve
    /// per grid value; the cached df(lambda) supplies the model complexity term.
    std::pair<double, ShCoefficients> shridge_bic(const Eigen::VectorXd& y) const {
        const Eigen::VectorXd b = phi_r_.transpose() * y;
        const double ynorm2 = y.squaredNorm();
        const double logn = std::log(static_cast<double>(n_));
        double best_bic = std::numeric_limits<double>::infinity();
        double best_lambda = cfg_.ridge_grid.front();
        Eigen::VectorXd best_f;
        Eigen::MatrixXd a(rgr_.rows(), rgr_.cols());
        for (std::size_t i = 0; i < cfg_.ridge_grid.size(); ++i) {
            a = rgr_;
            a.diagonal() += cfg_.ridge_grid[i] * penalty_;
            Eigen::LLT<Eigen::MatrixXd> llt(a);
            if (llt.info() != Eigen::Success)
                throw std::runtime_error("shridge_bic: singular penalized system");
            const Eigen::VectorXd f = llt.solve(b);
            const double rss = std::max(ynorm2 - 2.0 * b.dot(f) + f.dot(rgr_ * f), 1e-300);
            const double bic = n_ * std::log(rss / n_) + df_[i] * logn;
            if (bic < best_bic) {
                best_bic = bic;
                best_lambda = cfg_.ridge_grid[i];
                best_f = f;
            }
        }
        ShCoefficients f;
        f.l_max = cfg_.l_max;
        f.values = std::move(best_f);
        return {best_lambda, std::move(f)};
    }

    ScsdResult scsd(const Eigen::VectorXd& y) const {
        const ShCoefficients f0 = shridge_bic(y).second;
        return scsd_from(f0, y);
    }

    ScsdResult scsd_from(const ShCoefficients& f0, const Eigen::VectorXd& y) const {
        return detail::super_csd_core(f0, a0_, phi_sr_.transpose() * y, dense_up_basis_.values, 2.0,
                                      cfg_);
    }

private:
    struct ShrinkLevel {
        int l;
        double lam1, lam2, laminf, t;
    };

    FitConfig cfg_;
    std::vector<Direction> directions_;
    int n_ = 0;

    ShBasisMatrix basis_, basis_super_;
    RMatrix r_, r_super_;
    Eigen::MatrixXd gram_, gram_inv_, v_;
    Eigen::LLT<Eigen::MatrixXd> gram_llt_;
    Eigen::VectorXd r_inv_;
    std::vector<ShrinkLevel> shrink_levels_;

    Eigen::MatrixXd phi_r_, rgr_;
    Eigen::VectorXd penalty_;
    std::vector<double> df_;

    SphericalGrid dense_up_;
    ShBasisMatrix dense_up_basis_;
    Eigen::MatrixXd phi_sr_, a0_, gd2_;
};

} // namespace fod
