#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fodest/common.hpp"

namespace fod {

/// Normalized left-minus-right streamline asymmetry, range [-2, 2].
inline double lateralization_score(long long left_count, long long right_count) {
    require(left_count >= 0 && right_count >= 0, "lateralization_score: counts must be nonnegative");
    require(left_count + right_count > 0, "lateralization_score: both counts are zero");
    const double l = static_cast<double>(left_count), r = static_cast<double>(right_count);
    return (l - r) / ((l + r) / 2.0);
}

namespace detail {

/// Regularized incomplete beta I_x(a, b), Lentz continued fraction.
inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lbeta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    const double front = std::exp(lbeta + a * std::log(x) + b * std::log1p(-x));
    const bool swap = x > (a + 1.0) / (a + b + 2.0);
    if (swap) return 1.0 - incomplete_beta(b, a, 1.0 - x);

    const double tiny = 1e-300;
    double c = 1.0, d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const double m2 = 2.0 * m;
        double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 + num * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 + num * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-14) break;
    }
    return front * h / a;
}

/// Upper-tail probability of the F(d1, d2) distribution.
inline double f_sf(double f, double d1, double d2) {
    if (!(f > 0.0)) return 1.0;
    return incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

inline double student_t_cdf(double t, double df) {
    const double ib = incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
    return t >= 0.0 ? 1.0 - ib / 2.0 : ib / 2.0;
}

/// Two-sided (1 - alpha) critical value by bisection on the CDF.
inline double student_t_quantile(double p, double df) {
    double lo = 0.0, hi = 1e3;
    for (int i = 0; i < 200; ++i) {
        const double mid = (lo + hi) / 2.0;
        (student_t_cdf(mid, df) < p ? lo : hi) = mid;
    }
    return (lo + hi) / 2.0;
}

} // namespace detail

struct AnovaTerm {
    std::string name;
    int df = 0;
    double ss = 0.0, ms = 0.0, f = 0.0, p = 1.0;
};

struct AnovaResult {
    double grand_mean = 0.0;
    AnovaTerm handedness, gender, interaction, residual;
    // 95% CI of the handedness LS-mean contrast (first level minus second)
    double contrast = 0.0, contrast_lo = 0.0, contrast_hi = 0.0;
    std::array<std::string, 2> handedness_levels, gender_levels;
    std::array<std::array<double, 2>, 2> cell_means{{{0, 0}, {0, 0}}};
    std::vector<double> residuals; // per observation, same order as the input
    std::string ss_order = "handedness,gender,interaction"; // Type I, sequential
};

/// Sequential (Type I) two-way ANOVA with interaction on a 2x2 layout,
/// fitting handedness, then gender, then their interaction.
inline AnovaResult two_way_anova(const std::vector<double>& scores,
                                 const std::vector<std::string>& handedness,
                                 const std::vector<std::string>& gender) {
    const int n = static_cast<int>(scores.size());
    require(n >= 5, "two_way_anova: need at least 5 observations");
    require(handedness.size() == scores.size() && gender.size() == scores.size(),
            "two_way_anova: column length mismatch");

    auto levels_of = [](const std::vector<std::string>& v, const char* what) {
        std::vector<std::string> lv;
        for (const auto& s : v)
            if (std::find(lv.begin(), lv.end(), s) == lv.end()) lv.push_back(s);
        require(lv.size() == 2, std::string(what) + " must have exactly two levels");
        std::sort(lv.begin(), lv.end());
        return std::array<std::string, 2>{lv[0], lv[1]};
    };
    AnovaResult res;
    res.handedness_levels = levels_of(handedness, "handedness");
    res.gender_levels = levels_of(gender, "gender");

    std::array<std::array<double, 2>, 2> cell_sum{{{0, 0}, {0, 0}}};
    std::array<std::array<int, 2>, 2> cell_n{{{0, 0}, {0, 0}}};
    std::vector<int> hi(n), gi(n);
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        hi[k] = handedness[k] == res.handedness_levels[0] ? 0 : 1;
        gi[k] = gender[k] == res.gender_levels[0] ? 0 : 1;
        cell_sum[hi[k]][gi[k]] += scores[k];
        ++cell_n[hi[k]][gi[k]];
        total += scores[k];
    }
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            require(cell_n[i][j] > 0, "two_way_anova: empty cell in the 2x2 layout");

    const double mean = total / n;
    res.grand_mean = mean;

    double sst = 0.0;
    for (double s : scores) sst += (s - mean) * (s - mean);

    // handedness-only model
    const std::array<double, 2> h_mean = {
        (cell_sum[0][0] + cell_sum[0][1]) / (cell_n[0][0] + cell_n[0][1]),
        (cell_sum[1][0] + cell_sum[1][1]) / (cell_n[1][0] + cell_n[1][1])};
    double rss1 = 0.0;
    for (int k = 0; k < n; ++k) rss1 += (scores[k] - h_mean[hi[k]]) * (scores[k] - h_mean[hi[k]]);

    // additive model, effect-coded least squares
    Eigen::Matrix3d xtx = Eigen::Matrix3d::Zero();
    Eigen::Vector3d xty = Eigen::Vector3d::Zero();
    for (int k = 0; k < n; ++k) {
        const Eigen::Vector3d row(1.0, hi[k] == 0 ? 1.0 : -1.0, gi[k] == 0 ? 1.0 : -1.0);
        xtx += row * row.transpose();
        xty += row * scores[k];
    }
    const Eigen::Vector3d beta = xtx.ldlt().solve(xty);
    double rss2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double fit = beta[0] + beta[1] * (hi[k] == 0 ? 1.0 : -1.0) +
                           beta[2] * (gi[k] == 0 ? 1.0 : -1.0);
        rss2 += (scores[k] - fit) * (scores[k] - fit);
    }

    // full (cell means) model
    std::array<std::array<double, 2>, 2> cell_mean;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) cell_mean[i][j] = cell_sum[i][j] / cell_n[i][j];
    double rss3 = 0.0;
    res.residuals.resize(n);
    for (int k = 0; k < n; ++k) {
        res.residuals[k] = scores[k] - cell_mean[hi[k]][gi[k]];
        rss3 += res.residuals[k] * res.residuals[k];
    }
    res.cell_means = cell_mean;

    const int df_res = n - 4;
    const double ms_res = rss3 / df_res;
    auto clamp0 = [](double v) { return v > 0.0 ? v : 0.0; };
    auto make_term = [&](const char* name, double ss) {
        AnovaTerm t;
        t.name = name;
        t.df = 1;
        t.ss = clamp0(ss);
        t.ms = t.ss;
        if (ms_res > 0.0) {
            t.f = t.ms / ms_res;
            t.p = detail::f_sf(t.f, 1.0, static_cast<double>(df_res));
        } else {
            t.f = t.ss == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            t.p = t.ss == 0.0 ? 1.0 : 0.0;
        }
        return t;
    };
    res.handedness = make_term("handedness", sst - rss1);
    res.gender = make_term("gender", rss1 - rss2);
    res.interaction = make_term("interaction", rss2 - rss3);
    res.residual = {"residual", df_res, clamp0(rss3), ms_res, 0.0, 1.0};

    // LS-mean contrast between handedness levels with its 95% interval
    res.contrast = (cell_mean[0][0] + cell_mean[0][1]) / 2.0 -
                   (cell_mean[1][0] + cell_mean[1][1]) / 2.0;
    double inv_n = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) inv_n += 1.0 / cell_n[i][j];
    const double se = std::sqrt(ms_res / 4.0 * inv_n);
    const double tcrit = detail::student_t_quantile(0.975, static_cast<double>(df_res));
    res.contrast_lo = res.contrast - tcrit * se;
    res.contrast_hi = res.contrast + tcrit * se;
    return res;
}

} // namespace fod
