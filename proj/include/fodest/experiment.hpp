#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "fodest/engine.hpp"
#include "fodest/peaks.hpp"
#include "fodest/signal.hpp"

namespace fod {

enum class EstimatorKind { Bjs, Scsd, Shridge };

inline std::string estimator_name(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::Bjs: return "BJS";
        case EstimatorKind::Scsd: return "SCSD";
        case EstimatorKind::Shridge: return "SHridge";
    }
    return "?";
}

inline EstimatorKind estimator_from_name(const std::string& s) {
    if (s == "BJS" || s == "bjs") return EstimatorKind::Bjs;
    if (s == "SCSD" || s == "scsd") return EstimatorKind::Scsd;
    if (s == "SHridge" || s == "shridge") return EstimatorKind::Shridge;
    throw std::invalid_argument("unknown estimator: " + s);
}

/// Deterministic static-stride fan-out; exceptions from workers propagate.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// Per-setting, per-estimator accuracy summary.
struct MetricsReport {
    double detection_rate = 0.0;
    double mean_sep = std::numeric_limits<double>::quiet_NaN();
    double bias_sep = std::numeric_limits<double>::quiet_NaN();
    double bias_sep_se = std::numeric_limits<double>::quiet_NaN();
    double rmsae = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> bias_sep_pairs; // one per truth pair when 3+ fibers
    int n_correct = 0;
    int replicates = 0;
    double wall_time_per_voxel = 0.0; // seconds, fitting only
};

/// Fully resolved synthetic setting: geometry, design, kernel and constants.
struct SyntheticSetting {
    FiberConfiguration fibers;
    std::vector<Direction> gradient_directions;
    ResponseKernel kernel;
    FitConfig fit;
    PeakOptions peaks;
    double snr = 50.0;
    int replicates = 100;
    std::uint64_t seed = 1;
    int dense_subdivision = 4;
};

/// Two fibers separated by `separation_deg` in the x-z plane, symmetric about
/// z; three fibers on the cone realizing the common pairwise angle.
inline FiberConfiguration make_fiber_configuration(int n_fibers, double separation_deg) {
    require(n_fibers >= 1 && n_fibers <= 3, "make_fiber_configuration: 1-3 fibers supported");
    std::vector<Direction> dirs;
    if (n_fibers == 1) {
        dirs = {{0, 0, 1}};
    } else if (n_fibers == 2) {
        const double h = separation_deg * kPi / 180.0 / 2.0;
        dirs = {{std::sin(h), 0, std::cos(h)}, {-std::sin(h), 0, std::cos(h)}};
    } else {
        const double g = separation_deg * kPi / 180.0;
        const double ca2 = (2.0 * std::cos(g) + 1.0) / 3.0;
        require(ca2 > 0.0, "make_fiber_configuration: pairwise angle too wide for 3 fibers");
        const double ca = std::sqrt(ca2), sa = std::sqrt(1.0 - ca2);
        for (int k = 0; k < 3; ++k) {
            const double phi = 2.0 * kPi * k / 3.0;
            dirs.push_back({sa * std::cos(phi), sa * std::sin(phi), ca});
        }
    }
    return FiberConfiguration::equal_weight(std::move(dirs));
}

namespace detail {

struct ReplicateOutcome {
    bool correct = false;
    std::vector<double> angles;    // matched acute errors, one per fiber
    std::vector<double> pair_seps; // estimated separation per truth pair
    double fit_seconds = 0.0;
};

inline std::vector<std::pair<int, int>> truth_pairs(int k) {
    std::vector<std::pair<int, int>> p;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) p.emplace_back(i, j);
    return p;
}

inline MetricsReport aggregate(const std::vector<ReplicateOutcome>& outcomes,
                               const std::vector<double>& true_pair_seps) {
    MetricsReport rep;
    rep.replicates = static_cast<int>(outcomes.size());
    double sq_sum = 0.0;
    int angle_count = 0;
    const int n_pairs = static_cast<int>(true_pair_seps.size());
    std::vector<double> pair_sum(n_pairs, 0.0), pair_sq(n_pairs, 0.0);
    double total_fit = 0.0;
    for (const auto& o : outcomes) {
        total_fit += o.fit_seconds;
        if (!o.correct) continue;
        ++rep.n_correct;
        for (double a : o.angles) {
            sq_sum += a * a;
            ++angle_count;
        }
        for (int p = 0; p < n_pairs; ++p) {
            pair_sum[p] += o.pair_seps[p];
            pair_sq[p] += o.pair_seps[p] * o.pair_seps[p];
        }
    }
    rep.detection_rate = outcomes.empty() ? 0.0 : static_cast<double>(rep.n_correct) / outcomes.size();
    rep.wall_time_per_voxel = outcomes.empty() ? 0.0 : total_fit / outcomes.size();
    if (rep.n_correct > 0) {
        if (angle_count > 0) rep.rmsae = std::sqrt(sq_sum / angle_count);
        rep.bias_sep_pairs.resize(n_pairs);
        for (int p = 0; p < n_pairs; ++p)
            rep.bias_sep_pairs[p] = pair_sum[p] / rep.n_correct - true_pair_seps[p];
        if (n_pairs > 0) {
            rep.mean_sep = pair_sum[0] / rep.n_correct;
            rep.bias_sep = rep.bias_sep_pairs[0];
            const double var =
                std::max(pair_sq[0] / rep.n_correct - rep.mean_sep * rep.mean_sep, 0.0);
            rep.bias_sep_se = rep.n_correct > 1
                                  ? std::sqrt(var * rep.n_correct / (rep.n_correct - 1.0) /
                                              rep.n_correct)
                                  : 0.0;
        }
    }
    return rep;
}

} // namespace detail

/// Synthetic experiment: one shared design, per-replicate seeded Rician noise
/// (identical streams across estimators), fit / detect / match, deterministic
/// aggregation by replicate index regardless of thread schedule.
inline std::vector<std::pair<EstimatorKind, MetricsReport>> run_synthetic_experiment(
    const SyntheticSetting& setting, const std::vector<EstimatorKind>& estimators,
    int threads = 1) {
    require(!estimators.empty(), "run_synthetic_experiment: no estimators selected");
    require(setting.replicates >= 1, "run_synthetic_experiment: need at least one replicate");
    setting.fibers.validate();

    const FitEngine engine(setting.gradient_directions, setting.kernel, setting.fit,
                           setting.dense_subdivision);
    const SphericalGrid peak_grid =
        icosphere_grid(setting.dense_subdivision, GridMode::Vertices, Hemisphere::Full);
    const ShBasisMatrix peak_basis_super =
        eval_sh_basis(peak_grid.directions, setting.fit.l_max_super);

    const Eigen::VectorXd clean =
        synthesize_signal(setting.fibers, setting.kernel, setting.gradient_directions);

    const auto pairs = detail::truth_pairs(static_cast<int>(setting.fibers.directions.size()));
    std::vector<double> true_seps;
    for (auto [i, j] : pairs)
        true_seps.push_back(acute_angle_deg(setting.fibers.directions[i], setting.fibers.directions[j]));

    const int n_est = static_cast<int>(estimators.size());
    std::vector<std::vector<detail::ReplicateOutcome>> outcomes(
        n_est, std::vector<detail::ReplicateOutcome>(setting.replicates));

    parallel_for(setting.replicates, threads, [&](int rep) {
        const CounterRng rng(setting.seed, static_cast<std::uint64_t>(rep));
        const Eigen::VectorXd y = add_rician_noise(clean, setting.kernel.s0, setting.snr, rng);
        for (int e = 0; e < n_est; ++e) {
            detail::ReplicateOutcome& out = outcomes[e][rep];
            ShCoefficients f;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                switch (estimators[e]) {
                    case EstimatorKind::Bjs: f = engine.bjs(y); break;
                    case EstimatorKind::Scsd: f = engine.scsd(y).f; break;
                    case EstimatorKind::Shridge: f = engine.shridge_bic(y).second; break;
                }
            } catch (const std::exception&) {
                out.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                continue; // estimator failure counts as a detection failure
            }
            out.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

            FodField field{Eigen::VectorXd(), &peak_grid};
            if (f.l_max == setting.fit.l_max_super) {
                field.values = peak_basis_super.values * f.values;
            } else {
                const Eigen::VectorXd padded =
                    pad_coefficients(f, setting.fit.l_max_super).values;
                field.values = peak_basis_super.values * padded;
            }
            const auto peaks = detect_peaks_on_field(field, setting.peaks);
            const PeakMatch match = match_peaks(peaks, setting.fibers.directions);
            if (!match.counts_match) continue;
            out.correct = true;
            out.angles = match.angles;
            for (auto [i, j] : pairs)
                out.pair_seps.push_back(acute_angle_deg(peaks[match.assignment[i]].direction,
                                                        peaks[match.assignment[j]].direction));
        }
    });

    std::vector<std::pair<EstimatorKind, MetricsReport>> reports;
    for (int e = 0; e < n_est; ++e)
        reports.emplace_back(estimators[e], detail::aggregate(outcomes[e], true_seps));
    return reports;
}

struct BenchmarkResult {
    EstimatorKind estimator;
    int n_voxels = 0;
    int threads = 1;
    double serial_seconds = 0.0;
    double parallel_seconds = 0.0;
};

/// Wall-times each estimator over independent synthetic voxels against one
/// shared design, serial and with the requested thread count. SHridge timing
/// includes its full BIC grid search; SCSD includes the SHridge initial fit
/// plus the superCSD iterations.
inline std::vector<BenchmarkResult> benchmark_throughput(int n_voxels,
                                                         const SyntheticSetting& setting,
                                                         const std::vector<EstimatorKind>& estimators,
                                                         int threads) {
    const FitEngine engine(setting.gradient_directions, setting.kernel, setting.fit,
                           setting.dense_subdivision);
    const Eigen::VectorXd clean =
        synthesize_signal(setting.fibers, setting.kernel, setting.gradient_directions);
    std::vector<Eigen::VectorXd> voxels(n_voxels);
    for (int i = 0; i < n_voxels; ++i)
        voxels[i] = add_rician_noise(clean, setting.kernel.s0, setting.snr,
                                     CounterRng(setting.seed, static_cast<std::uint64_t>(i)));

    auto fit_one = [&](EstimatorKind kind, const Eigen::VectorXd& y) {
        switch (kind) {
            case EstimatorKind::Bjs: return engine.bjs(y).values.sum();
            case EstimatorKind::Scsd: return engine.scsd(y).f.values.sum();
            case EstimatorKind::Shridge: return engine.shridge_bic(y).second.values.sum();
        }
        return 0.0;
    };

    std::vector<BenchmarkResult> results;
    for (EstimatorKind kind : estimators) {
        BenchmarkResult r;
        r.estimator = kind;
        r.n_voxels = n_voxels;
        r.threads = threads;
        volatile double sink = 0.0;
        auto t0 = std::chrono::steady_clock::now();
        for (const auto& y : voxels) sink = fit_one(kind, y);
        r.serial_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (threads > 1) {
            t0 = std::chrono::steady_clock::now();
            parallel_for(n_voxels, threads, [&](int i) { fit_one(kind, voxels[i]); });
            r.parallel_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } else {
            r.parallel_seconds = r.serial_seconds;
        }
        (void)sink;
        results.push_back(r);
    }
    return results;
}

} // namespace fod
