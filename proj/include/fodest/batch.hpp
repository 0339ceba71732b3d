#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "fodest/engine.hpp"
#include "fodest/experiment.hpp"
#include "fodest/io.hpp"
#include "fodest/peaks.hpp"
#include "fodest/volume.hpp"

namespace fod {

enum class VoxelStatus { Ok, BadB0, FitFailed };

inline const char* voxel_status_name(VoxelStatus s) {
    switch (s) {
        case VoxelStatus::Ok: return "ok";
        case VoxelStatus::BadB0: return "bad_b0";
        case VoxelStatus::FitFailed: return "fit_failed";
    }
    return "?";
}

struct BatchOptions {
    EstimatorKind estimator = EstimatorKind::Bjs;
    FitConfig fit;
    PeakOptions peaks;
    int threads = 1;
    int dense_subdivision = 4;
    std::optional<ResponseKernel> kernel; // estimated from the data when absent
    double fa_threshold = 0.8;
    double minor_ratio_threshold = 1.5;
};

struct BatchResult {
    std::vector<CoefficientRecord> coefficients;
    std::vector<PeakRecord> peaks;
    std::map<std::string, std::uint64_t> status_counts;
    ResponseKernel kernel;
    int coefficients_l_max = 0;
    double wall_seconds = 0.0;
};

namespace detail {

inline Eigen::VectorXd voxel_signals(const VolumeStack& volume, std::size_t voxel,
                                     const std::vector<int>& frame_indices) {
    Eigen::VectorXd s(static_cast<int>(frame_indices.size()));
    for (int k = 0; k < s.size(); ++k) s[k] = volume.value(frame_indices[k], voxel);
    return s;
}

} // namespace detail

/// Batch voxelwise fit over the masked voxels of a volume: per-voxel mean-b0
/// normalization, response estimation from high-FA voxels unless a kernel is
/// supplied, then the selected estimator plus peak detection in parallel.
/// Per-voxel failures are recorded with status codes and never abort the run;
/// outputs are ordered by voxel index regardless of thread schedule.
inline BatchResult run_batch_fit(const VolumeStack& volume, const GradientTable& gradients,
                                 const BatchOptions& options) {
    volume.validate();
    require(gradients.size() == volume.frame_count,
            "batch: gradient table length (" + std::to_string(gradients.size()) +
                ") does not match frame count (" + std::to_string(volume.frame_count) + ")");
    const auto diff_idx = gradients.diffusion_indices();
    const auto b0_idx = gradients.b0_indices();
    require(!b0_idx.empty(), "batch: no b0 frames present for normalization");

    const auto t_start = std::chrono::steady_clock::now();

    std::vector<std::size_t> voxels;
    for (std::size_t i = 0; i < volume.voxels(); ++i)
        if (volume.in_mask(i)) voxels.push_back(i);

    BatchResult result;
    for (const char* s : {"ok", "bad_b0", "fit_failed"}) result.status_counts[s] = 0;

    GradientTable diff_table;
    diff_table.directions = gradients.diffusion_directions();
    diff_table.bvals.assign(diff_table.directions.size(), gradients.shell_b());

    // response: supplied or estimated from voxels that pass the single-fiber filters
    if (options.kernel.has_value()) {
        result.kernel = *options.kernel;
        require(result.kernel.l_max() >= options.fit.l_max_super,
                "batch: supplied kernel has too few response levels");
    } else {
        std::vector<ResponseVoxel> rvoxels;
        for (std::size_t v : voxels) {
            ResponseVoxel rv;
            double s0 = 0.0;
            for (int f : b0_idx) s0 += volume.value(f, v);
            s0 /= static_cast<double>(b0_idx.size());
            if (s0 <= 0.0) continue;
            rv.signals = detail::voxel_signals(volume, v, diff_idx);
            rv.s0 = s0;
            rvoxels.push_back(std::move(rv));
        }
        result.kernel = estimate_response(rvoxels, diff_table, options.fit.l_max_super,
                                          options.fa_threshold, options.minor_ratio_threshold);
    }

    if (voxels.empty()) {
        result.coefficients_l_max = options.estimator == EstimatorKind::Shridge
                                        ? options.fit.l_max
                                        : options.fit.l_max_super;
        result.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        return result;
    }

    const FitEngine engine(diff_table.directions, result.kernel, options.fit,
                           options.dense_subdivision);
    const SphericalGrid peak_grid =
        icosphere_grid(options.dense_subdivision, GridMode::Vertices, Hemisphere::Full);
    const ShBasisMatrix peak_basis = eval_sh_basis(peak_grid.directions, options.fit.l_max_super);

    struct Slot {
        VoxelStatus status = VoxelStatus::FitFailed;
        Eigen::VectorXd coeffs;
        std::vector<Peak> peaks;
    };
    std::vector<Slot> slots(voxels.size());

    parallel_for(static_cast<int>(voxels.size()), options.threads, [&](int k) {
        Slot& slot = slots[k];
        const std::size_t v = voxels[k];
        double s0 = 0.0;
        for (int f : b0_idx) s0 += volume.value(f, v);
        s0 /= static_cast<double>(b0_idx.size());
        if (!(s0 > 0.0)) {
            slot.status = VoxelStatus::BadB0;
            return;
        }
        const Eigen::VectorXd y = detail::voxel_signals(volume, v, diff_idx) / s0;
        try {
            ShCoefficients f;
            switch (options.estimator) {
                case EstimatorKind::Bjs: f = engine.bjs(y); break;
                case EstimatorKind::Scsd: f = engine.scsd(y).f; break;
                case EstimatorKind::Shridge: f = engine.shridge_bic(y).second; break;
            }
            const Eigen::VectorXd field =
                peak_basis.values * pad_coefficients(f, options.fit.l_max_super).values;
            slot.peaks = detect_peaks_on_field({field, &peak_grid}, options.peaks);
            slot.coeffs = std::move(f.values);
            slot.status = VoxelStatus::Ok;
        } catch (const std::exception&) {
            slot.status = VoxelStatus::FitFailed;
        }
    });

    result.coefficients_l_max = options.estimator == EstimatorKind::Shridge
                                    ? options.fit.l_max
                                    : options.fit.l_max_super;
    for (std::size_t k = 0; k < voxels.size(); ++k) {
        const Slot& slot = slots[k];
        ++result.status_counts[voxel_status_name(slot.status)];
        if (slot.status != VoxelStatus::Ok) continue;
        result.coefficients.push_back({voxels[k], slot.coeffs});
        result.peaks.push_back({voxels[k], slot.peaks});
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

} // namespace fod
