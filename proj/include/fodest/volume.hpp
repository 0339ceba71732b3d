#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <zlib.h>

#include <json.hpp>

#include "fodest/common.hpp"

namespace fod {

/// A 4-D acquisition: `frames` scalar volumes over a common 3-D grid plus a
/// boolean mask. Frame f, voxel (x,y,z) lives at frame-major, x-fastest
/// order.
struct VolumeStack {
    std::array<int, 3> dims{0, 0, 0};
    std::array<double, 3> voxel_size{1.0, 1.0, 1.0};
    int frame_count = 0;
    std::vector<float> data;      // frame_count * nz * ny * nx
    std::vector<std::uint8_t> mask; // nz * ny * nx or empty

    std::size_t voxels() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }

    std::size_t linear_index(int x, int y, int z) const {
        return (static_cast<std::size_t>(z) * dims[1] + y) * dims[0] + x;
    }

    float value(int frame, std::size_t voxel) const {
        return data[static_cast<std::size_t>(frame) * voxels() + voxel];
    }

    bool in_mask(std::size_t voxel) const { return mask.empty() || mask[voxel] != 0; }

    void validate() const {
        require(dims[0] > 0 && dims[1] > 0 && dims[2] > 0, "VolumeStack: bad dims");
        require(frame_count >= 1, "VolumeStack: no frames");
        require(data.size() == voxels() * frame_count, "VolumeStack: data size mismatch");
        require(mask.empty() || mask.size() == voxels(), "VolumeStack: mask size mismatch");
    }
};

namespace detail {

inline std::vector<char> read_entire_gz(const std::string& path) {
    gzFile f = gzopen(path.c_str(), "rb");
    require(f != nullptr, "cannot open " + path);
    std::vector<char> out;
    char buf[1 << 16];
    int n;
    while ((n = gzread(f, buf, sizeof buf)) > 0) out.insert(out.end(), buf, buf + n);
    const bool ok = n == 0;
    gzclose(f);
    require(ok, "error while reading " + path);
    return out;
}

template <typename T>
T byteswap_value(T v) {
    char* p = reinterpret_cast<char*>(&v);
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(p[i], p[sizeof(T) - 1 - i]);
    return v;
}

template <typename T>
T read_at(const std::vector<char>& buf, std::size_t offset, bool swap) {
    T v;
    std::memcpy(&v, buf.data() + offset, sizeof(T));
    return swap ? byteswap_value(v) : v;
}

} // namespace detail

/// Raw volume pair: little-endian float32 array plus a JSON sidecar
/// {"dims": [nx,ny,nz], "voxel_size": [dx,dy,dz], "frame_count": n}.
/// The array is ordered frame-major with x fastest.
inline VolumeStack read_raw_volume(const std::string& data_path, const std::string& sidecar_path) {
    std::ifstream side(sidecar_path);
    require(side.good(), "cannot open " + sidecar_path);
    nlohmann::json j;
    side >> j;
    VolumeStack v;
    const auto dims = j.at("dims").get<std::vector<int>>();
    require(dims.size() == 3, "raw sidecar: dims must have 3 entries");
    v.dims = {dims[0], dims[1], dims[2]};
    if (j.contains("voxel_size")) {
        const auto vs = j.at("voxel_size").get<std::vector<double>>();
        require(vs.size() == 3, "raw sidecar: voxel_size must have 3 entries");
        v.voxel_size = {vs[0], vs[1], vs[2]};
    }
    v.frame_count = j.at("frame_count").get<int>();

    const auto buf = detail::read_entire_gz(data_path);
    const std::size_t expect = v.voxels() * v.frame_count * 4;
    require(buf.size() == expect, "raw volume: expected " + std::to_string(expect) + " bytes, got " +
                                      std::to_string(buf.size()));
    v.data.resize(v.voxels() * v.frame_count);
    std::memcpy(v.data.data(), buf.data(), buf.size());
    v.validate();
    return v;
}

inline void write_raw_volume(const std::string& data_path, const std::string& sidecar_path,
                             const VolumeStack& v) {
    v.validate();
    nlohmann::json j;
    j["dims"] = {v.dims[0], v.dims[1], v.dims[2]};
    j["voxel_size"] = {v.voxel_size[0], v.voxel_size[1], v.voxel_size[2]};
    j["frame_count"] = v.frame_count;
    std::ofstream side(sidecar_path);
    require(side.good(), "cannot open " + sidecar_path + " for writing");
    side << j.dump(2) << "\n";
    std::ofstream out(data_path, std::ios::binary);
    require(out.good(), "cannot open " + data_path + " for writing");
    out.write(reinterpret_cast<const char*>(v.data.data()), v.data.size() * 4);
}

/// Minimal NIfTI-1 reader: 348-byte header, data types int16/float32/float64,
/// transparent gzip, byte-swapped files handled. Applies scl_slope/scl_inter
/// when set. Writing NIfTI is out of scope.
inline VolumeStack read_nifti(const std::string& path) {
    const auto buf = detail::read_entire_gz(path);
    require(buf.size() >= 352, "NIfTI: file shorter than header");

    std::int32_t sizeof_hdr = detail::read_at<std::int32_t>(buf, 0, false);
    const bool swap = sizeof_hdr != 348;
    if (swap)
        require(detail::byteswap_value(sizeof_hdr) == 348, "NIfTI: bad sizeof_hdr");
    require(buf[344] == 'n' && (buf[345] == '+' || buf[345] == 'i') && buf[346] == '1',
            "NIfTI: bad magic");

    const auto dim_at = [&](int i) { return detail::read_at<std::int16_t>(buf, 40 + 2 * i, swap); };
    const int ndim = dim_at(0);
    require(ndim >= 3 && ndim <= 7, "NIfTI: unsupported dim[0]");
    VolumeStack v;
    v.dims = {dim_at(1), dim_at(2), dim_at(3)};
    v.frame_count = ndim >= 4 ? std::max<int>(1, dim_at(4)) : 1;
    for (int i = 0; i < 3; ++i)
        v.voxel_size[i] = detail::read_at<float>(buf, 76 + 4 * (i + 1), swap);

    const std::int16_t datatype = detail::read_at<std::int16_t>(buf, 70, swap);
    const float vox_offset_f = detail::read_at<float>(buf, 108, swap);
    const std::size_t offset = static_cast<std::size_t>(vox_offset_f);
    require(offset >= 348 && offset <= buf.size(), "NIfTI: bad vox_offset");
    float slope = detail::read_at<float>(buf, 112, swap);
    const float inter = detail::read_at<float>(buf, 116, swap);
    if (slope == 0.0f) slope = 1.0f;

    const std::size_t count = v.voxels() * v.frame_count;
    v.data.resize(count);
    auto load = [&](auto type_tag, std::size_t elem_size) {
        using T = decltype(type_tag);
        require(buf.size() >= offset + count * elem_size, "NIfTI: truncated data");
        for (std::size_t i = 0; i < count; ++i) {
            const T raw = detail::read_at<T>(buf, offset + i * elem_size, swap);
            v.data[i] = static_cast<float>(raw) * slope + inter;
        }
    };
    switch (datatype) {
        case 4: load(std::int16_t{}, 2); break;   // DT_INT16
        case 16: load(float{}, 4); break;         // DT_FLOAT32
        case 64: load(double{}, 8); break;        // DT_FLOAT64
        default:
            throw std::invalid_argument("NIfTI: unsupported datatype " + std::to_string(datatype));
    }
    v.validate();
    return v;
}

/// Reads either a raw+sidecar pair (path.json next to the data file) or a
/// NIfTI file, keyed by extension.
inline VolumeStack read_volume_auto(const std::string& path) {
    auto ends_with = [&](const char* suffix) {
        const std::string s(suffix);
        return path.size() >= s.size() && path.compare(path.size() - s.size(), s.size(), s) == 0;
    };
    if (ends_with(".nii") || ends_with(".nii.gz")) return read_nifti(path);
    if (ends_with(".raw") || ends_with(".f32")) return read_raw_volume(path, path + ".json");
    throw std::invalid_argument("unrecognized volume format: " + path);
}

/// Nonzero voxels of a single-frame volume become the mask.
inline std::vector<std::uint8_t> volume_to_mask(const VolumeStack& v) {
    require(v.frame_count == 1, "mask volume must have a single frame");
    std::vector<std::uint8_t> mask(v.voxels());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = v.data[i] != 0.0f ? 1 : 0;
    return mask;
}

} // namespace fod
