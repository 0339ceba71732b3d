#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "fodest/common.hpp"
#include "fodest/estimators.hpp"
#include "fodest/peaks.hpp"

#include <json.hpp>

namespace fod {

inline std::string format_double(double v, const char* fmt = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

// --- coefficient records -----------------------------------------------

struct CoefficientRecord {
    std::uint64_t voxel_id = 0;
    Eigen::VectorXd values;
};

inline void write_coefficients_csv(std::ostream& out, const std::string& estimator_tag, int l_max,
                                   const std::vector<CoefficientRecord>& records) {
    out << "voxel,estimator,l_max";
    for (int c = 0; c < sh_coeff_count(l_max); ++c) out << ",c" << c;
    out << "\n";
    for (const auto& rec : records) {
        out << rec.voxel_id << ',' << estimator_tag << ',' << l_max;
        for (int c = 0; c < rec.values.size(); ++c) out << ',' << format_double(rec.values[c], "%.17g");
        out << "\n";
    }
}

/// Little-endian binary coefficient file:
///   magic "FODC" | u16 version (= 1) | u16 l_max | records
/// each record: u64 voxel id, then L doubles (L from l_max).
inline void write_coefficients_fodc(std::ostream& out, int l_max,
                                    const std::vector<CoefficientRecord>& records) {
    const char magic[4] = {'F', 'O', 'D', 'C'};
    out.write(magic, 4);
    const std::uint16_t version = 1;
    const std::uint16_t lm = static_cast<std::uint16_t>(l_max);
    out.write(reinterpret_cast<const char*>(&version), 2);
    out.write(reinterpret_cast<const char*>(&lm), 2);
    const int L = sh_coeff_count(l_max);
    for (const auto& rec : records) {
        require(rec.values.size() == L, "write_coefficients_fodc: record length mismatch");
        out.write(reinterpret_cast<const char*>(&rec.voxel_id), 8);
        out.write(reinterpret_cast<const char*>(rec.values.data()), 8 * L);
    }
}

struct FodcFile {
    int l_max = 0;
    std::vector<CoefficientRecord> records;
};

inline FodcFile read_coefficients_fodc(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    require(in.good() && std::memcmp(magic, "FODC", 4) == 0, "FODC: bad magic");
    std::uint16_t version = 0, lm = 0;
    in.read(reinterpret_cast<char*>(&version), 2);
    in.read(reinterpret_cast<char*>(&lm), 2);
    require(version == 1, "FODC: unsupported version");
    FodcFile file;
    file.l_max = lm;
    const int L = sh_coeff_count(file.l_max);
    for (;;) {
        CoefficientRecord rec;
        in.read(reinterpret_cast<char*>(&rec.voxel_id), 8);
        if (!in.good()) break;
        rec.values.resize(L);
        in.read(reinterpret_cast<char*>(rec.values.data()), 8 * L);
        require(in.good(), "FODC: truncated record");
        file.records.push_back(std::move(rec));
    }
    return file;
}

// --- peak records --------------------------------------------------------

struct PeakRecord {
    std::uint64_t voxel_id = 0;
    std::vector<Peak> peaks;
};

inline void write_peaks_csv(std::ostream& out, const std::vector<PeakRecord>& records) {
    out << "voxel,rank,x,y,z,value\n";
    for (const auto& rec : records)
        for (const auto& p : rec.peaks)
            out << rec.voxel_id << ',' << p.prominence_rank << ',' << format_double(p.direction.x, "%.17g")
                << ',' << format_double(p.direction.y, "%.17g") << ','
                << format_double(p.direction.z, "%.17g") << ',' << format_double(p.value, "%.17g")
                << "\n";
}

// --- run manifest ---------------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct RunManifest {
    std::vector<std::string> input_paths;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string estimator_tag;
    std::string software_version;
    double wall_seconds = 0.0;
    std::map<std::string, std::uint64_t> status_counts;
};

inline nlohmann::json manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["input_paths"] = m.input_paths;
    j["config_hash"] = m.config_hash;
    j["seed"] = m.seed;
    j["estimator"] = m.estimator_tag;
    j["software_version"] = m.software_version;
    j["wall_seconds"] = m.wall_seconds;
    j["status_counts"] = m.status_counts;
    return j;
}

/// Deterministic hash of a canonicalized (key-sorted) config document.
inline std::string config_hash_hex(const nlohmann::json& config) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config.dump())));
    return buf;
}

// --- response kernel JSON --------------------------------------------------

inline nlohmann::json kernel_to_json(const ResponseKernel& k) {
    nlohmann::json j;
    j["lambda_major"] = k.lambda_major;
    j["lambda_minor"] = k.lambda_minor;
    j["b"] = k.b;
    j["s0"] = k.s0;
    j["l_max"] = k.l_max();
    j["r"] = k.r;
    return j;
}

inline ResponseKernel kernel_from_json(const nlohmann::json& j) {
    ResponseKernel k;
    k.lambda_major = j.at("lambda_major").get<double>();
    k.lambda_minor = j.at("lambda_minor").get<double>();
    k.b = j.at("b").get<double>();
    k.s0 = j.at("s0").get<double>();
    k.r = j.at("r").get<std::vector<double>>();
    require(static_cast<int>(k.r.size()) == j.at("l_max").get<int>() / 2 + 1,
            "kernel_from_json: r length does not match l_max");
    return k;
}

inline ResponseKernel load_kernel(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open " + path);
    nlohmann::json j;
    in >> j;
    return kernel_from_json(j);
}

inline void save_kernel(const std::string& path, const ResponseKernel& k) {
    std::ofstream out(path);
    require(out.good(), "cannot open " + path + " for writing");
    out << kernel_to_json(k).dump(2) << "\n";
}

} // namespace fod
