#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fod {

inline constexpr double kFourPi = 4.0 * 3.14159265358979323846;
inline constexpr double kPi = 3.14159265358979323846;

/// Counter-based random stream: any (seed, stream, counter) triple maps to the
/// same value regardless of call order, so replicates and voxels can draw from
/// disjoint streams with no shared state.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix(mix(seed) + 0x9E3779B97F4A7C15ull * (stream + 1))) {}

    std::uint64_t bits(std::uint64_t counter) const { return mix(key_ + counter); }

    // uniform in the open interval (0,1); safe as a log() argument
    double uniform(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    // Box-Muller pair from counters (2i, 2i+1)
    void gaussian_pair(std::uint64_t i, double& g1, double& g2) const {
        const double u1 = uniform(2 * i);
        const double u2 = uniform(2 * i + 1);
        const double r = std::sqrt(-2.0 * std::log(u1));
        g1 = r * std::cos(2.0 * kPi * u2);
        g2 = r * std::sin(2.0 * kPi * u2);
    }

    double gaussian(std::uint64_t i) const {
        double g1, g2;
        gaussian_pair(i, g1, g2);
        return g1;
    }

private:
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    std::uint64_t key_;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

} // namespace fod
