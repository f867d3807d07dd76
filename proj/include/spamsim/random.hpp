#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace spamsim {

/// Counter-addressed random stream. Each (seed, stream, counter) triple maps
/// to an independent xoshiro256** state, so shot i of experiment k draws the
/// same numbers no matter which worker evaluates it or in what order.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on [0, 1).
    double uniform();
    double normal();
    double exponential(double mean);

private:
    std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Stable 64-bit tag for a stream name (FNV-1a).
constexpr std::uint64_t stream_tag(std::string_view name) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace spamsim
