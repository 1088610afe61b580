#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace recomb {

/// One step of the splitmix64 generator; advances `state` and returns the
/// mixed output. Used only to derive decorrelated seeds, never as the
/// simulation generator itself.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed for run `run_index` of an experiment seeded with `seed`: runs draw
/// from independent streams instead of sharing one generator.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t run_index) {
    std::uint64_t state = seed + run_index * 0x9E3779B97F4A7C15ULL;
    return splitmix64(state);
}

/// Deterministic random stream: a standard-specified mt19937_64 engine with
/// hand-pinned variate mappings. The standard distribution classes are
/// implementation-defined, so they are avoided; with the mappings below a
/// seeded run reproduces bit for bit on any conforming toolchain.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
    RandomStream(std::uint64_t seed, std::uint64_t run_index)
        : engine_(derive_stream_seed(seed, run_index)) {}

    std::uint64_t next_raw() { return engine_(); }

    /// Uniform on [0, 1): the top 53 bits of one draw.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on {0, ..., n - 1} via floor(uniform * n). The floor bias is
    /// O(n / 2^53), irrelevant at the sizes used here.
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("uniform_index: empty range");
        const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    /// Exponential with the given rate, by inversion.
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    /// Uniform sample from the probability simplex of dimension n (flat
    /// Dirichlet): normalized iid unit exponentials.
    std::vector<double> dirichlet_flat(std::size_t n) {
        if (n == 0) throw std::invalid_argument("dirichlet_flat: empty simplex");
        std::vector<double> w(n);
        double total = 0.0;
        for (double& v : w) {
            v = exponential(1.0);
            total += v;
        }
        if (total <= 0.0) { // all draws hit the u = 0 corner; retry once
            return dirichlet_flat(n);
        }
        const double inv = 1.0 / total;
        for (double& v : w) v *= inv;
        return w;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace recomb
