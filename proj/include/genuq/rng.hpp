#pragma once

#include <cstdint>
#include <vector>

#include <random>

namespace genuq {

// Deterministic random stream keyed by (seed, stream_id). Every stochastic
// choice in the pipeline draws from a stream whose id is derived from its
// role (trajectory index, trial index, epoch, ...), so results do not depend
// on scheduling or worker count.
//
// All draws consume a fixed number of engine outputs: uniform() one,
// normal() two (Box-Muller without caching), uniform_int() at least one
// (rejection sampling).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform();

    // Uniform on [a, b).
    double uniform(double a, double b);

    // Standard normal via Box-Muller; no second-value caching so the
    // consumption pattern is exactly two engine outputs per call.
    double normal();

    // Uniform integer in [0, n). Rejection sampling, unbiased. n >= 1.
    std::uint64_t uniform_int(std::uint64_t n);

    // Fisher-Yates permutation of {0, ..., n-1}.
    std::vector<std::size_t> permutation(std::size_t n);

    // k distinct indices from {0, ..., n-1} via partial Fisher-Yates;
    // returned in draw order.
    std::vector<std::size_t> subset(std::size_t n, std::size_t k);

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

// Deterministic seed derivation for nested components (e.g. per-trial
// training seeds). splitmix64 finalizer over the pair.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace genuq
