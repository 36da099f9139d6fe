#include "genuq/rng.hpp"

#include <cmath>
#include <numbers>

#include "genuq/errors.hpp"

namespace genuq {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed & 0xffffffffu),
        static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream_id & 0xffffffffu),
        static_cast<std::uint32_t>(stream_id >> 32),
    };
    eng_.seed(seq);
}

double RngStream::uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double a, double b) {
    return a + (b - a) * uniform();
}

double RngStream::normal() {
    // u1 in (0, 1] keeps the log finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
    if (n == 0) throw config_error("uniform_int: n must be >= 1");
    // Rejection on the top of the 64-bit range removes modulo bias.
    std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    std::uint64_t x;
    do {
        x = eng_();
    } while (x > limit);
    return x % n;
}

std::vector<std::size_t> RngStream::permutation(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    shuffle(idx);
    return idx;
}

std::vector<std::size_t> RngStream::subset(std::size_t n, std::size_t k) {
    if (k > n) throw config_error("subset: k exceeds n");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(uniform_int(n - i));
        std::swap(idx[i], idx[j]);
        out[i] = idx[i];
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace genuq
