#include "delaybench/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace delaybench {

std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t s = base ^ (salt * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL);
    std::uint64_t a = splitmix64_next(s);
    std::uint64_t b = splitmix64_next(s);
    return a ^ (b << 1);
}

std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}
}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) {
        word = splitmix64_next(s);
    }
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform01_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

std::uint64_t Rng::uniform_int(std::uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("uniform_int: bound must be positive");
    }
    // Rejection to remove modulo bias.
    const std::uint64_t threshold = (0ULL - bound) % bound;
    for (;;) {
        std::uint64_t r = next_u64();
        if (r >= threshold) {
            return r % bound;
        }
    }
}

bool Rng::bernoulli(double p) {
    return uniform01() < p;
}

double Rng::normal(double mean, double stddev) {
    const double u1 = uniform01_pos();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * radius * std::cos(2.0 * M_PI * u2);
}

std::uint64_t Rng::poisson(double mean) {
    if (!(mean >= 0.0)) {
        throw std::invalid_argument("poisson: mean must be non-negative");
    }
    if (mean == 0.0) {
        return 0;
    }
    if (mean < 60.0) {
        return poisson_inversion(mean);
    }
    return poisson_ptrs(mean);
}

std::uint64_t Rng::poisson_inversion(double mean) {
    const double limit = std::exp(-mean);
    double product = uniform01();
    std::uint64_t count = 0;
    while (product > limit) {
        ++count;
        product *= uniform01();
    }
    return count;
}

// Hormann (1993), "The transformed rejection method for generating
// Poisson random variables", algorithm PTRS.
std::uint64_t Rng::poisson_ptrs(double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = uniform01() - 0.5;
        const double v = uniform01_pos();
        const double us = 0.5 - std::abs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (kf < 0.0) {
            continue;
        }
        if (us >= 0.07 && v <= vr) {
            return static_cast<std::uint64_t>(kf);
        }
        if (us < 0.013 && v > us) {
            continue;
        }
        const double k = kf;
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
            k * loglam - mean - std::lgamma(k + 1.0)) {
            return static_cast<std::uint64_t>(kf);
        }
    }
}

const std::vector<std::string_view>& RunSeed::labels() {
    static const std::vector<std::string_view> kLabels = {
        "generator", "delay", "chunking", "learner", "tuner"};
    return kLabels;
}

std::uint64_t RunSeed::substream_seed(std::string_view label) const {
    bool known = false;
    for (auto l : labels()) {
        if (l == label) {
            known = true;
            break;
        }
    }
    if (!known) {
        throw std::invalid_argument("unknown substream label: " + std::string(label));
    }
    return derive_seed(master, hash_label(label));
}

Rng RunSeed::substream(std::string_view label) const {
    return Rng(substream_seed(label));
}

}  // namespace delaybench
