#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace delaybench {

// One splitmix64 step; also used to derive child seeds from a base seed.
std::uint64_t splitmix64_next(std::uint64_t& state);

// Combines a base seed with a salt into an independent-looking seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

// FNV-1a hash of a label, for naming derived streams.
std::uint64_t hash_label(std::string_view label);

// Deterministic xoshiro256** generator with the distributions the
// benchmark needs. All sampling is implemented here so that results do
// not depend on the standard library's distribution internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform on [0, 1).
    double uniform01();
    // Uniform on (0, 1], safe as a log argument.
    double uniform01_pos();
    double uniform(double lo, double hi);
    // Uniform integer in [0, bound), bound > 0.
    std::uint64_t uniform_int(std::uint64_t bound);
    bool bernoulli(double p);
    double normal(double mean = 0.0, double stddev = 1.0);

    // Exact Poisson sampling. Inversion for small means, transformed
    // rejection (Hormann's PTRS, a normal-approximation envelope) for
    // large ones, so draws with mean 70,000 are O(1).
    std::uint64_t poisson(double mean);

  private:
    std::array<std::uint64_t, 4> state_;

    std::uint64_t poisson_inversion(double mean);
    std::uint64_t poisson_ptrs(double mean);
};

// Master seed plus named sub-streams. Each (master, label) pair yields
// the same stream on every run; distinct labels give unrelated streams.
struct RunSeed {
    std::uint64_t master = 0;

    static const std::vector<std::string_view>& labels();

    // Throws std::invalid_argument for labels not in labels().
    std::uint64_t substream_seed(std::string_view label) const;
    Rng substream(std::string_view label) const;
};

}  // namespace delaybench
