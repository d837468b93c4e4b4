#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace uqkit {

/// splitmix64 finalizer; also the seeding stream for Rng.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Seed of child stream `index` under `seed`. Distinct indices give distinct seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// xoshiro256** seeded through splitmix64.
///
/// Normal variates use Box-Muller; each pair is consumed cos-branch first,
/// then the cached sin-branch.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    /// Independent stream for (seed, index), e.g. one per ensemble member or fold.
    static Rng child(std::uint64_t seed, std::uint64_t index) noexcept {
        return Rng(derive_seed(seed, index));
    }

    std::uint64_t next_u64() noexcept;
    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() noexcept;
    double standard_normal() noexcept;
    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept;

    /// Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::uint64_t s_[4];
    std::optional<double> cached_normal_;
};

} // namespace uqkit
