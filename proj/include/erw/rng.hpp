#pragma once

#include <cstdint>

namespace erw {

// xoshiro256++ with SplitMix64 state expansion. Replica streams are derived
// from (base_seed, replica_index) only, so a run is reproducible regardless
// of how replicas are scheduled across workers.
class Rng {
public:
    Rng(std::uint64_t base_seed, std::uint64_t replica_index) {
        std::uint64_t x = base_seed + 0x9e3779b97f4a7c15ULL * (replica_index + 1);
        for (auto& word : state_) word = splitmix64(x);
    }

    static Rng for_replica(std::uint64_t base_seed, std::uint64_t replica_index) {
        return Rng(base_seed, replica_index);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on {0, ..., bound-1}, unbiased (Lemire with rejection).
    std::uint64_t next_bounded(std::uint64_t bound) {
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Uniform double in [0, 1) with 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::uint64_t state_[4];
};

}  // namespace erw
