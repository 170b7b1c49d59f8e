#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace penh {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (b * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    return splitmix64(s);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace detail

/// Operation tags keep streams of different computations disjoint under one master seed.
enum class StreamTag : std::uint64_t {
    rejection = 1,
    spike_power = 2,
    calibration = 3,
    mixture_moment = 4,
    embedding_large = 5,
    embedding_small = 6,
    lan = 7,
    demo = 8,
    halfspace = 9,
    design = 10,
    sampling_check = 11,
};

/// xoshiro256** keyed by (master seed, tag, index). A stream is a pure function
/// of its key, so any partition of replications across workers draws the
/// same numbers.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t master_seed, StreamTag tag, std::uint64_t index) {
        std::uint64_t key = detail::mix_key(detail::mix_key(master_seed, static_cast<std::uint64_t>(tag)), index);
        for (auto& word : state_) word = detail::splitmix64(key);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    double normal() { return normal_(*this); }

    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::array<std::uint64_t, 4> state_{};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace penh
