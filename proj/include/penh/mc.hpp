#pragma once

// Replication engine. Replication r always draws from the stream keyed by
// (master_seed, tag, r), replications are grouped into fixed-size blocks,
// and block moments are merged in block order. Results therefore do not
// depend on how many workers ran the blocks.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "penh/errors.hpp"
#include "penh/random.hpp"
#include "penh/stats_core.hpp"

namespace penh {

struct McConfig {
    long reps = 10000;
    std::uint64_t master_seed = 0;
    int workers = 1;

    void validate() const {
        if (reps < 1) throw DomainError("reps must be >= 1");
        if (workers < 1) throw DomainError("workers must be >= 1");
    }
};

/// Running mean / second central moment (Welford, merged with Chan's update).
/// The plain sum is kept alongside so that 0/1 outcomes give an exact mean.
struct Moments {
    long count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double sum = 0.0;

    void add(double x) {
        ++count;
        sum += x;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const Moments& other) {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double total = static_cast<double>(count + other.count);
        const double delta = other.mean - mean;
        mean += delta * static_cast<double>(other.count) / total;
        m2 += other.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(other.count) / total;
        count += other.count;
        sum += other.sum;
    }

    [[nodiscard]] double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    [[nodiscard]] double standard_error() const {
        return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
    }
};

/// Monte Carlo rejection probability.
struct PowerEstimate {
    stats::Probability mean;
    double se = 0.0;
    long reps = 0;
    std::uint64_t seed = 0;

    static PowerEstimate from(const Moments& m, std::uint64_t seed) {
        return PowerEstimate{stats::Probability::clamped(m.mean), m.standard_error(), m.count, seed};
    }
};

/// |estimate - exact| <= k * SE, where SE is the larger of the empirical SE
/// and the binomial SE at the exact value (so an all-reject run can still be
/// compared against an exact probability just below one).
inline bool within_se(const PowerEstimate& est, double exact, double k) {
    const double binomial = std::sqrt(std::max(exact * (1.0 - exact), 0.0) / static_cast<double>(est.reps));
    return std::abs(est.mean.value() - exact) <= k * std::max(est.se, binomial);
}

inline constexpr long kBlockSize = 256;

/// Per-worker scratch buffers handed to replication kernels.
struct Scratch {
    std::vector<double> a;
    std::vector<double> b;
};

/// Runs `reps` replications of `kernel(rep, stream, scratch, out)`; the kernel
/// writes `channels` values to `out`. Returns one Moments per channel.
template <class Kernel>
std::vector<Moments> replicate(const McConfig& mc, StreamTag tag, std::size_t channels, Kernel&& kernel) {
    mc.validate();
    const long blocks = (mc.reps + kBlockSize - 1) / kBlockSize;
    std::vector<std::vector<Moments>> block_moments(static_cast<std::size_t>(blocks),
                                                    std::vector<Moments>(channels));
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        Scratch scratch;
        std::vector<double> out(channels);
        try {
            for (long b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) {
                auto& acc = block_moments[static_cast<std::size_t>(b)];
                const long end = std::min(mc.reps, (b + 1) * kBlockSize);
                for (long r = b * kBlockSize; r < end; ++r) {
                    RandomStream rng(mc.master_seed, tag, static_cast<std::uint64_t>(r));
                    kernel(r, rng, scratch, std::span<double>(out));
                    for (std::size_t c = 0; c < channels; ++c) acc[c].add(out[c]);
                }
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(blocks);
        }
    };

    const int workers = static_cast<int>(std::min<long>(mc.workers, blocks));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<Moments> total(channels);
    for (const auto& block : block_moments) {
        for (std::size_t c = 0; c < channels; ++c) total[c].merge(block[c]);
    }
    for (auto& m : total) {
        if (m.count > 0) m.mean = m.sum / static_cast<double>(m.count);
    }
    return total;
}

/// Runs `kernel(rep, stream, scratch) -> double` and keeps every value, in
/// replication order (used for empirical quantiles).
template <class Kernel>
std::vector<double> replicate_values(const McConfig& mc, StreamTag tag, Kernel&& kernel) {
    mc.validate();
    std::vector<double> values(static_cast<std::size_t>(mc.reps));
    const long blocks = (mc.reps + kBlockSize - 1) / kBlockSize;
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        Scratch scratch;
        try {
            for (long b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) {
                const long end = std::min(mc.reps, (b + 1) * kBlockSize);
                for (long r = b * kBlockSize; r < end; ++r) {
                    RandomStream rng(mc.master_seed, tag, static_cast<std::uint64_t>(r));
                    values[static_cast<std::size_t>(r)] = kernel(r, rng, scratch);
                }
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(blocks);
        }
    };
    const int workers = static_cast<int>(std::min<long>(mc.workers, blocks));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    return values;
}

/// Empirical quantile (inverse of the empirical CDF) of `values`; reorders them.
inline double empirical_quantile(std::vector<double>& values, double p) {
    if (values.empty()) throw DomainError("empirical_quantile: empty sample");
    const auto n = values.size();
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n) - 1;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank), values.end());
    return values[rank];
}

} // namespace penh
