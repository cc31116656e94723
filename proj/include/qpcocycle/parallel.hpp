#pragma once

// Thread-count control, a deterministic parallel_for, and summation helpers.
// Results never depend on the number of threads: workers write into
// per-index slots and reductions run afterwards in a fixed order.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace qpc {

namespace detail {
inline std::atomic<unsigned>& thread_setting()
{
    static std::atomic<unsigned> threads{0};
    return threads;
}
} // namespace detail

/// 0 selects std::thread::hardware_concurrency().
inline void set_thread_count(unsigned n) { detail::thread_setting().store(n); }

inline unsigned thread_count()
{
    unsigned n = detail::thread_setting().load();
    if (n == 0)
        n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

template <class Fn>
void parallel_for(std::size_t count, Fn&& fn)
{
    const std::size_t workers = std::min<std::size_t>(thread_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    constexpr std::size_t chunk = 16;
    auto body = [&] {
        for (;;) {
            const std::size_t start = next.fetch_add(chunk);
            if (start >= count)
                return;
            const std::size_t stop = std::min(count, start + chunk);
            for (std::size_t i = start; i < stop; ++i)
                fn(i);
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w)
        pool.emplace_back(body);
    body();
}

/// Pairwise (cascade) summation with a fixed split order.
inline double pairwise_sum(std::span<const double> values)
{
    constexpr std::size_t leaf = 32;
    if (values.size() <= leaf) {
        double s = 0.0;
        for (double v : values)
            s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

/// Correctly rounded sum of finite doubles (Shewchuk's partials algorithm).
inline double exact_sum(std::span<const double> values)
{
    std::vector<double> partials;
    for (double x : values) {
        std::size_t used = 0;
        for (double y : partials) {
            if (std::abs(x) < std::abs(y))
                std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0)
                partials[used++] = lo;
            x = hi;
        }
        partials.resize(used);
        partials.push_back(x);
    }
    double hi = 0.0;
    if (partials.empty())
        return hi;
    std::size_t n = partials.size();
    hi = partials[--n];
    double lo = 0.0;
    while (n > 0) {
        const double x = hi;
        const double y = partials[--n];
        hi = x + y;
        const double yr = hi - x;
        lo = y - yr;
        if (lo != 0.0)
            break;
    }
    // Half-way rounding correction.
    if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
        const double y = lo * 2.0;
        const double x = hi + y;
        if (y == x - hi)
            hi = x;
    }
    return hi;
}

} // namespace qpc
