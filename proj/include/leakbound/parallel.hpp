#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace leakbound {

inline std::size_t resolve_threads(std::size_t requested) noexcept
{
    if (requested > 0)
        return requested;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs fn(chunk) for every chunk in [0, n_chunks) on up to `threads`
/// workers. Chunks are handed out dynamically; callers store per-chunk
/// results and reduce them in chunk order afterwards.
template <class Fn>
void for_each_chunk(std::size_t n_chunks, std::size_t threads, Fn&& fn)
{
    threads = std::min(resolve_threads(threads), n_chunks);
    if (threads <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            fn(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        try {
            for (std::size_t c = next++; c < n_chunks; c = next++)
                fn(c);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure)
                failure = std::current_exception();
            next = n_chunks;
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i)
        pool.emplace_back(worker);
    pool.clear();
    if (failure)
        std::rethrow_exception(failure);
}

}  // namespace leakbound
