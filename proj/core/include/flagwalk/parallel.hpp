#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace flagwalk {

// Monte Carlo run settings shared by every sampling routine.
struct McOptions {
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    int workers = 0;  // 0: FLAGWALK_WORKERS or hardware concurrency
};

// Trajectories are grouped in fixed-size chunks; partial results are reduced
// in chunk order, which makes every aggregate independent of the worker count.
inline constexpr std::size_t kChunkSize = 2048;

int default_workers();
int resolve_workers(int requested);

// Calls fn(chunkIndex, begin, end) for each chunk of [0, count) and returns
// the per-chunk results in chunk order.
template <class Result, class Fn>
std::vector<Result> map_chunks(std::size_t count, int workers, Fn&& fn,
                               std::size_t chunk = kChunkSize) {
    const std::size_t chunks = (count + chunk - 1) / chunk;
    std::vector<Result> results(chunks);
    if (chunks == 0) return results;
    const int nThreads =
        static_cast<int>(std::min<std::size_t>(chunks, resolve_workers(workers)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failureMutex;
    auto worker = [&] {
        while (true) {
            const std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            try {
                const std::size_t begin = c * chunk;
                const std::size_t end = std::min(count, begin + chunk);
                results[c] = fn(c, begin, end);
            } catch (...) {
                std::lock_guard lock(failureMutex);
                if (!failure) failure = std::current_exception();
                next.store(chunks);
            }
        }
    };
    if (nThreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nThreads);
        for (int t = 0; t < nThreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

// Applies fn(i) for i in [0, count) across workers; fn must write to
// disjoint locations.
template <class Fn>
void for_each_index(std::size_t count, int workers, Fn&& fn, std::size_t chunk = 16) {
    map_chunks<char>(
        count, workers,
        [&](std::size_t, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) fn(i);
            return char{0};
        },
        chunk);
}

}  // namespace flagwalk
