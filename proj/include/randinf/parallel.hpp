#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace randinf {

/* Run fn(0) ... fn(count-1) across up to `workers` threads (0 = hardware
 * concurrency). Tasks pull indices from a shared counter, so results must be
 * written to per-index slots; with that discipline the outcome is identical
 * for any worker count. The first exception thrown by a task is rethrown. */
inline void parallel_for(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    unsigned w = workers ? workers : std::thread::hardware_concurrency();
    if (w == 0) w = 1;
    if (w > count) w = static_cast<unsigned>(count);

    if (w == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(w);
    for (unsigned i = 0; i < w; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

} // namespace randinf
