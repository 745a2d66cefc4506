#ifndef SIGVAR_PARALLEL_HPP
#define SIGVAR_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sigvar {

/// Number of workers for a requested job count; non-positive means one per core.
inline int resolve_jobs(int jobs)
{
    if (jobs > 0)
        return jobs;
    const unsigned cores = std::thread::hardware_concurrency();
    return cores == 0 ? 1 : static_cast<int>(cores);
}

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Each index is
/// processed exactly once; callers write results into slot i so output never
/// depends on scheduling. The exception from the lowest failing index is rethrown.
template<class Body>
void parallel_for(std::size_t count, int jobs, Body &&body)
{
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(resolve_jobs(jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::size_t error_index = count;

    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back(worker);
    for (auto &t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace sigvar

#endif // SIGVAR_PARALLEL_HPP
