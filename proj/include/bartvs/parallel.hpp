#ifndef BARTVS_PARALLEL_HPP
#define BARTVS_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bartvs {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Work is claimed in
/// index order; the exception of the lowest failing index is rethrown after
/// all workers finish.
template <typename Fn>
void parallel_for(int count, int jobs, Fn&& fn)
{
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex mu;
    int failed_index = count;
    std::exception_ptr failure;
    auto worker = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min(jobs, count);
    pool.reserve(n);
    for (int t = 0; t < n; ++t)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace bartvs

#endif // BARTVS_PARALLEL_HPP
