// Deterministic data-parallel helper: fixed chunking over an index range,
// results land in pre-sized slots, so output never depends on thread count.

#ifndef SNPL_PARALLEL_HPP
#define SNPL_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace snpl {

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (n == 0)
        return;
    unsigned want = threads > 0 ? static_cast<unsigned>(threads)
                                : std::thread::hardware_concurrency();
    if (want <= 1 || n < 2 * want) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    const std::size_t per = (n + want - 1) / want;
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (unsigned t = 0; t < want; ++t) {
        const std::size_t begin = t * per;
        if (begin >= n)
            break;
        const std::size_t end = std::min(n, begin + per);
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i)
                    fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace snpl

#endif // SNPL_PARALLEL_HPP
