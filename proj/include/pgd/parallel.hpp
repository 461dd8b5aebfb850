#ifndef PGD_PARALLEL_HPP
#define PGD_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pgd {

// Maps fn over [0, n) on up to `workers` threads and returns results in index
// order, so the reduction downstream is independent of scheduling. Each task
// must be a pure function of its index.
template <typename Fn>
auto parallel_map(int n, int workers, Fn fn) -> std::vector<decltype(fn(0))> {
    using T = decltype(fn(0));
    std::vector<T> out(static_cast<std::size_t>(n > 0 ? n : 0));
    if (n <= 0) return out;
    if (workers <= 1 || n == 1) {
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
        return out;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                out[static_cast<std::size_t>(i)] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    const int count = std::min(workers, n);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

inline int default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

} // namespace pgd

#endif
