#include "fc/parallel.hpp"

#include <atomic>
#include <stdexcept>

namespace fc {

namespace {
std::atomic<int> g_threads{0};  // 0 = pick from hardware
}

void set_thread_count(int n) {
    if (n < 0) throw std::invalid_argument("Thread count must be >= 0.");
    g_threads.store(n);
}

int thread_count() {
    int n = g_threads.load();
    if (n > 0) return n;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int64_t begin, int64_t end, const std::function<void(int64_t)>& body) {
    const int64_t total = end - begin;
    if (total <= 0) return;
    const int workers = static_cast<int>(std::min<int64_t>(thread_count(), total));
    if (workers <= 1) {
        for (int64_t i = begin; i < end; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex error_lock;
    const int64_t chunk = (total + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int64_t lo = begin + w * chunk;
        const int64_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (int64_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(error_lock);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fc
