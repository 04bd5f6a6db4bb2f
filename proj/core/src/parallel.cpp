#include "plenopose/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace plenopose {

namespace {
std::atomic<int> g_budget{0};
}

void set_thread_budget(int n) { g_budget.store(n < 0 ? 0 : n); }

int thread_budget() {
    int n = g_budget.load();
    if (n == 0) {
        unsigned hc = std::thread::hardware_concurrency();
        n = hc == 0 ? 1 : static_cast<int>(hc);
    }
    return n;
}

void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
    const size_t workers =
        std::min<size_t>(static_cast<size_t>(thread_budget()), n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const size_t chunk = (n + workers - 1) / workers;
    for (size_t w = 0; w < workers; ++w) {
        const size_t lo = w * chunk;
        const size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace plenopose
