#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace qmarg {

//! Calls f(i) for i in [0, n), split into contiguous chunks over workers.
template<class F>
void parallel_for(long long n, int workers, F&& f) {
    workers = static_cast<int>(std::max(1LL, std::min<long long>(workers, n)));
    if (workers <= 1) {
        for (long long i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(workers);
    for (int w = 0; w < workers; ++w) {
        long long b = n * w / workers, e = n * (w + 1) / workers;
        pool.emplace_back([&, w, b, e] {
            try {
                for (long long i = b; i < e; ++i) f(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace qmarg
