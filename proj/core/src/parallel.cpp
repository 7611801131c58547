#include "gconv/parallel.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <thread>
#include <vector>

namespace gconv {

int worker_count() {
    if (const char* env = std::getenv("GCONV_THREADS")) {
        int parsed = 0;
        auto res = std::from_chars(env, env + std::char_traits<char>::length(env), parsed);
        if (res.ec == std::errc() && parsed >= 1) return parsed > 256 ? 256 : parsed;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const int workers = worker_count();
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> cursor{0};
    auto run = [&] {
        for (;;) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const std::size_t spawn = std::min<std::size_t>(static_cast<std::size_t>(workers) - 1, n - 1);
    pool.reserve(spawn);
    for (std::size_t w = 0; w < spawn; ++w) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
}

}  // namespace gconv
