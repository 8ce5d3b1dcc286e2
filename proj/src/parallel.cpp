#include "confsel/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace confsel {

namespace {

std::atomic<int> g_limit{0};

int env_limit() {
    const char* raw = std::getenv("CONFSEL_THREADS");
    if (raw == nullptr) return 0;
    int value = 0;
    const auto [ptr, ec] = std::from_chars(raw, raw + std::strlen(raw), value);
    if (ec != std::errc{} || value < 1) return 0;
    return value;
}

} // namespace

int worker_count() {
#ifdef _OPENMP
    int count = omp_get_max_threads();
#else
    int count = 1;
#endif
    if (const int env = env_limit(); env > 0) count = std::min(count, env);
    if (const int limit = g_limit.load(); limit > 0) count = std::min(count, limit);
    return std::max(count, 1);
}

void set_worker_limit(int limit) { g_limit.store(std::max(limit, 0)); }

ScopedWorkerLimit::ScopedWorkerLimit(int limit) : previous_(g_limit.load()) {
    set_worker_limit(limit);
}

ScopedWorkerLimit::~ScopedWorkerLimit() { set_worker_limit(previous_); }

} // namespace confsel
