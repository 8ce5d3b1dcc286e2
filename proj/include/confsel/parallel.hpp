#pragma once

namespace confsel {

/// Number of OpenMP workers kernels may use: the OpenMP default, capped by the
/// CONFSEL_THREADS environment variable and by set_worker_limit().
int worker_count();

/// Process-wide cap (0 clears it). Used by tests and the benchmark to compare
/// serial and parallel execution.
void set_worker_limit(int limit);

/// Restores the previous limit on destruction.
class ScopedWorkerLimit {
public:
    explicit ScopedWorkerLimit(int limit);
    ~ScopedWorkerLimit();
    ScopedWorkerLimit(const ScopedWorkerLimit&) = delete;
    ScopedWorkerLimit& operator=(const ScopedWorkerLimit&) = delete;

private:
    int previous_;
};

} // namespace confsel
