#include "dwrom/perf.hpp"

namespace dwrom::perf {

namespace {
thread_local double g_seconds[2] = {0.0, 0.0};
}

void reset() {
    g_seconds[0] = 0.0;
    g_seconds[1] = 0.0;
}

double seconds(Category c) { return g_seconds[static_cast<int>(c)]; }

ScopedTimer::ScopedTimer(Category c) : cat_(c), start_(std::chrono::steady_clock::now()) {}

ScopedTimer::~ScopedTimer() {
    const auto end = std::chrono::steady_clock::now();
    g_seconds[static_cast<int>(cat_)] +=
        std::chrono::duration<double>(end - start_).count();
}

}  // namespace dwrom::perf
