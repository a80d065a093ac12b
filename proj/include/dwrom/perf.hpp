#pragma once

#include <chrono>

namespace dwrom::perf {

// Wall-time accounting split into the two categories the cost studies track.
// Thread-local so concurrent simulations do not share counters.
enum class Category { LinearSolve, Flux };

void reset();
double seconds(Category c);

class ScopedTimer {
  public:
    explicit ScopedTimer(Category c);
    ~ScopedTimer();
    ScopedTimer(const ScopedTimer&) = delete;
    ScopedTimer& operator=(const ScopedTimer&) = delete;

  private:
    Category cat_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace dwrom::perf
