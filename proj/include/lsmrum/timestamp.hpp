#pragma once

#include <atomic>
#include <cstdlib>
#include <limits>

#include "lsmrum/types.hpp"

namespace lsmrum {

// Global per-engine timestamp counter. Incremented by 1 for each insert,
// delete, or update; queries do not consume ticks. First tick returns 1.
class TimestampClock {
public:
    Timestamp tick() {
        Timestamp ts = next_.fetch_add(1, std::memory_order_relaxed);
        if (ts == std::numeric_limits<Timestamp>::max()) std::abort();  // overflow
        return ts;
    }

    // Last value handed out; 0 if none yet.
    Timestamp current() const { return next_.load(std::memory_order_relaxed) - 1; }

private:
    std::atomic<Timestamp> next_{1};
};

}  // namespace lsmrum
