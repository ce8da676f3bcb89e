#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>

#include "lsmrum/curve.hpp"
#include "lsmrum/types.hpp"

namespace lsmrum {

// Byte cost charged against the memory budget per buffered record.
inline constexpr std::size_t kRecordByteEstimate = 40;

struct CleaningFlags {
    bool flush = false;     // F: drop obsolete records while ordering a flush
    bool merge = false;     // M: drop obsolete records during merge scans
    bool buffered = false;  // B: per-leaf update-counter cleaning
    bool vacuum = false;    // V: round-robin leaf-cursor cleaning

    static CleaningFlags none() { return {}; }
    static CleaningFlags all() { return {true, true, true, true}; }
};

struct EngineConfig {
    std::size_t memory_budget_bytes = 4u << 20;
    std::size_t page_size_bytes = 2048;
    std::size_t merge_threshold = 5;
    std::size_t node_capacity = 32;
    std::uint32_t buffered_threshold = 4;
    std::uint32_t vacuum_threshold = 8;
    CleaningFlags cleaning;
    CurveKind curve = CurveKind::Hilbert;
    Rect world{{-180.0, -90.0}, {180.0, 90.0}};
    // 0 means 16 x memory_budget_bytes.
    std::size_t max_mergeable_bytes = 0;
    // Vacuum skips a leaf cleaned within the last vacuum_threshold updates.
    bool vacuum_skip_recent = true;
    // Empty: the engine creates (and later removes) a private temp dir.
    std::filesystem::path data_dir;

    std::size_t effective_max_mergeable() const {
        return max_mergeable_bytes ? max_mergeable_bytes : 16 * memory_budget_bytes;
    }

    void validate() const {
        if (memory_budget_bytes < kRecordByteEstimate)
            throw std::invalid_argument("memory_budget_bytes below one record");
        if (merge_threshold < 1) throw std::invalid_argument("merge_threshold must be >= 1");
        if (buffered_threshold < 1) throw std::invalid_argument("buffered_threshold must be >= 1");
        if (vacuum_threshold < 1) throw std::invalid_argument("vacuum_threshold must be >= 1");
        if (node_capacity < 2) throw std::invalid_argument("node_capacity must be >= 2");
        if (!(world.min.x < world.max.x && world.min.y < world.max.y))
            throw std::invalid_argument("world box must have positive extent");
    }
};

}  // namespace lsmrum
