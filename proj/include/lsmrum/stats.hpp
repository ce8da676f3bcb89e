#pragma once

#include <cstdint>
#include <vector>

namespace lsmrum {

struct EngineStats {
    std::uint64_t flush_count = 0;
    std::uint64_t merge_count = 0;
    std::size_t um_size_now = 0;
    std::size_t um_size_max = 0;
    std::size_t component_count = 0;
    std::vector<std::size_t> component_record_counts;
    std::size_t memory_records = 0;

    // Obsolete-record removals attributed to each cleaning path.
    std::uint64_t cleaned_buffered = 0;
    std::uint64_t cleaned_vacuum = 0;
    std::uint64_t cleaned_flush = 0;
    std::uint64_t cleaned_merge = 0;
    std::uint64_t cleaned_forced = 0;

    std::uint64_t query_records_scanned = 0;
    std::uint64_t validation_anomalies = 0;
};

}  // namespace lsmrum
