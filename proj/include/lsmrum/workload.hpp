#pragma once

#include <cstdint>
#include <vector>

#include "lsmrum/config.hpp"
#include "lsmrum/types.hpp"

namespace lsmrum::bench {

// Synthetic workload families modeled on the usual update-intensive traces:
//   checkin - each object revisits a few favorite spots (periodic, spread out)
//   moving  - objects drift by small Gaussian steps (spatially local updates)
//   pickup  - every event lands at a fresh uniform-random point
enum class WorkloadKind { Checkin, Moving, Pickup };

const char* workload_kind_name(WorkloadKind k);
WorkloadKind parse_workload_kind(const std::string& s);

struct GenParams {
    WorkloadKind kind = WorkloadKind::Moving;
    std::size_t n_ops = 100000;
    std::size_t n_oids = 100;
    std::uint64_t seed = 1;
    // Fraction of ops emitted as range queries (interleaved).
    double query_frac = 0.0;
    // Fraction of ops that permanently retire an object. An object's op
    // sequence is always insert, updates, then at most one final delete.
    double delete_frac = 0.0;
    // Query windows are squares with area uniform in (0, window_area_frac]
    // of the world box area.
    double window_area_frac = 0.0001;
    Rect world{{-180.0, -90.0}, {180.0, 90.0}};
};

// Deterministic for a given parameter set; first op per oid is an insert.
std::vector<WorkloadOp> gen_workload(const GenParams& params);

}  // namespace lsmrum::bench
