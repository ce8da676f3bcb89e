#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lsmrum/config.hpp"
#include "lsmrum/stats.hpp"
#include "lsmrum/types.hpp"

namespace lsmrum::bench {

enum class Strategy { Eager, Validation, Um, UmF, UmM, UmFm, UmBv, UmFmbv };

inline constexpr Strategy kAllStrategies[] = {
    Strategy::Eager, Strategy::Validation, Strategy::Um,   Strategy::UmF,
    Strategy::UmM,   Strategy::UmFm,       Strategy::UmBv, Strategy::UmFmbv};

const char* strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(const std::string& s);
CleaningFlags strategy_flags(Strategy s);

// Uniform surface the harness drives; one implementation per strategy.
class IndexDriver {
public:
    virtual ~IndexDriver() = default;
    virtual void insert(ObjectId oid, Location loc) = 0;
    virtual void remove(ObjectId oid, const std::optional<Location>& old_loc) = 0;
    virtual void update(ObjectId oid, const std::optional<Location>& old_loc, Location new_loc) = 0;
    virtual std::vector<ObjectRecord> query(const Rect& window) = 0;
    virtual EngineStats stats() const = 0;
};

std::unique_ptr<IndexDriver> make_driver(Strategy s, const EngineConfig& cfg);

struct BenchReport {
    std::string strategy;
    int threads = 1;
    std::size_t ops = 0;
    std::size_t queries = 0;
    double update_seconds = 0.0;
    // Cumulative ingest seconds at each 10% of processed ops.
    std::vector<double> update_seconds_by_decile;
    // Mean query latency (ms) within each decile of processed ops.
    std::vector<double> query_ms_by_decile;
    std::uint64_t flush_count = 0;
    std::uint64_t merge_count = 0;
    std::size_t um_size_max = 0;
    double throughput_objs_per_ms = 0.0;
    std::uint64_t verified_queries = 0;
};

class VerificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Replays I/D/U ops against one shared index from `threads` workers; ops are
// partitioned by oid so per-object order is preserved. Query ops are skipped
// (run_mixed handles those). Timing excludes parsing and setup.
BenchReport run_ingest(const std::vector<WorkloadOp>& ops, Strategy strategy, int threads,
                       const EngineConfig& cfg);

// Single-threaded replay of a mixed update/query trace. With verify on,
// every query answer is checked against the replay oracle; the first
// mismatch throws VerificationError with a diff.
BenchReport run_mixed(const std::vector<WorkloadOp>& ops, Strategy strategy,
                      const EngineConfig& cfg, bool verify);

// Flattened metric view shared by both report formats.
std::vector<std::pair<std::string, double>> report_fields(const BenchReport& r);

void write_report_json(const std::filesystem::path& path, const std::vector<BenchReport>& reports);
void write_report_csv(const std::filesystem::path& path, const std::vector<BenchReport>& reports);

// Flat key=value config file covering the EngineConfig fields.
EngineConfig parse_config_file(const std::filesystem::path& path);

}  // namespace lsmrum::bench
