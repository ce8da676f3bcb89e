#include "lsmrum/bench_runner.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lsmrum/eager_index.hpp"
#include "lsmrum/engine.hpp"
#include "lsmrum/replay_oracle.hpp"
#include "lsmrum/validation_index.hpp"

namespace lsmrum::bench {

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Eager: return "eager";
        case Strategy::Validation: return "validation";
        case Strategy::Um: return "um";
        case Strategy::UmF: return "um_f";
        case Strategy::UmM: return "um_m";
        case Strategy::UmFm: return "um_fm";
        case Strategy::UmBv: return "um_bv";
        case Strategy::UmFmbv: return "um_fmbv";
    }
    return "?";
}

std::optional<Strategy> parse_strategy(const std::string& s) {
    for (Strategy st : kAllStrategies)
        if (s == strategy_name(st)) return st;
    return std::nullopt;
}

CleaningFlags strategy_flags(Strategy s) {
    CleaningFlags f;
    switch (s) {
        case Strategy::UmF: f.flush = true; break;
        case Strategy::UmM: f.merge = true; break;
        case Strategy::UmFm: f.flush = f.merge = true; break;
        case Strategy::UmBv: f.buffered = f.vacuum = true; break;
        case Strategy::UmFmbv: f = CleaningFlags::all(); break;
        default: break;
    }
    return f;
}

namespace {

class UmDriver final : public IndexDriver {
public:
    explicit UmDriver(EngineConfig cfg) : engine_(std::move(cfg)) {}
    void insert(ObjectId oid, Location loc) override { engine_.ingest_insert(oid, loc); }
    void remove(ObjectId oid, const std::optional<Location>&) override { engine_.ingest_delete(oid); }
    void update(ObjectId oid, const std::optional<Location>&, Location new_loc) override {
        engine_.ingest_update(oid, new_loc);
    }
    std::vector<ObjectRecord> query(const Rect& w) override { return engine_.range_query(w); }
    EngineStats stats() const override { return engine_.stats(); }

private:
    LsmRumTree engine_;
};

class EagerDriver final : public IndexDriver {
public:
    explicit EagerDriver(EngineConfig cfg) : index_(std::move(cfg)) {}
    void insert(ObjectId oid, Location loc) override { index_.insert(oid, loc); }
    void remove(ObjectId oid, const std::optional<Location>& old_loc) override {
        if (!old_loc) throw std::invalid_argument("eager strategy needs old locations in the trace");
        index_.remove(oid, *old_loc);
    }
    void update(ObjectId oid, const std::optional<Location>& old_loc, Location new_loc) override {
        if (!old_loc) throw std::invalid_argument("eager strategy needs old locations in the trace");
        index_.update(oid, *old_loc, new_loc);
    }
    std::vector<ObjectRecord> query(const Rect& w) override { return index_.query(w); }
    EngineStats stats() const override { return index_.stats(); }

private:
    EagerIndex index_;
};

class ValidationDriver final : public IndexDriver {
public:
    explicit ValidationDriver(EngineConfig cfg) : index_(std::move(cfg)) {}
    void insert(ObjectId oid, Location loc) override { index_.insert(oid, loc); }
    void remove(ObjectId oid, const std::optional<Location>&) override { index_.remove(oid); }
    void update(ObjectId oid, const std::optional<Location>&, Location new_loc) override {
        index_.update(oid, new_loc);
    }
    std::vector<ObjectRecord> query(const Rect& w) override { return index_.query(w); }
    EngineStats stats() const override { return index_.stats(); }

private:
    ValidationIndex index_;
};

void apply_op(IndexDriver& d, const WorkloadOp& op) {
    switch (op.kind) {
        case OpKind::Insert: d.insert(op.oid, op.loc); break;
        case OpKind::Delete: d.remove(op.oid, op.old_loc); break;
        case OpKind::Update: d.update(op.oid, op.old_loc, op.loc); break;
        case OpKind::Query: break;
    }
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string describe_mismatch(const Rect& w, const std::set<ResultKey>& expected,
                              const std::set<ResultKey>& got) {
    std::ostringstream os;
    os << "query window (" << w.min.x << "," << w.min.y << ")-(" << w.max.x << "," << w.max.y
       << "): expected " << expected.size() << " results, got " << got.size();
    int shown = 0;
    for (const auto& k : expected) {
        if (got.count(k)) continue;
        os << "\n  missing oid=" << std::get<0>(k) << " @(" << std::get<1>(k) << ","
           << std::get<2>(k) << ")";
        if (++shown == 5) break;
    }
    shown = 0;
    for (const auto& k : got) {
        if (expected.count(k)) continue;
        os << "\n  extra oid=" << std::get<0>(k) << " @(" << std::get<1>(k) << ","
           << std::get<2>(k) << ")";
        if (++shown == 5) break;
    }
    return os.str();
}

}  // namespace

std::unique_ptr<IndexDriver> make_driver(Strategy s, const EngineConfig& cfg) {
    EngineConfig c = cfg;
    c.cleaning = strategy_flags(s);
    switch (s) {
        case Strategy::Eager: return std::make_unique<EagerDriver>(std::move(c));
        case Strategy::Validation: return std::make_unique<ValidationDriver>(std::move(c));
        default: return std::make_unique<UmDriver>(std::move(c));
    }
}

BenchReport run_ingest(const std::vector<WorkloadOp>& ops, Strategy strategy, int threads,
                       const EngineConfig& cfg) {
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    auto driver = make_driver(strategy, cfg);

    // Partition up front so the clock covers only the replay. Assigning by
    // oid keeps each object's ops on one worker, in trace order.
    std::vector<std::vector<std::uint32_t>> part(static_cast<std::size_t>(threads));
    std::size_t n = 0;
    for (std::uint32_t i = 0; i < ops.size(); ++i) {
        if (ops[i].kind == OpKind::Query) continue;
        part[ops[i].oid % static_cast<std::uint64_t>(threads)].push_back(i);
        ++n;
    }

    BenchReport r;
    r.strategy = strategy_name(strategy);
    r.threads = threads;
    r.ops = n;
    r.update_seconds_by_decile.assign(10, 0.0);
    r.query_ms_by_decile.assign(10, 0.0);
    if (n == 0) return r;

    std::atomic<std::size_t> done{0};
    std::array<std::atomic<std::uint64_t>, 10> decile_ns{};

    const auto t0 = Clock::now();
    auto worker = [&](int t) {
        for (std::uint32_t i : part[static_cast<std::size_t>(t)]) {
            apply_op(*driver, ops[i]);
            std::size_t k = done.fetch_add(1, std::memory_order_relaxed) + 1;
            if (k * 10 % n < 10) {  // crossed a decile boundary
                std::size_t decile = k * 10 / n;
                if (decile >= 1 && decile <= 10)
                    decile_ns[decile - 1].store(
                        static_cast<std::uint64_t>(seconds_since(t0) * 1e9),
                        std::memory_order_relaxed);
            }
        }
    };

    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    r.update_seconds = seconds_since(t0);

    for (std::size_t d = 0; d < 10; ++d)
        r.update_seconds_by_decile[d] =
            static_cast<double>(decile_ns[d].load(std::memory_order_relaxed)) / 1e9;
    if (r.update_seconds_by_decile[9] == 0.0) r.update_seconds_by_decile[9] = r.update_seconds;

    EngineStats s = driver->stats();
    r.flush_count = s.flush_count;
    r.merge_count = s.merge_count;
    r.um_size_max = s.um_size_max;
    r.throughput_objs_per_ms = static_cast<double>(n) / (r.update_seconds * 1000.0);
    return r;
}

BenchReport run_mixed(const std::vector<WorkloadOp>& ops, Strategy strategy,
                      const EngineConfig& cfg, bool verify) {
    auto driver = make_driver(strategy, cfg);
    ReplayOracle oracle;

    BenchReport r;
    r.strategy = strategy_name(strategy);
    r.ops = ops.size();
    r.update_seconds_by_decile.assign(10, 0.0);

    std::array<double, 10> query_ms_sum{};
    std::array<std::uint64_t, 10> query_cnt{};

    const std::size_t n = ops.size();
    double query_seconds_total = 0.0;
    const auto t0 = Clock::now();

    for (std::size_t i = 0; i < n; ++i) {
        const WorkloadOp& op = ops[i];
        const std::size_t decile = std::min<std::size_t>(i * 10 / std::max<std::size_t>(n, 1), 9);
        if (op.kind == OpKind::Query) {
            const auto q0 = Clock::now();
            std::vector<ObjectRecord> got = driver->query(op.window);
            const double qs = seconds_since(q0);
            query_seconds_total += qs;
            query_ms_sum[decile] += qs * 1000.0;
            query_cnt[decile] += 1;
            ++r.queries;
            if (verify) {
                auto expected = to_result_set(oracle.query(op.window));
                auto actual = to_result_set(got);
                if (expected != actual)
                    throw VerificationError(std::string(strategy_name(strategy)) + ": " +
                                            describe_mismatch(op.window, expected, actual));
                ++r.verified_queries;
            }
        } else {
            apply_op(*driver, op);
            if (verify) oracle.apply(op);
        }
        if ((i + 1) * 10 % n < 10) {
            std::size_t d = (i + 1) * 10 / n;
            if (d >= 1 && d <= 10)
                r.update_seconds_by_decile[d - 1] = seconds_since(t0) - query_seconds_total;
        }
    }
    r.update_seconds = seconds_since(t0) - query_seconds_total;
    if (r.update_seconds_by_decile[9] == 0.0) r.update_seconds_by_decile[9] = r.update_seconds;

    r.query_ms_by_decile.assign(10, 0.0);
    for (std::size_t d = 0; d < 10; ++d)
        if (query_cnt[d]) r.query_ms_by_decile[d] = query_ms_sum[d] / static_cast<double>(query_cnt[d]);

    EngineStats s = driver->stats();
    r.flush_count = s.flush_count;
    r.merge_count = s.merge_count;
    r.um_size_max = s.um_size_max;
    const std::size_t ingest_ops = n - r.queries;
    if (r.update_seconds > 0 && ingest_ops > 0)
        r.throughput_objs_per_ms = static_cast<double>(ingest_ops) / (r.update_seconds * 1000.0);
    return r;
}

std::vector<std::pair<std::string, double>> report_fields(const BenchReport& r) {
    std::vector<std::pair<std::string, double>> f;
    f.emplace_back("threads", r.threads);
    f.emplace_back("ops", static_cast<double>(r.ops));
    f.emplace_back("queries", static_cast<double>(r.queries));
    f.emplace_back("update_seconds", r.update_seconds);
    for (std::size_t d = 0; d < r.update_seconds_by_decile.size(); ++d)
        f.emplace_back("update_seconds_decile_" + std::to_string((d + 1) * 10),
                       r.update_seconds_by_decile[d]);
    for (std::size_t d = 0; d < r.query_ms_by_decile.size(); ++d)
        f.emplace_back("query_ms_decile_" + std::to_string((d + 1) * 10), r.query_ms_by_decile[d]);
    f.emplace_back("flush_count", static_cast<double>(r.flush_count));
    f.emplace_back("merge_count", static_cast<double>(r.merge_count));
    f.emplace_back("um_size_max", static_cast<double>(r.um_size_max));
    f.emplace_back("throughput_objs_per_ms", r.throughput_objs_per_ms);
    f.emplace_back("verified_queries", static_cast<double>(r.verified_queries));
    return f;
}

void write_report_json(const std::filesystem::path& path, const std::vector<BenchReport>& reports) {
    nlohmann::json doc;
    doc["runs"] = nlohmann::json::array();
    for (const BenchReport& r : reports) {
        nlohmann::json run;
        run["strategy"] = r.strategy;
        for (const auto& [k, v] : report_fields(r)) run[k] = v;
        doc["runs"].push_back(std::move(run));
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StorageError("cannot open for write: " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) throw StorageError("write failed: " + path.string());
}

void write_report_csv(const std::filesystem::path& path, const std::vector<BenchReport>& reports) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StorageError("cannot open for write: " + path.string());
    out << "strategy,metric,value\n";
    char buf[64];
    for (const BenchReport& r : reports) {
        for (const auto& [k, v] : report_fields(r)) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << r.strategy << "," << k << "," << buf << "\n";
        }
    }
    if (!out) throw StorageError("write failed: " + path.string());
}

EngineConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot open config: " + path.string());
    EngineConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);

        auto as_u64 = [&]() -> std::uint64_t { return std::stoull(val); };
        auto as_f64 = [&]() -> double { return std::stod(val); };
        auto as_bool = [&]() -> bool { return val == "1" || val == "true"; };

        if (key == "memory_budget_bytes") cfg.memory_budget_bytes = as_u64();
        else if (key == "page_size_bytes") cfg.page_size_bytes = as_u64();
        else if (key == "merge_threshold") cfg.merge_threshold = as_u64();
        else if (key == "node_capacity") cfg.node_capacity = as_u64();
        else if (key == "buffered_threshold") cfg.buffered_threshold = static_cast<std::uint32_t>(as_u64());
        else if (key == "vacuum_threshold") cfg.vacuum_threshold = static_cast<std::uint32_t>(as_u64());
        else if (key == "max_mergeable_bytes") cfg.max_mergeable_bytes = as_u64();
        else if (key == "vacuum_skip_recent") cfg.vacuum_skip_recent = as_bool();
        else if (key == "world_min_x") cfg.world.min.x = as_f64();
        else if (key == "world_min_y") cfg.world.min.y = as_f64();
        else if (key == "world_max_x") cfg.world.max.x = as_f64();
        else if (key == "world_max_y") cfg.world.max.y = as_f64();
        else if (key == "data_dir") cfg.data_dir = val;
        else if (key == "curve") {
            if (val == "hilbert") cfg.curve = CurveKind::Hilbert;
            else if (val == "zorder") cfg.curve = CurveKind::ZOrder;
            else throw std::invalid_argument("config line " + std::to_string(lineno) +
                                             ": curve must be hilbert or zorder");
        } else {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": unknown key " + key);
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace lsmrum::bench
