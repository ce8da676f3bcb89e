#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lsmrum/bench_runner.hpp"
#include "lsmrum/trace.hpp"
#include "lsmrum/workload.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerification = 2;
constexpr int kExitIo = 3;

using namespace lsmrum;
using namespace lsmrum::bench;

std::vector<Strategy> resolve_strategies(const std::string& arg) {
    if (arg == "all") return {std::begin(kAllStrategies), std::end(kAllStrategies)};
    auto s = parse_strategy(arg);
    if (!s) throw CLI::ValidationError("--strategy", "unknown strategy: " + arg);
    return {*s};
}

void emit_report(const std::string& path, const std::vector<BenchReport>& reports) {
    if (path.empty()) return;
    std::filesystem::path p(path);
    if (p.extension() == ".json") write_report_json(p, reports);
    else if (p.extension() == ".csv") write_report_csv(p, reports);
    else throw CLI::ValidationError("--report", "report file must end in .json or .csv");
}

void print_summary(const BenchReport& r) {
    std::cout << r.strategy << ": ops=" << r.ops;
    if (r.queries) std::cout << " queries=" << r.queries;
    std::cout << " threads=" << r.threads << " update_s=" << r.update_seconds
              << " flush=" << r.flush_count << " merge=" << r.merge_count
              << " um_max=" << r.um_size_max << " objs_per_ms=" << r.throughput_objs_per_ms;
    if (r.verified_queries) std::cout << " verified=" << r.verified_queries;
    std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LSM R-tree secondary index with an in-memory update memo"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic workload trace");
    std::string gen_kind = "moving", gen_out;
    GenParams gp;
    gen->add_option("--kind", gen_kind, "checkin|moving|pickup")->capture_default_str();
    gen->add_option("--ops", gp.n_ops, "total operations")->capture_default_str();
    gen->add_option("--oids", gp.n_oids, "distinct objects")->capture_default_str();
    gen->add_option("--seed", gp.seed, "rng seed")->capture_default_str();
    gen->add_option("--query-frac", gp.query_frac, "fraction of query ops")->capture_default_str();
    gen->add_option("--delete-frac", gp.delete_frac, "fraction of delete ops")->capture_default_str();
    gen->add_option("--window-area-frac", gp.window_area_frac,
                    "max query window area as a fraction of the world box")
        ->capture_default_str();
    gen->add_option("--out", gen_out, "output trace file")->required();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "replay a trace into one or all strategies");
    std::string in_trace, in_strategy = "um_fmbv", in_config, in_report;
    int in_threads = 1;
    ingest->add_option("--trace", in_trace, "trace csv")->required();
    ingest->add_option("--strategy", in_strategy, "strategy name or 'all'")->capture_default_str();
    ingest->add_option("--threads", in_threads, "ingest threads")->capture_default_str();
    ingest->add_option("--config", in_config, "key=value engine config file");
    ingest->add_option("--report", in_report, "write report (.json or .csv)");

    // mixed
    auto* mixed = app.add_subcommand("mixed", "replay a mixed update/query trace, single-threaded");
    std::string mx_trace, mx_strategy = "all", mx_config, mx_report;
    bool mx_verify = false;
    mixed->add_option("--trace", mx_trace, "trace csv with interleaved Q ops")->required();
    mixed->add_option("--strategy", mx_strategy, "strategy name or 'all'")->capture_default_str();
    mixed->add_flag("--verify", mx_verify, "check every query against the replay oracle");
    mixed->add_option("--config", mx_config, "key=value engine config file");
    mixed->add_option("--report", mx_report, "write report (.json or .csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            gp.kind = parse_workload_kind(gen_kind);
            write_trace_csv(gen_out, gen_workload(gp));
            std::cout << "wrote " << gen_out << "\n";
            return kExitOk;
        }

        if (ingest->parsed()) {
            EngineConfig cfg = in_config.empty() ? EngineConfig{} : parse_config_file(in_config);
            auto ops = read_trace_csv(in_trace);
            std::vector<BenchReport> reports;
            for (Strategy s : resolve_strategies(in_strategy)) {
                reports.push_back(run_ingest(ops, s, in_threads, cfg));
                print_summary(reports.back());
            }
            emit_report(in_report, reports);
            return kExitOk;
        }

        if (mixed->parsed()) {
            EngineConfig cfg = mx_config.empty() ? EngineConfig{} : parse_config_file(mx_config);
            auto ops = read_trace_csv(mx_trace);
            std::vector<BenchReport> reports;
            for (Strategy s : resolve_strategies(mx_strategy)) {
                reports.push_back(run_mixed(ops, s, cfg, mx_verify));
                print_summary(reports.back());
            }
            emit_report(mx_report, reports);
            return kExitOk;
        }
    } catch (const VerificationError& e) {
        std::cerr << "verification failed: " << e.what() << "\n";
        return kExitVerification;
    } catch (const TraceParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const StorageError& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
