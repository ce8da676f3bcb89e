#include "lsmrum/trace.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

namespace lsmrum::bench {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

std::string format_op(const WorkloadOp& op) {
    std::string line;
    switch (op.kind) {
        case OpKind::Insert:
            line = "I," + std::to_string(op.oid) + "," + fmt_double(op.loc.x) + "," +
                   fmt_double(op.loc.y) + ",,,,,,";
            break;
        case OpKind::Delete: {
            std::string ox = op.old_loc ? fmt_double(op.old_loc->x) : "";
            std::string oy = op.old_loc ? fmt_double(op.old_loc->y) : "";
            line = "D," + std::to_string(op.oid) + ",,," + ox + "," + oy + ",,,,";
            break;
        }
        case OpKind::Update: {
            std::string ox = op.old_loc ? fmt_double(op.old_loc->x) : "";
            std::string oy = op.old_loc ? fmt_double(op.old_loc->y) : "";
            line = "U," + std::to_string(op.oid) + "," + fmt_double(op.loc.x) + "," +
                   fmt_double(op.loc.y) + "," + ox + "," + oy + ",,,,";
            break;
        }
        case OpKind::Query:
            line = "Q,,,,,," + fmt_double(op.window.min.x) + "," + fmt_double(op.window.min.y) +
                   "," + fmt_double(op.window.max.x) + "," + fmt_double(op.window.max.y);
            break;
    }
    return line;
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<WorkloadOp>& ops) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StorageError("cannot open for write: " + path.string());
    out << kTraceHeader << "\n";
    for (const WorkloadOp& op : ops) out << format_op(op) << "\n";
    if (!out) throw StorageError("write failed: " + path.string());
}

std::vector<WorkloadOp> read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot open: " + path.string());

    std::vector<WorkloadOp> ops;
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) throw TraceParseError(1, "missing header");
    ++lineno;
    if (line != kTraceHeader) throw TraceParseError(1, "bad header: " + line);

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;

        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        while (cols.size() < 10) cols.push_back("");
        if (cols.size() != 10) throw TraceParseError(lineno, "expected 10 columns");

        WorkloadOp op;
        const std::string& kind = cols[0];
        auto need = [&](const std::optional<double>& v, const char* what) -> double {
            if (!v) throw TraceParseError(lineno, std::string("bad or missing ") + what);
            return *v;
        };
        auto parse_oid = [&]() -> ObjectId {
            if (cols[1].empty()) throw TraceParseError(lineno, "missing oid");
            char* end = nullptr;
            unsigned long long v = std::strtoull(cols[1].c_str(), &end, 10);
            if (end != cols[1].c_str() + cols[1].size()) throw TraceParseError(lineno, "bad oid");
            return v;
        };

        if (kind == "I") {
            op.kind = OpKind::Insert;
            op.oid = parse_oid();
            op.loc = {need(parse_double(cols[2]), "x"), need(parse_double(cols[3]), "y")};
        } else if (kind == "D") {
            op.kind = OpKind::Delete;
            op.oid = parse_oid();
            auto ox = parse_double(cols[4]), oy = parse_double(cols[5]);
            if (ox && oy) op.old_loc = Location{*ox, *oy};
        } else if (kind == "U") {
            op.kind = OpKind::Update;
            op.oid = parse_oid();
            op.loc = {need(parse_double(cols[2]), "x"), need(parse_double(cols[3]), "y")};
            auto ox = parse_double(cols[4]), oy = parse_double(cols[5]);
            if (ox && oy) op.old_loc = Location{*ox, *oy};
        } else if (kind == "Q") {
            op.kind = OpKind::Query;
            op.window = Rect{{need(parse_double(cols[6]), "qx1"), need(parse_double(cols[7]), "qy1")},
                             {need(parse_double(cols[8]), "qx2"), need(parse_double(cols[9]), "qy2")}};
            if (!op.window.valid()) throw TraceParseError(lineno, "invalid query window");
        } else {
            throw TraceParseError(lineno, "unknown op kind: " + kind);
        }
        if (op.kind != OpKind::Query && !op.loc.is_finite())
            throw TraceParseError(lineno, "non-finite location");
        ops.push_back(op);
    }
    return ops;
}

}  // namespace lsmrum::bench
