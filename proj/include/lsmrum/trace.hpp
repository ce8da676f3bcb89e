#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsmrum/types.hpp"

namespace lsmrum::bench {

// CSV trace format, one op per line after the header:
//   op,oid,x,y,old_x,old_y,qx1,qy1,qx2,qy2
// op in {I,D,U,Q}. x/y are the new location (I/U), old_x/old_y the previous
// location (D/U; consumed by the eager strategy), qx1..qy2 the query window
// (Q). Unused columns stay empty.
inline constexpr const char* kTraceHeader = "op,oid,x,y,old_x,old_y,qx1,qy1,qx2,qy2";

class TraceParseError : public std::runtime_error {
public:
    TraceParseError(std::size_t line, const std::string& what)
        : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

void write_trace_csv(const std::filesystem::path& path, const std::vector<WorkloadOp>& ops);
std::vector<WorkloadOp> read_trace_csv(const std::filesystem::path& path);

std::string format_op(const WorkloadOp& op);

}  // namespace lsmrum::bench
