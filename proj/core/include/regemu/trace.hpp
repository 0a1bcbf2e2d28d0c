#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "regemu/proto.hpp"

namespace regemu {

/// One completed operation as the offline checker sees it. Reads carry the
/// version of the write they returned.
struct OpRecord {
  std::uint64_t op_id = 0;
  std::int32_t client_id = 0;
  proto::OpKind kind = proto::OpKind::Read;
  proto::Key key = 0;
  std::uint64_t version = 0;
  double invoke_time = 0.0;    // o_st
  double response_time = 0.0;  // o_ft
};

struct Trace {
  std::vector<OpRecord> ops;
  int n_replicas = 0;
  int n_clients = 0;
  std::string protocol;  // "2AM", "ABD", or "abstract"
};

struct TraceParseError : std::runtime_error {
  TraceParseError(std::size_t line_number, const std::string& what)
      : std::runtime_error("trace line " + std::to_string(line_number) + ": " +
                           what),
        line(line_number) {}
  std::size_t line;
};

/// Writes the trace as CSV. `meta` (if non-empty) becomes a leading
/// `# ...` comment; the protocol/topology fields are appended to it so a
/// round-trip preserves them. Times use 9 fractional digits.
void write_trace_csv(std::ostream& out, const Trace& trace,
                     const std::string& meta = "");

/// Parses a trace CSV (with optional `#` comment lines). Malformed rows
/// raise TraceParseError carrying the 1-based line number.
Trace read_trace_csv(std::istream& in);

void write_trace_csv_file(const std::string& path, const Trace& trace,
                          const std::string& meta = "");
Trace read_trace_csv_file(const std::string& path);

}  // namespace regemu
