#include "regemu/trace.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace regemu {
namespace {

constexpr char kHeader[] =
    "op_id,client_id,kind,key,version,invoke_time_s,response_time_s";

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_int(std::string_view field, std::size_t line_no, const char* name) {
  T value{};
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw TraceParseError(line_no, std::string("bad ") + name + " '" +
                                       std::string(field) + "'");
  }
  return value;
}

double parse_double(std::string_view field, std::size_t line_no,
                    const char* name) {
  double value{};
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw TraceParseError(line_no, std::string("bad ") + name + " '" +
                                       std::string(field) + "'");
  }
  return value;
}

// Pulls "key=value" out of a comment line.
std::string comment_value(const std::string& line, const std::string& key) {
  const std::string needle = key + "=";
  const auto pos = line.find(needle);
  if (pos == std::string::npos) return "";
  const auto end = line.find(' ', pos + needle.size());
  return line.substr(pos + needle.size(),
                     end == std::string::npos ? std::string::npos
                                              : end - pos - needle.size());
}

}  // namespace

void write_trace_csv(std::ostream& out, const Trace& trace,
                     const std::string& meta) {
  out << "#";
  if (!meta.empty()) out << " " << meta;
  out << " protocol=" << (trace.protocol.empty() ? "none" : trace.protocol)
      << " n=" << trace.n_replicas << " N=" << trace.n_clients << "\n";
  out << kHeader << "\n";

  char buf[160];
  for (const OpRecord& op : trace.ops) {
    std::snprintf(buf, sizeof buf,
                  "%" PRIu64 ",%d,%c,%d,%" PRIu64 ",%.9f,%.9f\n", op.op_id,
                  op.client_id, op.kind == proto::OpKind::Read ? 'R' : 'W',
                  op.key, op.version, op.invoke_time, op.response_time);
    out << buf;
  }
}

Trace read_trace_csv(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string proto = comment_value(line, "protocol");
      if (!proto.empty() && proto != "none") trace.protocol = proto;
      const std::string n = comment_value(line, "n");
      if (!n.empty()) trace.n_replicas = std::atoi(n.c_str());
      const std::string clients = comment_value(line, "N");
      if (!clients.empty()) trace.n_clients = std::atoi(clients.c_str());
      continue;
    }
    if (!header_seen) {
      if (line != kHeader) {
        throw TraceParseError(line_no, "missing or malformed header row");
      }
      header_seen = true;
      continue;
    }

    const auto fields = split_fields(line);
    if (fields.size() != 7) {
      throw TraceParseError(line_no, "expected 7 fields, got " +
                                         std::to_string(fields.size()));
    }
    OpRecord op;
    op.op_id = parse_int<std::uint64_t>(fields[0], line_no, "op_id");
    op.client_id = parse_int<std::int32_t>(fields[1], line_no, "client_id");
    if (fields[2] == "R") {
      op.kind = proto::OpKind::Read;
    } else if (fields[2] == "W") {
      op.kind = proto::OpKind::Write;
    } else {
      throw TraceParseError(line_no, "kind must be R or W");
    }
    op.key = parse_int<proto::Key>(fields[3], line_no, "key");
    op.version = parse_int<std::uint64_t>(fields[4], line_no, "version");
    op.invoke_time = parse_double(fields[5], line_no, "invoke_time_s");
    op.response_time = parse_double(fields[6], line_no, "response_time_s");
    if (!(op.invoke_time < op.response_time)) {
      throw TraceParseError(line_no, "invoke_time must precede response_time");
    }
    trace.ops.push_back(op);
  }
  if (!header_seen) {
    throw TraceParseError(line_no == 0 ? 1 : line_no, "empty trace file");
  }
  return trace;
}

void write_trace_csv_file(const std::string& path, const Trace& trace,
                          const std::string& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_trace_csv(out, trace, meta);
  if (!out.good()) throw std::runtime_error("write failed: " + path);
}

Trace read_trace_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return read_trace_csv(in);
}

}  // namespace regemu
