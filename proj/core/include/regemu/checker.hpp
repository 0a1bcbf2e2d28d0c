#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "regemu/trace.hpp"

namespace regemu::checker {

/// Real-time precedence: o1's response occurs before o2's invocation.
inline bool precedes(const OpRecord& o1, const OpRecord& o2) {
  return o1.response_time < o2.invoke_time;
}

/// One concurrency pattern anchored at a read r: r starts inside write w's
/// interval, w' is w's immediate predecessor, and every read in
/// r_prime_idxs finishes inside [w_st, r_st]. At most one instance exists
/// per read.
struct PatternInstance {
  std::size_t read_idx = 0;     // indices into Trace::ops
  std::size_t w_idx = 0;
  std::size_t w_prime_idx = 0;
  std::vector<std::size_t> r_prime_idxs;
  bool is_rwp = false;
};

struct PatternReport {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t cps = 0;
  std::uint64_t rwps = 0;
  // Reads whose start falls inside some write's interval that has a
  // predecessor write (pattern conditions 1-2, before requiring any r').
  std::uint64_t window_reads = 0;
  double p_cp = 0.0;
  double p_rwp_given_cp = 0.0;
  double p_oni = 0.0;
  bool empty = false;  // no reads: denominators undefined, flagged

  static PatternReport from_counts(std::uint64_t reads, std::uint64_t cps,
                                   std::uint64_t rwps);
};

/// Structural validation: per-client alternation, per-key write versions
/// 1..K with disjoint ordered intervals, a single writing client, and
/// read versions that name an existing write (or 0). Throws
/// std::invalid_argument with op diagnostics.
void validate_trace(const Trace& trace);

std::vector<PatternInstance> detect_cp(const Trace& trace);

/// The subset of concurrency patterns whose read-from assignments complete
/// an old-new inversion: r returned version(w') and some r' in the window
/// returned version(w).
std::vector<PatternInstance> detect_rwp(const Trace& trace);

/// Counting pass over the whole trace (no instance materialization).
PatternReport pattern_stats(const Trace& trace);

/// Serialization witness for one key: writes ordered by version, each read
/// scheduled after the later of its read-from write and the last preceding
/// read. Returns indices into trace.ops.
std::vector<std::size_t> build_permutation(const Trace& trace,
                                           proto::Key key);

struct StalenessViolation {
  std::size_t op_index = 0;          // read's index in trace.ops
  std::uint64_t read_version = 0;
  std::uint64_t nearest_write_version = 0;  // in the permutation
};

struct RealTimeViolation {
  std::size_t earlier_in_pi = 0;  // scheduled first, but is preceded by...
  std::size_t later_in_pi = 0;    // ...this op in real time
};

struct TwoAtomicityResult {
  bool ok = true;
  std::vector<StalenessViolation> stale_reads;       // staleness >= 2
  std::vector<RealTimeViolation> realtime_breaks;
};

TwoAtomicityResult verify_2atomicity(const Trace& trace);

struct AtomicityResult {
  bool ok = true;
  std::uint64_t oni_count = 0;  // old-new inversions == read-write patterns
};

AtomicityResult verify_atomicity(const Trace& trace);

struct LatencySummary {
  std::size_t count = 0;  // 0 means no ops of this kind (flagged)
  double p25 = 0.0, p50 = 0.0, p75 = 0.0;
  double whisker_low = 0.0, whisker_high = 0.0;  // Tukey 1.5*IQR fences
};

struct LatencyStats {
  LatencySummary reads;
  LatencySummary writes;
};

LatencyStats latency_stats(const Trace& trace);

/// Distribution of read staleness measured against the permutation:
/// (version of the nearest preceding write in pi) - (version returned).
std::map<std::uint64_t, std::uint64_t> staleness_histogram(const Trace& trace);

}  // namespace regemu::checker
