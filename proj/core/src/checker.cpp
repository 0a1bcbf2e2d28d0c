#include "regemu/checker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace regemu::checker {
namespace {

using proto::OpKind;

std::string op_str(const Trace& t, std::size_t idx) {
  const OpRecord& op = t.ops[idx];
  return "op " + std::to_string(op.op_id) + " (client " +
         std::to_string(op.client_id) + ", key " + std::to_string(op.key) +
         ")";
}

struct KeyView {
  std::vector<std::size_t> writes;           // sorted by version == by time
  std::vector<std::size_t> reads_by_invoke;  // (invoke_time, op_id)
  std::vector<std::size_t> reads_by_finish;  // (response_time, op_id)
};

std::map<proto::Key, KeyView> build_views(const Trace& t) {
  std::map<proto::Key, KeyView> views;
  for (std::size_t i = 0; i < t.ops.size(); ++i) {
    KeyView& v = views[t.ops[i].key];
    if (t.ops[i].kind == OpKind::Write) {
      v.writes.push_back(i);
    } else {
      v.reads_by_invoke.push_back(i);
    }
  }
  for (auto& [key, v] : views) {
    std::sort(v.writes.begin(), v.writes.end(), [&](std::size_t a, std::size_t b) {
      return t.ops[a].version < t.ops[b].version;
    });
    std::sort(v.reads_by_invoke.begin(), v.reads_by_invoke.end(),
              [&](std::size_t a, std::size_t b) {
                if (t.ops[a].invoke_time != t.ops[b].invoke_time) {
                  return t.ops[a].invoke_time < t.ops[b].invoke_time;
                }
                return t.ops[a].op_id < t.ops[b].op_id;
              });
    v.reads_by_finish = v.reads_by_invoke;
    std::sort(v.reads_by_finish.begin(), v.reads_by_finish.end(),
              [&](std::size_t a, std::size_t b) {
                if (t.ops[a].response_time != t.ops[b].response_time) {
                  return t.ops[a].response_time < t.ops[b].response_time;
                }
                return t.ops[a].op_id < t.ops[b].op_id;
              });
  }
  return views;
}

// Index of the write whose interval contains time `at`, or npos.
std::size_t containing_write(const Trace& t, const KeyView& v, double at) {
  // last write with w_st <= at
  auto it = std::upper_bound(
      v.writes.begin(), v.writes.end(), at,
      [&](double x, std::size_t w) { return x < t.ops[w].invoke_time; });
  if (it == v.writes.begin()) return static_cast<std::size_t>(-1);
  const std::size_t w = *(it - 1);
  if (at <= t.ops[w].response_time) return w;
  return static_cast<std::size_t>(-1);
}

// Shared pattern scan. For every read that completes conditions 1-2 the
// window callback runs; for every concurrency pattern the cp callback runs
// with the reads finishing inside [w_st, r_st].
template <typename WindowFn, typename CpFn>
void scan_patterns(const Trace& t, const std::map<proto::Key, KeyView>& views,
                   WindowFn&& on_window, CpFn&& on_cp) {
  for (const auto& [key, v] : views) {
    for (std::size_t r : v.reads_by_invoke) {
      const double r_st = t.ops[r].invoke_time;
      const std::size_t w = containing_write(t, v, r_st);
      if (w == static_cast<std::size_t>(-1)) continue;
      const std::uint64_t wv = t.ops[w].version;
      if (wv < 2) continue;  // predecessor must be a real write
      const std::size_t w_prime = v.writes[wv - 2];
      on_window(r, w, w_prime);

      const double w_st = t.ops[w].invoke_time;
      auto lo = std::lower_bound(
          v.reads_by_finish.begin(), v.reads_by_finish.end(), w_st,
          [&](std::size_t x, double val) { return t.ops[x].response_time < val; });
      auto hi = std::upper_bound(
          lo, v.reads_by_finish.end(), r_st,
          [&](double val, std::size_t x) { return val < t.ops[x].response_time; });
      if (lo == hi) continue;
      on_cp(r, w, w_prime, lo, hi);
    }
  }
}

bool rwp_holds(const Trace& t, std::size_t r, std::size_t w,
               std::size_t w_prime,
               std::vector<std::size_t>::const_iterator lo,
               std::vector<std::size_t>::const_iterator hi) {
  if (t.ops[r].version != t.ops[w_prime].version) return false;
  const std::uint64_t wv = t.ops[w].version;
  for (auto it = lo; it != hi; ++it) {
    if (t.ops[*it].version == wv) return true;
  }
  return false;
}

struct KeyPermutation {
  std::vector<std::size_t> order;  // trace indices
  // parallel to reads in the order they were scheduled:
  std::vector<std::size_t> read_idx;
  std::vector<std::uint64_t> read_slot;  // version of nearest preceding write
};

// Fenwick tree over finish-time ranks keeping the maximum scheduled
// position (slot, within-slot counter) among processed reads.
class MaxBit {
 public:
  explicit MaxBit(std::size_t n) : tree_(n + 1, 0) {}
  void update(std::size_t i, std::uint64_t val) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) {
      tree_[i] = std::max(tree_[i], val);
    }
  }
  std::uint64_t prefix_max(std::size_t count) const {  // over [0, count)
    std::uint64_t best = 0;
    for (std::size_t i = count; i > 0; i -= i & (~i + 1)) {
      best = std::max(best, tree_[i]);
    }
    return best;
  }

 private:
  std::vector<std::uint64_t> tree_;
};

KeyPermutation permute_key(const Trace& t, const KeyView& v) {
  KeyPermutation out;
  const std::size_t n_writes = v.writes.size();
  const std::size_t n_reads = v.reads_by_invoke.size();

  // finish-time rank per read (by position in reads_by_finish)
  std::vector<std::size_t> finish_rank(t.ops.size());
  for (std::size_t i = 0; i < v.reads_by_finish.size(); ++i) {
    finish_rank[v.reads_by_finish[i]] = i;
  }

  std::vector<std::vector<std::size_t>> slots(n_writes + 1);
  MaxBit bit(n_reads);
  std::uint64_t scheduled = 0;

  for (std::size_t r : v.reads_by_invoke) {
    const std::uint64_t version = t.ops[r].version;
    if (version > n_writes) {
      throw std::invalid_argument("read " + op_str(t, r) +
                                  " returns a version never written");
    }
    // latest scheduled position among reads finishing strictly before r_st
    const double r_st = t.ops[r].invoke_time;
    auto bound = std::lower_bound(
        v.reads_by_finish.begin(), v.reads_by_finish.end(), r_st,
        [&](std::size_t x, double val) { return t.ops[x].response_time < val; });
    const std::uint64_t packed =
        bit.prefix_max(static_cast<std::size_t>(bound - v.reads_by_finish.begin()));
    const std::uint64_t pred_slot = packed >> 32;

    const std::uint64_t slot = std::max<std::uint64_t>(version, pred_slot);
    slots[slot].push_back(r);
    ++scheduled;
    bit.update(finish_rank[r], (slot << 32) | scheduled);

    out.read_idx.push_back(r);
    out.read_slot.push_back(slot);
  }

  out.order.reserve(n_writes + n_reads);
  for (std::size_t s = 0; s <= n_writes; ++s) {
    if (s > 0) out.order.push_back(v.writes[s - 1]);
    for (std::size_t r : slots[s]) out.order.push_back(r);
  }
  return out;
}

}  // namespace

PatternReport PatternReport::from_counts(std::uint64_t reads,
                                         std::uint64_t cps,
                                         std::uint64_t rwps) {
  PatternReport rep;
  rep.reads = reads;
  rep.cps = cps;
  rep.rwps = rwps;
  rep.empty = reads == 0;
  if (reads > 0) {
    rep.p_cp = static_cast<double>(cps) / static_cast<double>(reads);
    rep.p_oni = static_cast<double>(rwps) / static_cast<double>(reads);
  }
  if (cps > 0) {
    rep.p_rwp_given_cp = static_cast<double>(rwps) / static_cast<double>(cps);
  }
  return rep;
}

void validate_trace(const Trace& t) {
  // per-op sanity and per-client alternation
  std::map<std::int32_t, std::vector<std::size_t>> by_client;
  for (std::size_t i = 0; i < t.ops.size(); ++i) {
    if (!(t.ops[i].invoke_time < t.ops[i].response_time)) {
      throw std::invalid_argument("invoke_time must precede response_time at " +
                                  op_str(t, i));
    }
    by_client[t.ops[i].client_id].push_back(i);
  }
  std::int32_t writing_client = -1;
  for (auto& [client, idxs] : by_client) {
    std::sort(idxs.begin(), idxs.end(), [&](std::size_t a, std::size_t b) {
      return t.ops[a].invoke_time < t.ops[b].invoke_time;
    });
    for (std::size_t i = 0; i + 1 < idxs.size(); ++i) {
      if (t.ops[idxs[i + 1]].invoke_time < t.ops[idxs[i]].response_time) {
        throw std::invalid_argument(
            "client " + std::to_string(client) +
            " has overlapping operations; executions must be well-formed (" +
            op_str(t, idxs[i]) + " vs " + op_str(t, idxs[i + 1]) + ")");
      }
    }
    for (std::size_t i : idxs) {
      if (t.ops[i].kind == OpKind::Write) {
        if (writing_client != -1 && writing_client != client) {
          throw std::invalid_argument(
              "multiple writing clients; registers are single-writer");
        }
        writing_client = client;
      }
    }
  }

  const auto views = build_views(t);
  for (const auto& [key, v] : views) {
    for (std::size_t i = 0; i < v.writes.size(); ++i) {
      const OpRecord& w = t.ops[v.writes[i]];
      if (w.version != i + 1) {
        throw std::invalid_argument(
            "key " + std::to_string(key) +
            ": write versions must be consecutive from 1; " +
            op_str(t, v.writes[i]) + " has version " +
            std::to_string(w.version) + " at rank " + std::to_string(i + 1));
      }
      if (i > 0) {
        const OpRecord& prev = t.ops[v.writes[i - 1]];
        if (w.invoke_time < prev.response_time) {
          throw std::invalid_argument("key " + std::to_string(key) +
                                      ": write intervals overlap at " +
                                      op_str(t, v.writes[i]));
        }
      }
    }
    for (std::size_t r : v.reads_by_invoke) {
      const std::uint64_t ver = t.ops[r].version;
      if (ver > v.writes.size()) {
        throw std::invalid_argument("read " + op_str(t, r) +
                                    " returns version " + std::to_string(ver) +
                                    " which was never written");
      }
    }
  }
}

std::vector<PatternInstance> detect_cp(const Trace& t) {
  validate_trace(t);
  const auto views = build_views(t);
  std::vector<PatternInstance> out;
  scan_patterns(
      t, views, [](std::size_t, std::size_t, std::size_t) {},
      [&](std::size_t r, std::size_t w, std::size_t wp, auto lo, auto hi) {
        PatternInstance inst;
        inst.read_idx = r;
        inst.w_idx = w;
        inst.w_prime_idx = wp;
        inst.r_prime_idxs.assign(lo, hi);
        inst.is_rwp = rwp_holds(t, r, w, wp, lo, hi);
        out.push_back(std::move(inst));
      });
  return out;
}

std::vector<PatternInstance> detect_rwp(const Trace& t) {
  auto all = detect_cp(t);
  std::vector<PatternInstance> out;
  for (auto& inst : all) {
    if (inst.is_rwp) out.push_back(std::move(inst));
  }
  return out;
}

PatternReport pattern_stats(const Trace& t) {
  validate_trace(t);
  const auto views = build_views(t);

  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  for (const OpRecord& op : t.ops) {
    (op.kind == OpKind::Read ? reads : writes) += 1;
  }

  std::uint64_t window_reads = 0;
  std::uint64_t cps = 0;
  std::uint64_t rwps = 0;
  scan_patterns(
      t, views,
      [&](std::size_t, std::size_t, std::size_t) { ++window_reads; },
      [&](std::size_t r, std::size_t w, std::size_t wp, auto lo, auto hi) {
        ++cps;
        if (rwp_holds(t, r, w, wp, lo, hi)) ++rwps;
      });

  PatternReport rep = PatternReport::from_counts(reads, cps, rwps);
  rep.writes = writes;
  rep.window_reads = window_reads;
  return rep;
}

std::vector<std::size_t> build_permutation(const Trace& t, proto::Key key) {
  validate_trace(t);
  const auto views = build_views(t);
  const auto it = views.find(key);
  if (it == views.end()) return {};
  return permute_key(t, it->second).order;
}

TwoAtomicityResult verify_2atomicity(const Trace& t) {
  validate_trace(t);
  const auto views = build_views(t);
  TwoAtomicityResult res;

  for (const auto& [key, v] : views) {
    const KeyPermutation perm = permute_key(t, v);

    // real-time requirement: nothing later in pi may precede anything
    // earlier in pi
    double max_st = -1.0;
    std::size_t argmax_st = 0;
    for (std::size_t idx : perm.order) {
      const OpRecord& op = t.ops[idx];
      if (op.response_time < max_st) {
        res.realtime_breaks.push_back(RealTimeViolation{argmax_st, idx});
      }
      if (op.invoke_time > max_st) {
        max_st = op.invoke_time;
        argmax_st = idx;
      }
    }

    // weak read-from requirement: within the latest two versions
    for (std::size_t i = 0; i < perm.read_idx.size(); ++i) {
      const std::uint64_t slot = perm.read_slot[i];
      const std::uint64_t got = t.ops[perm.read_idx[i]].version;
      if (slot > got + 1) {
        res.stale_reads.push_back(
            StalenessViolation{perm.read_idx[i], got, slot});
      }
    }
  }
  res.ok = res.stale_reads.empty() && res.realtime_breaks.empty();
  return res;
}

AtomicityResult verify_atomicity(const Trace& t) {
  const PatternReport rep = pattern_stats(t);
  AtomicityResult res;
  res.oni_count = rep.rwps;
  res.ok = rep.rwps == 0;
  return res;
}

namespace {

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  if (sorted.size() == 1) return sorted[0];
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

LatencySummary summarize(std::vector<double>& lat) {
  LatencySummary s;
  s.count = lat.size();
  if (lat.empty()) return s;
  std::sort(lat.begin(), lat.end());
  s.p25 = percentile(lat, 0.25);
  s.p50 = percentile(lat, 0.50);
  s.p75 = percentile(lat, 0.75);
  const double iqr = s.p75 - s.p25;
  const double lo_fence = s.p25 - 1.5 * iqr;
  const double hi_fence = s.p75 + 1.5 * iqr;
  s.whisker_low = *std::lower_bound(lat.begin(), lat.end(), lo_fence);
  auto hi = std::upper_bound(lat.begin(), lat.end(), hi_fence);
  s.whisker_high = *(hi - 1);
  return s;
}

}  // namespace

LatencyStats latency_stats(const Trace& t) {
  std::vector<double> reads, writes;
  for (const OpRecord& op : t.ops) {
    (op.kind == OpKind::Read ? reads : writes)
        .push_back(op.response_time - op.invoke_time);
  }
  LatencyStats stats;
  stats.reads = summarize(reads);
  stats.writes = summarize(writes);
  return stats;
}

std::map<std::uint64_t, std::uint64_t> staleness_histogram(const Trace& t) {
  validate_trace(t);
  const auto views = build_views(t);
  std::map<std::uint64_t, std::uint64_t> hist;
  for (const auto& [key, v] : views) {
    const KeyPermutation perm = permute_key(t, v);
    for (std::size_t i = 0; i < perm.read_idx.size(); ++i) {
      hist[perm.read_slot[i] - t.ops[perm.read_idx[i]].version] += 1;
    }
  }
  return hist;
}

}  // namespace regemu::checker
