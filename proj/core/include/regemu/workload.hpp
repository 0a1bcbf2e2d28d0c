#pragma once

#include <cstdint>
#include <vector>

#include "regemu/simnet.hpp"
#include "regemu/trace.hpp"

namespace regemu::workload {

/// N independent client queues, each a Poisson arrival stream with
/// rejection: an arrival that finds its client busy is dropped. Queue 0
/// (by default) is the single writer; the rest only read.
struct WorkloadConfig {
  int n_clients = 2;   // N, including the writer
  int n_replicas = 3;  // n
  int writer_index = 0;
  double arrival_rate = 50.0;  // lambda, per second per client
  double service_rate = 10.0;  // mu; used only by the abstract replay
  std::uint64_t ops_per_client = 0;        // accepted-arrival budget per client
  std::vector<proto::Key> keys = {0};      // uniform key choice per op
  sim::SimTime horizon = 0.0;              // 0 = run until budgets drain

  static constexpr std::uint64_t kUnlimitedOps = ~0ull;

  void validate() const;
};

struct RunResult {
  Trace trace;
  std::uint64_t arrivals = 0;           // accepted + rejected
  std::uint64_t rejected_arrivals = 0;  // arrivals that found the client busy
  std::uint64_t pending_at_end = 0;     // invoked but incomplete at horizon
  // completed reads dropped because their write was still pending at the
  // horizon (their version has no trace record)
  std::uint64_t dropped_dangling_reads = 0;
  std::vector<double> busy_fraction;    // per client, time in service / total
};

/// Drives the full protocol stack through the event-driven network and
/// returns the completed-operation trace.
RunResult run_experiment(const WorkloadConfig& config,
                         const sim::DelayModel& delays,
                         proto::Protocol protocol, const sim::FaultPlan& faults,
                         std::uint64_t seed);

/// Queueing-model validation mode: operations occupy their client for an
/// exponential(mu) service time instead of a protocol round-trip. Reads
/// report the version of the latest write completed before they finish.
RunResult run_abstract_replay(const WorkloadConfig& config, std::uint64_t seed);

}  // namespace regemu::workload
