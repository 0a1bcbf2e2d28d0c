#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <variant>
#include <vector>

#include "regemu/proto.hpp"
#include "regemu/rng.hpp"

namespace regemu::sim {

// Virtual time in seconds. Event order is (time, sequence number), so float
// equality never decides ordering.
using SimTime = double;

struct Deterministic {
  double seconds = 0.0;
};

// Injected asynchrony: integer milliseconds uniform in [0, upper_ms).
struct UniformAsyncMs {
  int upper_ms = 0;
};

enum class RttMode {
  SplitLegs,        // each leg ~ Exp(2*rate), so the round-trip mean is 1/rate
  RequestCarriesRtt  // request leg ~ Exp(rate), reply leg instantaneous
};

struct ExponentialRtt {
  double read_rate = 0.0;   // rate for read-operation round-trips
  double write_rate = 0.0;  // rate for write-operation round-trips
  RttMode mode = RttMode::SplitLegs;
};

using DelayComponent = std::variant<Deterministic, UniformAsyncMs, ExponentialRtt>;

/// Per-message delay model; a composite sums one sample from each component.
struct DelayModel {
  std::vector<DelayComponent> components;

  static DelayModel deterministic(double seconds) {
    return DelayModel{{Deterministic{seconds}}};
  }
  static DelayModel uniform_async_ms(int upper_ms) {
    return DelayModel{{UniformAsyncMs{upper_ms}}};
  }
  static DelayModel exponential(double read_rate, double write_rate,
                                RttMode mode = RttMode::SplitLegs) {
    return DelayModel{{ExponentialRtt{read_rate, write_rate, mode}}};
  }
  DelayModel& add(DelayComponent c) {
    components.push_back(c);
    return *this;
  }
  void validate() const;
};

enum class Leg : std::uint8_t { Request, Reply };

/// One delay sample for a message on the given round-trip direction and leg.
double sample_delay(const DelayModel& model, proto::OpKind direction, Leg leg,
                    Rng& rng);

/// Deterministic discrete-event loop. Events fire in (time, seq) order; the
/// clock never moves backward; a given posting sequence always replays to
/// the same firing sequence.
class EventQueue {
 public:
  SimTime now() const { return now_; }
  bool empty() const { return heap_.empty(); }
  std::size_t pending() const { return heap_.size(); }

  std::uint64_t post(SimTime at, std::function<void()> action) {
    if (at < now_) {
      throw std::logic_error("cannot post an event into the past");
    }
    const std::uint64_t id = next_seq_++;
    heap_.push(Ev{at, id, std::move(action)});
    return id;
  }
  std::uint64_t post_in(double delay, std::function<void()> action) {
    return post(now_ + delay, std::move(action));
  }

  /// Fires everything with at <= t_end; leaves the clock at t_end.
  std::size_t run_until(SimTime t_end);

  /// Drains the queue (or stops after max_events). Returns events fired.
  std::size_t run(std::uint64_t max_events = ~0ull);

 private:
  struct Ev {
    SimTime at;
    std::uint64_t seq;
    mutable std::function<void()> action;
    bool operator<(const Ev& o) const {  // min-heap via greater-than
      if (at != o.at) return at > o.at;
      return seq > o.seq;
    }
  };
  bool step();

  SimTime now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<Ev> heap_;
};

/// Crash schedule for replicas; at most a minority may ever crash.
struct FaultPlan {
  std::vector<std::pair<proto::NodeId, SimTime>> crashes;

  void validate(int n_replicas) const;
};

/// Message transport: samples one delay per message per leg, delivers
/// through the event queue, and drops anything to or from a crashed
/// replica at delivery time.
class Network {
 public:
  Network(EventQueue& events, int n_replicas, DelayModel delays, Rng delay_rng)
      : events_(events),
        n_replicas_(n_replicas),
        delays_(std::move(delays)),
        rng_(delay_rng),
        crashed_(static_cast<std::size_t>(n_replicas), 0) {
    delays_.validate();
  }

  void on_deliver(std::function<void(const proto::Message&)> handler) {
    deliver_ = std::move(handler);
  }

  void send(const proto::Message& msg);

  /// Schedules a crash; rejects any plan that would exceed the minority
  /// bound floor((n-1)/2).
  void schedule_crash(proto::NodeId replica, SimTime at);
  void apply(const FaultPlan& plan);

  bool is_crashed(proto::NodeId node) const {
    return node >= 0 && node < n_replicas_ &&
           crashed_[static_cast<std::size_t>(node)] != 0;
  }
  int scheduled_crashes() const { return scheduled_crashes_; }
  std::uint64_t messages_sent() const { return messages_sent_; }
  std::uint64_t messages_dropped() const { return messages_dropped_; }

 private:
  EventQueue& events_;
  int n_replicas_;
  DelayModel delays_;
  Rng rng_;
  std::vector<char> crashed_;
  int scheduled_crashes_ = 0;
  std::uint64_t messages_sent_ = 0;
  std::uint64_t messages_dropped_ = 0;
  std::function<void(const proto::Message&)> deliver_;
};

}  // namespace regemu::sim
