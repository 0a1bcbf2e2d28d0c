#include "regemu/simnet.hpp"

#include <cmath>

namespace regemu::sim {

void DelayModel::validate() const {
  if (components.empty()) {
    throw std::invalid_argument("delay model needs at least one component");
  }
  for (const auto& c : components) {
    if (const auto* det = std::get_if<Deterministic>(&c)) {
      if (det->seconds < 0) {
        throw std::invalid_argument("deterministic delay must be >= 0");
      }
    } else if (const auto* uni = std::get_if<UniformAsyncMs>(&c)) {
      if (uni->upper_ms <= 0) {
        throw std::invalid_argument("uniform async bound must be positive");
      }
    } else {
      const auto& exp = std::get<ExponentialRtt>(c);
      if (exp.read_rate <= 0 || exp.write_rate <= 0) {
        throw std::invalid_argument("exponential delay rates must be positive");
      }
    }
  }
}

double sample_delay(const DelayModel& model, proto::OpKind direction, Leg leg,
                    Rng& rng) {
  double total = 0.0;
  for (const auto& c : model.components) {
    if (const auto* det = std::get_if<Deterministic>(&c)) {
      total += det->seconds;
    } else if (const auto* uni = std::get_if<UniformAsyncMs>(&c)) {
      std::uniform_int_distribution<int> dist(0, uni->upper_ms - 1);
      total += static_cast<double>(dist(rng)) / 1000.0;
    } else {
      const auto& exp = std::get<ExponentialRtt>(c);
      const double rate =
          direction == proto::OpKind::Read ? exp.read_rate : exp.write_rate;
      if (exp.mode == RttMode::SplitLegs) {
        std::exponential_distribution<double> dist(2.0 * rate);
        total += dist(rng);
      } else if (leg == Leg::Request) {
        std::exponential_distribution<double> dist(rate);
        total += dist(rng);
      }
    }
  }
  return total;
}

std::size_t EventQueue::run_until(SimTime t_end) {
  std::size_t fired = 0;
  while (!heap_.empty() && heap_.top().at <= t_end) {
    step();
    ++fired;
  }
  if (t_end > now_) now_ = t_end;
  return fired;
}

std::size_t EventQueue::run(std::uint64_t max_events) {
  std::size_t fired = 0;
  while (!heap_.empty() && fired < max_events) {
    step();
    ++fired;
  }
  return fired;
}

bool EventQueue::step() {
  if (heap_.empty()) return false;
  auto action = std::move(heap_.top().action);
  now_ = heap_.top().at;
  heap_.pop();
  action();
  return true;
}

void FaultPlan::validate(int n_replicas) const {
  const int limit = (n_replicas - 1) / 2;
  if (static_cast<int>(crashes.size()) > limit) {
    throw std::invalid_argument(
        "fault plan crashes more than a minority of replicas");
  }
  for (const auto& [id, at] : crashes) {
    if (id < 0 || id >= n_replicas) {
      throw std::invalid_argument("fault plan names an unknown replica");
    }
    if (at < 0) throw std::invalid_argument("crash time must be >= 0");
  }
}

void Network::send(const proto::Message& msg) {
  ++messages_sent_;
  const proto::OpKind direction = proto::is_write_traffic(msg.kind)
                                      ? proto::OpKind::Write
                                      : proto::OpKind::Read;
  const Leg leg =
      proto::is_request(msg.kind) ? Leg::Request : Leg::Reply;
  const double delay = sample_delay(delays_, direction, leg, rng_);
  events_.post_in(delay, [this, msg] {
    if (is_crashed(msg.sender) || is_crashed(msg.receiver)) {
      ++messages_dropped_;
      return;
    }
    if (deliver_) deliver_(msg);
  });
}

void Network::schedule_crash(proto::NodeId replica, SimTime at) {
  if (replica < 0 || replica >= n_replicas_) {
    throw std::invalid_argument("cannot crash an unknown replica");
  }
  const int limit = (n_replicas_ - 1) / 2;
  if (scheduled_crashes_ + 1 > limit) {
    throw std::invalid_argument(
        "crash rejected: only a minority of replicas may crash");
  }
  ++scheduled_crashes_;
  events_.post(at, [this, replica] {
    crashed_[static_cast<std::size_t>(replica)] = 1;
  });
}

void Network::apply(const FaultPlan& plan) {
  plan.validate(n_replicas_);
  for (const auto& [id, at] : plan.crashes) schedule_crash(id, at);
}

}  // namespace regemu::sim
