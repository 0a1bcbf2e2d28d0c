#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

namespace regemu::proto {

using Key = std::int32_t;
using Value = std::int64_t;
using NodeId = std::int32_t;
using OpId = std::uint64_t;

inline constexpr Value kInitialValue = 0;

// Writer-local, per-key sequence number. Version 0 is reserved for the
// initial value every replica implicitly holds.
struct Version {
  std::uint64_t seq = 0;
  friend auto operator<=>(const Version&, const Version&) = default;
};

struct VersionedValue {
  Key key = 0;
  Value value = kInitialValue;
  Version version{};
};

enum class MsgKind : std::uint8_t {
  Query,
  QueryReply,
  Update,
  Ack,
  WriteBack,
  WriteBackAck,
};

enum class OpKind : std::uint8_t { Read, Write };

enum class Protocol : std::uint8_t { TwoAM, Abd };

struct Message {
  MsgKind kind = MsgKind::Query;
  VersionedValue payload;  // Query carries only payload.key
  NodeId sender = -1;
  NodeId receiver = -1;
  OpId op_id = 0;
};

// Update/Ack belong to a write round-trip; every other kind is part of a
// read (the ABD write-back rides on the read).
inline bool is_write_traffic(MsgKind k) {
  return k == MsgKind::Update || k == MsgKind::Ack;
}

inline bool is_request(MsgKind k) {
  return k == MsgKind::Query || k == MsgKind::Update || k == MsgKind::WriteBack;
}

inline int majority_quorum(int n_replicas) { return n_replicas / 2 + 1; }

/// Replica message handler. Handlers run atomically and are deterministic:
/// replaying the same message sequence reproduces the same state.
class ReplicaState {
 public:
  ReplicaState(NodeId id, int n_replicas)
      : id_(id), n_replicas_(n_replicas) {}

  NodeId id() const { return id_; }
  bool crashed() const { return crashed_; }
  void crash() { crashed_ = true; }

  /// Stored pair for `key`; unknown keys hold (key, initial, version 0).
  VersionedValue get(Key key) const {
    auto it = store_.find(key);
    if (it == store_.end()) return VersionedValue{key, kInitialValue, {0}};
    return it->second;
  }

  /// Processes one message; returns replies (none if crashed). Updates and
  /// write-backs overwrite only strictly larger versions but are always
  /// acknowledged.
  std::vector<Message> on_message(const Message& msg);

 private:
  NodeId id_;
  int n_replicas_;
  bool crashed_ = false;
  std::map<Key, VersionedValue> store_;
};

struct Completion {
  OpId op_id = 0;
  OpKind kind = OpKind::Read;
  Key key = 0;
  VersionedValue result;  // written value, or the value the read returned
};

// State of one in-flight client operation. Phase 2 exists only for the
// ABD read write-back; one-round-trip reads and writes never leave phase 1.
struct ClientOp {
  OpId op_id = 0;
  OpKind kind = OpKind::Read;
  Protocol protocol = Protocol::TwoAM;
  int phase = 1;
  Key key = 0;
  int quorum = 0;
  std::set<NodeId> responded;  // distinct replicas in the current phase
  VersionedValue chosen;
  bool done = false;
};

/// The unique writer for the register set. Versions per key are strictly
/// increasing local sequence numbers.
class Writer {
 public:
  Writer(NodeId id, int n_replicas) : id_(id), n_replicas_(n_replicas) {}

  NodeId id() const { return id_; }
  bool idle() const { return !pending_.has_value(); }
  const ClientOp* pending() const { return pending_ ? &*pending_ : nullptr; }

  /// Starts a write: bumps the key's version and emits one Update per
  /// replica. Throws if a write is already pending (well-formedness).
  std::vector<Message> begin_write(Key key, Value value, OpId op_id);

  /// Feeds an incoming message; late or unrelated replies are dropped.
  void on_message(const Message& msg);

  std::optional<Completion> take_completed();

 private:
  NodeId id_;
  int n_replicas_;
  std::map<Key, std::uint64_t> next_version_;
  std::optional<ClientOp> pending_;
  std::optional<Completion> completed_;
};

/// A reader client running either the one-round-trip protocol or the ABD
/// baseline with its write-back phase.
class Reader {
 public:
  Reader(NodeId id, int n_replicas, Protocol protocol)
      : id_(id), n_replicas_(n_replicas), protocol_(protocol) {}

  NodeId id() const { return id_; }
  bool idle() const { return !pending_.has_value(); }
  const ClientOp* pending() const { return pending_ ? &*pending_ : nullptr; }

  /// Starts a read: emits one Query per replica. Throws if an operation is
  /// already pending on this client.
  std::vector<Message> begin_read(Key key, OpId op_id);

  /// Feeds an incoming message; may emit the write-back round (ABD only).
  std::vector<Message> on_message(const Message& msg);

  std::optional<Completion> take_completed();

 private:
  NodeId id_;
  int n_replicas_;
  Protocol protocol_;
  std::optional<ClientOp> pending_;
  std::optional<Completion> completed_;
};

}  // namespace regemu::proto
