#include "regemu/proto.hpp"

namespace regemu::proto {

std::vector<Message> ReplicaState::on_message(const Message& msg) {
  if (crashed_) return {};

  std::vector<Message> out;
  switch (msg.kind) {
    case MsgKind::Query: {
      Message reply;
      reply.kind = MsgKind::QueryReply;
      reply.payload = get(msg.payload.key);
      reply.sender = id_;
      reply.receiver = msg.sender;
      reply.op_id = msg.op_id;
      out.push_back(reply);
      break;
    }
    case MsgKind::Update:
    case MsgKind::WriteBack: {
      auto it = store_.find(msg.payload.key);
      if (it == store_.end()) {
        if (msg.payload.version.seq > 0) store_[msg.payload.key] = msg.payload;
      } else if (it->second.version < msg.payload.version) {
        it->second = msg.payload;
      }
      Message ack;
      ack.kind = msg.kind == MsgKind::Update ? MsgKind::Ack
                                             : MsgKind::WriteBackAck;
      ack.payload.key = msg.payload.key;
      ack.sender = id_;
      ack.receiver = msg.sender;
      ack.op_id = msg.op_id;
      out.push_back(ack);
      break;
    }
    default:
      break;  // client-bound kinds are ignored on replicas
  }
  return out;
}

std::vector<Message> Writer::begin_write(Key key, Value value, OpId op_id) {
  if (pending_) {
    throw std::logic_error(
        "writer already has a pending write; executions must be well-formed");
  }
  const std::uint64_t version = ++next_version_[key];

  ClientOp op;
  op.op_id = op_id;
  op.kind = OpKind::Write;
  op.key = key;
  op.quorum = majority_quorum(n_replicas_);
  op.chosen = VersionedValue{key, value, {version}};
  pending_ = op;

  std::vector<Message> out;
  out.reserve(n_replicas_);
  for (NodeId r = 0; r < n_replicas_; ++r) {
    Message m;
    m.kind = MsgKind::Update;
    m.payload = op.chosen;
    m.sender = id_;
    m.receiver = r;
    m.op_id = op_id;
    out.push_back(m);
  }
  return out;
}

void Writer::on_message(const Message& msg) {
  if (!pending_ || pending_->done) return;
  if (msg.kind != MsgKind::Ack || msg.op_id != pending_->op_id) return;

  pending_->responded.insert(msg.sender);
  if (static_cast<int>(pending_->responded.size()) >= pending_->quorum) {
    pending_->done = true;
    completed_ = Completion{pending_->op_id, OpKind::Write, pending_->key,
                            pending_->chosen};
    pending_.reset();
  }
}

std::optional<Completion> Writer::take_completed() {
  auto c = completed_;
  completed_.reset();
  return c;
}

std::vector<Message> Reader::begin_read(Key key, OpId op_id) {
  if (pending_) {
    throw std::logic_error(
        "reader already has a pending read; executions must be well-formed");
  }
  ClientOp op;
  op.op_id = op_id;
  op.kind = OpKind::Read;
  op.protocol = protocol_;
  op.key = key;
  op.quorum = majority_quorum(n_replicas_);
  pending_ = op;

  std::vector<Message> out;
  out.reserve(n_replicas_);
  for (NodeId r = 0; r < n_replicas_; ++r) {
    Message m;
    m.kind = MsgKind::Query;
    m.payload.key = key;
    m.sender = id_;
    m.receiver = r;
    m.op_id = op_id;
    out.push_back(m);
  }
  return out;
}

std::vector<Message> Reader::on_message(const Message& msg) {
  if (!pending_ || msg.op_id != pending_->op_id) return {};
  ClientOp& op = *pending_;

  if (op.phase == 1) {
    if (msg.kind != MsgKind::QueryReply) return {};
    if (!op.responded.insert(msg.sender).second) return {};
    if (op.responded.size() == 1 || op.chosen.version < msg.payload.version) {
      op.chosen = msg.payload;
    }
    if (static_cast<int>(op.responded.size()) < op.quorum) return {};

    if (protocol_ == Protocol::TwoAM) {
      completed_ = Completion{op.op_id, OpKind::Read, op.key, op.chosen};
      pending_.reset();
      return {};
    }

    // ABD: propagate the chosen pair to a majority before returning.
    op.phase = 2;
    op.responded.clear();
    std::vector<Message> out;
    out.reserve(n_replicas_);
    for (NodeId r = 0; r < n_replicas_; ++r) {
      Message m;
      m.kind = MsgKind::WriteBack;
      m.payload = op.chosen;
      m.sender = id_;
      m.receiver = r;
      m.op_id = op.op_id;
      out.push_back(m);
    }
    return out;
  }

  if (msg.kind != MsgKind::WriteBackAck) return {};
  if (!op.responded.insert(msg.sender).second) return {};
  if (static_cast<int>(op.responded.size()) >= op.quorum) {
    completed_ = Completion{op.op_id, OpKind::Read, op.key, op.chosen};
    pending_.reset();
  }
  return {};
}

std::optional<Completion> Reader::take_completed() {
  auto c = completed_;
  completed_.reset();
  return c;
}

}  // namespace regemu::proto
