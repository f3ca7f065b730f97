#include "arqwep/key_exchange.hpp"

#include <algorithm>
#include <stdexcept>

#include "arqwep/errors.hpp"

namespace arqwep {

size_t payload_bytes_for_bits(size_t n1_bits) { return (n1_bits + 7) / 8; }

namespace {

void check_bits(size_t n1_bits) {
  if (n1_bits < 1 || n1_bits > 128)
    throw ConfigError("key frame size must be 1..128 bits");
}

Bytes draw_payload(size_t n1_bits, ChannelRng& rng) {
  Bytes p = rng.next_bytes(payload_bytes_for_bits(n1_bits));
  if (n1_bits % 8 != 0) p.back() &= static_cast<uint8_t>((1u << (n1_bits % 8)) - 1);
  return p;
}

}  // namespace

KeyAccumulator::KeyAccumulator(size_t n1_bits, size_t k)
    : acc_(payload_bytes_for_bits(n1_bits), 0), k_(k), n1_(n1_bits) {
  check_bits(n1_bits);
  if (k == 0) throw ConfigError("key length k must be positive");
}

void KeyAccumulator::accumulate(std::span<const uint8_t> payload) {
  if (complete()) throw ProtocolError("key already complete");
  if (payload.size() != acc_.size())
    throw std::invalid_argument("key frame payload size mismatch");
  for (size_t i = 0; i < acc_.size(); ++i) acc_[i] ^= payload[i];
  ++count_;
}

Bytes KeyAccumulator::distill() const {
  if (!complete())
    throw ProtocolError("incomplete key: " + std::to_string(count_) + " of " +
                        std::to_string(k_) + " frames accepted");
  return acc_;
}

KeySender::KeySender(size_t n1_bits, size_t k, bool resend_ack_bits)
    : n1_(n1_bits), resend_ack_bits_(resend_ack_bits), acc_(n1_bits, k) {}

KeyFrame KeySender::next_frame(ChannelRng& payload_rng) {
  if (complete()) throw ProtocolError("key sharing already complete");
  if (!resend_ack_bits_ && outstanding_)
    throw ProtocolError("previous frame outcome not reported");
  if (window_bits_.size() > AckHistory::kMaxWindow)
    throw ProtocolError("ack history window overflow");

  KeyFrame frame;
  frame.seq = next_seq_;
  frame.payload = draw_payload(n1_, payload_rng);
  frame.history.base_seq = window_base_;
  frame.history.bits = window_bits_;

  window_bits_.push_back(0);  // provisional until the outcome is known
  ++next_seq_;
  if (resend_ack_bits_)
    unresolved_.emplace(frame.seq, frame.payload);
  else
    outstanding_ = frame;
  return frame;
}

void KeySender::finalize_window_through(uint32_t seq) {
  if (seq <= window_base_) return;
  size_t drop = std::min<size_t>(seq - window_base_, window_bits_.size());
  window_bits_.erase(window_bits_.begin(), window_bits_.begin() + drop);
  window_base_ += static_cast<uint32_t>(drop);
}

void KeySender::on_ack_heard() {
  if (resend_ack_bits_) throw ProtocolError("cumulative mode takes feedback sets");
  if (!outstanding_) throw ProtocolError("no frame in flight");
  uint32_t seq = outstanding_->seq;
  acc_.accumulate(outstanding_->payload);
  window_bits_[seq - window_base_] = 1;
  finalize_window_through(seq);  // the receiver has seen every bit before seq
  outstanding_.reset();
}

void KeySender::on_timeout() {
  if (resend_ack_bits_) throw ProtocolError("cumulative mode takes feedback sets");
  if (!outstanding_) throw ProtocolError("no frame in flight");
  outstanding_.reset();  // the bit stays 0; the payload is replaced, not resent
}

void KeySender::on_cumulative_feedback(const std::vector<uint32_t>& received_seqs) {
  if (!resend_ack_bits_) throw ProtocolError("baseline mode takes per-frame outcomes");
  if (received_seqs.empty()) throw std::invalid_argument("feedback must cover its own frame");

  for (uint32_t seq : received_seqs) {
    if (complete()) break;
    auto it = unresolved_.find(seq);
    if (it == unresolved_.end()) continue;  // already confirmed earlier
    acc_.accumulate(it->second);
    window_bits_[seq - window_base_] = 1;
    unresolved_.erase(it);
  }

  // Statuses at or before the answering frame are now final: the receiver has
  // reported everything it got up to that point. The window is flushed only to
  // the previous feedback frame, so the newly finalized bits ride at least one
  // more delivered frame before they can be dropped.
  uint32_t answered = received_seqs.back();
  if (any_feedback_heard_) finalize_window_through(finalized_through_);
  any_feedback_heard_ = true;
  finalized_through_ = answered + 1;
  unresolved_.erase(unresolved_.begin(), unresolved_.lower_bound(answered + 1));
}

void KeyReceiver::on_frame(const KeyFrame& frame) {
  if (frame.seq != frame.history.next_seq())
    throw ProtocolError("frame sequence does not match its history window");
  resync_on_history(frame.history);
  auto [it, inserted] = frames_.try_emplace(frame.seq, Entry{frame.payload, Status::Tentative});
  if (!inserted) throw ProtocolError("duplicate key frame sequence");
}

void KeyReceiver::resync_on_history(const AckHistory& history) {
  for (const auto& [seq, entry] : frames_) {
    if (seq >= history.base_seq) break;
    if (entry.status == Status::Tentative)
      throw ProtocolError("history gap: frame " + std::to_string(seq) +
                          " left unresolved below the window");
  }
  for (size_t i = 0; i < history.bits.size(); ++i) {
    uint32_t seq = history.base_seq + static_cast<uint32_t>(i);
    auto it = frames_.find(seq);
    if (history.bits[i]) {
      if (it == frames_.end())
        throw ProtocolError("history marks frame " + std::to_string(seq) +
                            " accepted but it was never received");
      it->second.status = Status::Confirmed;
    } else if (it != frames_.end()) {
      if (it->second.status == Status::Confirmed)
        throw ProtocolError("history retracts a confirmed frame");
      it->second.status = Status::Excluded;
    }
  }
}

std::vector<uint32_t> KeyReceiver::accepted_seqs() const {
  std::vector<uint32_t> out;
  for (const auto& [seq, entry] : frames_)
    if (entry.status != Status::Excluded) out.push_back(seq);
  return out;
}

std::vector<uint32_t> KeyReceiver::received_seqs() const {
  std::vector<uint32_t> out;
  out.reserve(frames_.size());
  for (const auto& [seq, entry] : frames_) out.push_back(seq);
  return out;
}

namespace {

Bytes xor_first_k(const std::map<uint32_t, Bytes>& picked, size_t k, size_t n1_bits) {
  KeyAccumulator acc(n1_bits, k);
  for (const auto& [seq, payload] : picked) {
    if (acc.complete()) break;
    acc.accumulate(payload);
  }
  return acc.distill();
}

}  // namespace

Bytes KeyReceiver::key(size_t k) const {
  std::map<uint32_t, Bytes> picked;
  for (const auto& [seq, entry] : frames_)
    if (entry.status != Status::Excluded) picked.emplace(seq, entry.payload);
  return xor_first_k(picked, k, n1_);
}

Bytes KeyReceiver::key_first_received(size_t k) const {
  std::map<uint32_t, Bytes> picked;
  for (const auto& [seq, entry] : frames_) picked.emplace(seq, entry.payload);
  return xor_first_k(picked, k, n1_);
}

}  // namespace arqwep
