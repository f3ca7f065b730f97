#include "arqwep/arq_session.hpp"

#include <algorithm>

#include "arqwep/errors.hpp"

namespace arqwep {

Bytes encode_init_frame(const InitFrame& frame) {
  Bytes out;
  out.reserve(4);
  out.push_back(kIvAdvanceFrameType);
  auto iv = frame.iv.to_bytes();
  out.insert(out.end(), iv.begin(), iv.end());
  return out;
}

std::optional<InitFrame> decode_init_frame(std::span<const uint8_t> wire, size_t* consumed) {
  if (wire.size() < 4 || wire[0] != kIvAdvanceFrameType) return std::nullopt;
  if (consumed) *consumed = 4;
  return InitFrame{Iv24::from_bytes(wire.data() + 1)};
}

ArqSender::ArqSender(const SecretKey& key, int attempt_limit)
    : key_(key), attempt_limit_(attempt_limit) {
  if (attempt_limit < 1) throw ConfigError("attempt limit must be at least 1");
}

const Bytes& ArqSender::begin_init_frame(ChannelRng& iv_rng) {
  if (pending_) throw ProtocolError("frame already in flight");
  if (in_data_phase_) throw ProtocolError("IV-advance frames must precede data");
  Iv24 iv(iv_rng.next_iv24());
  while (last_init_iv_ && iv == *last_init_iv_) iv = Iv24(iv_rng.next_iv24());
  last_init_iv_ = iv;
  pending_ = Pending{true, iv, 0, encode_init_frame(InitFrame{iv}), 1};
  return pending_->wire;
}

const Bytes& ArqSender::begin_data_frame(std::span<const uint8_t> payload, ChannelRng& iv_rng) {
  if (pending_) throw ProtocolError("frame already in flight");
  if (window_bits_.size() > AckHistory::kMaxWindow)
    throw ProtocolError("ack history window overflow");
  in_data_phase_ = true;

  AckHistory history{window_base_, window_bits_};
  Bytes plaintext = history.encode();
  plaintext.insert(plaintext.end(), payload.begin(), payload.end());

  Iv24 header_iv(iv_rng.next_iv24());
  WepFrame frame = wep_encrypt(plaintext, accumulator_, header_iv, key_);
  pending_ = Pending{false, header_iv, next_data_seq_, encode_frame(frame), 1};
  window_bits_.push_back(0);  // provisional until ACKed or abandoned
  ++next_data_seq_;
  return pending_->wire;
}

const Bytes& ArqSender::retransmit() {
  if (!pending_) throw ProtocolError("no frame in flight");
  if (pending_->attempts >= attempt_limit_) throw ProtocolError("attempt limit reached");
  ++pending_->attempts;
  return pending_->wire;
}

const Bytes& ArqSender::current_wire() const {
  if (!pending_) throw ProtocolError("no frame in flight");
  return pending_->wire;
}

Iv24 ArqSender::pending_header_iv() const {
  if (!pending_) throw ProtocolError("no frame in flight");
  return pending_->header_iv;
}

void ArqSender::on_ack_heard() {
  if (!pending_) throw ProtocolError("no frame in flight");
  accumulator_ ^= pending_->header_iv;
  if (pending_->is_init) {
    ++acked_init_count_;
  } else {
    uint32_t seq = pending_->seq;
    window_bits_[seq - window_base_] = 1;
    // The heard ACK answered an attempt that carried every bit below seq, so
    // the receiver has seen those outcomes and they can leave the window.
    window_bits_.erase(window_bits_.begin(), window_bits_.begin() + (seq - window_base_));
    window_base_ = seq;
  }
  pending_.reset();
}

void ArqSender::abandon() {
  if (!pending_) throw ProtocolError("no frame in flight");
  if (pending_->attempts < attempt_limit_)
    throw ProtocolError("abandoned with attempts remaining");
  pending_.reset();  // the history bit stays 0 and the IV is never folded
}

ArqReceiver::InitResult ArqReceiver::on_init_frame(const InitFrame& frame) {
  if (data_seen_ || pending_seq_)
    throw ProtocolError("IV-advance frame arrived after data");
  if (pending_iv_ && frame.iv == *pending_iv_) return InitResult::Duplicate;
  if (pending_iv_) committed_ ^= *pending_iv_;  // optimistic: assume it was ACKed
  pending_iv_ = frame.iv;
  return InitResult::Accepted;
}

std::vector<Iv24> ArqReceiver::candidate_ivs() const {
  std::vector<Iv24> out;
  if (pending_iv_) out.push_back(committed_ ^ *pending_iv_);
  if (out.empty() || !(out[0] == committed_)) out.push_back(committed_);
  return out;
}

ArqReceiver::Fate ArqReceiver::fate_of(uint32_t seq) const {
  if (seq >= fates_.size()) return Fate::Unknown;
  return static_cast<Fate>(fates_[seq]);
}

void ArqReceiver::set_fate(uint32_t seq, Fate fate) {
  if (seq >= fates_.size()) fates_.resize(seq + 1, 0);
  fates_[seq] = static_cast<uint8_t>(fate);
}

void ArqReceiver::check_history(const AckHistory& history) const {
  for (size_t i = 0; i < history.bits.size(); ++i) {
    uint32_t seq = history.base_seq + static_cast<uint32_t>(i);
    Fate fate = fate_of(seq);
    if (history.bits[i]) {
      if (fate != Fate::Folded)
        throw ProtocolError("history claims an ACK this receiver never granted");
    } else {
      if (fate == Fate::Folded)
        throw ProtocolError("history retracts a frame known to be ACKed");
    }
  }
}

DataResult ArqReceiver::on_data_frame(const WepFrame& frame) {
  struct Hit {
    Iv24 seed{0};
    bool folded = false;  // this seed assumes the pending IV was folded
    AckHistory history;
    Bytes payload;
    uint32_t seq = 0;
  };

  auto attempt = [&](Iv24 seed, bool folded) -> std::optional<Hit> {
    auto plaintext = wep_decrypt(frame, seed, key_);
    if (!plaintext) return std::nullopt;
    size_t consumed = 0;
    auto history = AckHistory::decode_prefix(*plaintext, &consumed);
    if (!history) return std::nullopt;  // checksum collided but the frame is not ours
    Hit hit;
    hit.seed = seed;
    hit.folded = folded;
    hit.history = std::move(*history);
    hit.payload.assign(plaintext->begin() + consumed, plaintext->end());
    hit.seq = hit.history.next_seq();
    return hit;
  };

  std::optional<Hit> hit;
  bool seeds_equal = !pending_iv_ || (*pending_iv_ == Iv24(0));
  if (pending_iv_) hit = attempt(committed_ ^ *pending_iv_, true);
  if (!hit && !(pending_iv_ && seeds_equal)) hit = attempt(committed_, false);
  if (!hit) return DataResult{};  // undecryptable under both views: drop, no ACK

  // When the pending IV is zero both views share one seed; the sequence number
  // says which one the sender is living in (folding zero is a no-op anyway).
  if (seeds_equal && pending_seq_ && hit->seq == *pending_seq_) hit->folded = false;

  if (hit->folded) {
    // The sender moved on with the pending IV folded in: our ACK was heard.
    if (pending_seq_ && hit->seq <= *pending_seq_)
      throw ProtocolError("sequence did not advance past the ACKed frame");
    committed_ ^= *pending_iv_;
    if (pending_seq_) set_fate(*pending_seq_, Fate::Folded);
  } else if (pending_seq_ && hit->seq == *pending_seq_) {
    // Same frame under the frozen accumulator: a retransmission.
    check_history(hit->history);
    DataResult result;
    result.kind = DataResult::Kind::Duplicate;
    result.seq = hit->seq;
    result.seed_used = hit->seed;
    return result;
  } else if (pending_iv_) {
    // A new frame under the frozen accumulator: the sender gave up on the
    // pending frame, so its IV never joins the accumulator.
    if (pending_seq_ && hit->seq < *pending_seq_)
      throw ProtocolError("sequence went backward");
    if (pending_seq_) set_fate(*pending_seq_, Fate::Abandoned);
  }

  if (fate_of(hit->seq) != Fate::Unknown)
    throw ProtocolError("delivered frame reuses a resolved sequence number");
  check_history(hit->history);

  pending_iv_ = frame.header_iv;
  pending_seq_ = hit->seq;
  data_seen_ = true;

  DataResult result;
  result.kind = DataResult::Kind::Delivered;
  result.seq = hit->seq;
  result.payload = std::move(hit->payload);
  result.seed_used = hit->seed;
  return result;
}

}  // namespace arqwep
