#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "arqwep/ack_history.hpp"
#include "arqwep/rng.hpp"
#include "arqwep/wep.hpp"

namespace arqwep {

// ARQ key sharing: the sender streams uniformly random frames; both sides
// distill the key as the XOR of the first k frames the sender saw ACKed.
// Every transmission is a fresh frame (a timed-out payload is replaced, never
// retransmitted), and each frame carries the sender's ACK history so the
// receiver can drop frames whose ACKs were lost on the feedback link.

size_t payload_bytes_for_bits(size_t n1_bits);

struct KeyFrame {
  uint32_t seq = 0;
  Bytes payload;  // n1 bits, top bits of the last byte zero
  AckHistory history;
};

// Running XOR of accepted key frames.
class KeyAccumulator {
 public:
  KeyAccumulator(size_t n1_bits, size_t k);

  void accumulate(std::span<const uint8_t> payload);  // ProtocolError once complete
  bool complete() const { return count_ == k_; }
  size_t accepted_count() const { return count_; }
  size_t target() const { return k_; }
  const Bytes& value() const { return acc_; }

  // The distilled key; ProtocolError while fewer than k frames are in.
  Bytes distill() const;

 private:
  Bytes acc_;
  size_t count_ = 0;
  size_t k_;
  size_t n1_;
};

// Sender side (Alice). Baseline feedback: each ACK covers only the frame it
// answers; a lost ACK looks like a timeout and the payload is discarded.
// With resend_ack_bits the receiver's feedback is cumulative (it re-reports
// every earlier reception), so a frame the receiver got is never wasted and
// the accepted set converges to the receiver's first k receptions.
class KeySender {
 public:
  KeySender(size_t n1_bits, size_t k, bool resend_ack_bits = false);

  bool complete() const { return acc_.complete(); }
  size_t accepted_count() const { return acc_.accepted_count(); }
  uint64_t frames_sent() const { return next_seq_; }
  bool cumulative_feedback() const { return resend_ack_bits_; }

  // Fresh uniformly random frame. Baseline mode requires the previous frame's
  // outcome to have been reported first; ProtocolError once the key is complete.
  KeyFrame next_frame(ChannelRng& payload_rng);

  // Baseline outcome reports for the outstanding frame.
  void on_ack_heard();
  void on_timeout();

  // Cumulative-feedback mode: the receiver's reported reception set, covering
  // every frame up to and including the one that carried the feedback.
  void on_cumulative_feedback(const std::vector<uint32_t>& received_seqs);

  Bytes key() const { return acc_.distill(); }

 private:
  void finalize_window_through(uint32_t seq);

  size_t n1_;
  bool resend_ack_bits_;
  KeyAccumulator acc_;
  uint32_t next_seq_ = 0;
  std::optional<KeyFrame> outstanding_;           // baseline: at most one in flight
  std::map<uint32_t, Bytes> unresolved_;          // cumulative mode: sent, fate unknown
  uint32_t window_base_ = 0;                      // history window start
  std::vector<uint8_t> window_bits_;              // statuses for [base, next_seq)
  uint32_t finalized_through_ = 0;                // cumulative mode flush boundary
  bool any_feedback_heard_ = false;
};

// Receiver side (Bob). Tentatively accepts every delivered frame, then
// reconciles against the embedded history.
class KeyReceiver {
 public:
  explicit KeyReceiver(size_t n1_bits) : n1_(n1_bits) {}

  // Processes one delivered frame. The caller is responsible for sending the ACK.
  void on_frame(const KeyFrame& frame);

  // Applies a history window: drops tentatively accepted frames the sender
  // never saw ACKed, restores ones a cumulative sender confirmed late.
  // ProtocolError when the window starts beyond an unresolved tentative frame.
  void resync_on_history(const AckHistory& history);

  // Accepted (confirmed or still-tentative) frames, ascending seq.
  std::vector<uint32_t> accepted_seqs() const;
  // Every reception, ascending seq; cumulative-feedback content.
  std::vector<uint32_t> received_seqs() const;

  // XOR of the first k accepted frames; ProtocolError if fewer exist.
  Bytes key(size_t k) const;
  // Cumulative-feedback mode key: XOR of the first k receptions.
  Bytes key_first_received(size_t k) const;

 private:
  enum class Status : uint8_t { Tentative, Confirmed, Excluded };
  struct Entry {
    Bytes payload;
    Status status = Status::Tentative;
  };

  size_t n1_;
  std::map<uint32_t, Entry> frames_;
};

}  // namespace arqwep
