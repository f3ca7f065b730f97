#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "arqwep/ack_history.hpp"
#include "arqwep/rng.hpp"
#include "arqwep/wep.hpp"

namespace arqwep {

// Stop-and-wait ARQ where the frame encryption IV is hidden from the wire.
//
// Every frame carries a random header IV, but the keystream for a data frame
// is seeded with the XOR of the header IVs of all frames the sender has seen
// ACKed so far (zero at session start). The header IV of the frame itself
// only joins that accumulator once its own ACK is heard, so a passive
// listener must capture every ACKed frame to keep decrypting.
//
// A session opens with cleartext IV-advance frames (type byte, 3-byte IV)
// whose only job is to stir the accumulator before data flows, then switches
// to encrypted data frames. Data frames embed the sender's ACK history ahead
// of the payload so the receiver can confirm its own view of the accumulator.
//
// Loss handling: an unACKed frame is retransmitted byte-identically up to the
// attempt limit, then abandoned; an abandoned frame's IV never joins the
// accumulator. The receiver cannot always observe the difference between "my
// ACK was heard" and "the sender gave up", so it keeps both accumulator
// candidates and lets the next decryptable frame settle which one is real.

constexpr uint8_t kIvAdvanceFrameType = 0xA1;
constexpr int kDefaultAttemptLimit = 7;

struct InitFrame {
  Iv24 iv{0};
};

// Wire form: [type byte][3-byte IV, little endian]. Returns nullopt when the
// bytes are short or the type byte does not match.
Bytes encode_init_frame(const InitFrame& frame);
std::optional<InitFrame> decode_init_frame(std::span<const uint8_t> wire,
                                           size_t* consumed = nullptr);

class ArqSender {
 public:
  explicit ArqSender(const SecretKey& key, int attempt_limit = kDefaultAttemptLimit);

  // Starts an IV-advance frame with a fresh header IV (redrawn until it
  // differs from the previous IV-advance frame's, so the receiver can tell a
  // retransmission from a successor). ProtocolError when a frame is already
  // in flight or data frames have been sent.
  const Bytes& begin_init_frame(ChannelRng& iv_rng);

  // Starts a data frame: plaintext = encoded ACK history followed by the
  // payload, encrypted under the current accumulator with a fresh header IV.
  // ProtocolError when a frame is in flight or the history window is full.
  const Bytes& begin_data_frame(std::span<const uint8_t> payload, ChannelRng& iv_rng);

  // The in-flight frame's exact bytes again. ProtocolError when nothing is in
  // flight or the attempt limit is already reached.
  const Bytes& retransmit();

  bool frame_in_flight() const { return pending_.has_value(); }
  bool can_retry() const { return pending_ && pending_->attempts < attempt_limit_; }
  int attempts() const { return pending_ ? pending_->attempts : 0; }
  const Bytes& current_wire() const;
  Iv24 pending_header_iv() const;

  // Resolves the in-flight frame. An ACK folds its header IV into the
  // accumulator (and flushes the history window up to it); abandoning leaves
  // the accumulator untouched and records the frame as never acknowledged.
  void on_ack_heard();
  void abandon();

  Iv24 encryption_iv() const { return accumulator_; }
  uint32_t next_data_seq() const { return next_data_seq_; }
  uint64_t acked_init_count() const { return acked_init_count_; }
  bool in_data_phase() const { return in_data_phase_; }
  size_t history_window_size() const { return window_bits_.size(); }

 private:
  struct Pending {
    bool is_init;
    Iv24 header_iv{0};
    uint32_t seq;  // data frames only
    Bytes wire;
    int attempts;
  };

  SecretKey key_;
  int attempt_limit_;
  Iv24 accumulator_{0};
  std::optional<Pending> pending_;
  std::optional<Iv24> last_init_iv_;
  bool in_data_phase_ = false;
  uint32_t next_data_seq_ = 0;
  uint32_t window_base_ = 0;
  std::vector<uint8_t> window_bits_;  // outcomes for data seqs [base, next)
  uint64_t acked_init_count_ = 0;
};

// Receiver outcome for one data frame.
struct DataResult {
  enum class Kind {
    Delivered,  // new payload accepted; caller must ACK
    Duplicate,  // retransmission of the current pending frame; caller must re-ACK
    Drop,       // no accumulator candidate produced a valid frame; no ACK
  };
  Kind kind = Kind::Drop;
  uint32_t seq = 0;
  Bytes payload;
  Iv24 seed_used{0};  // accumulator value that decrypted the frame
};

class ArqReceiver {
 public:
  explicit ArqReceiver(const SecretKey& key) : key_(key) {}

  enum class InitResult { Accepted, Duplicate };

  // Cleartext IV-advance frame. A repeat of the pending IV is a
  // retransmission; a new IV implies the previous one was ACKed, so it is
  // folded optimistically (the cleartext phase carries nothing that could
  // distinguish an ACKed predecessor from an abandoned one; a wrong guess
  // surfaces later as an undecryptable session). Caller ACKs either way.
  InitResult on_init_frame(const InitFrame& frame);

  // Encrypted data frame. Tries the two accumulator candidates (pending IV
  // folded in, pending IV left out); a valid checksum plus a parseable
  // embedded history identifies the real one and settles the pending frame's
  // fate. The embedded history is then checked against everything this
  // receiver already knows; contradictions raise ProtocolError.
  DataResult on_data_frame(const WepFrame& frame);

  Iv24 committed_iv() const { return committed_; }
  std::optional<Iv24> pending_iv() const { return pending_iv_; }
  std::optional<uint32_t> pending_seq() const { return pending_seq_; }

  // Both accumulator values the receiver considers possible.
  std::vector<Iv24> candidate_ivs() const;

 private:
  enum class Fate : uint8_t { Unknown = 0, Folded = 1, Abandoned = 2 };

  void check_history(const AckHistory& history) const;
  Fate fate_of(uint32_t seq) const;
  void set_fate(uint32_t seq, Fate fate);

  SecretKey key_;
  Iv24 committed_{0};
  std::optional<Iv24> pending_iv_;
  std::optional<uint32_t> pending_seq_;  // engaged only for a pending data frame
  bool data_seen_ = false;
  std::vector<uint8_t> fates_;  // resolved data frames, indexed by seq
};

}  // namespace arqwep
