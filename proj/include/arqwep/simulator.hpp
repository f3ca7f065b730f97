#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "arqwep/channel.hpp"
#include "arqwep/wep.hpp"

namespace arqwep {

// Frame-granularity discrete event simulation of one-way sessions between a
// sender and a receiver over erasure channels, with a passive listener whose
// only handicap is her own erasure draw per frame. No wall-clock timing is
// modeled; durations are derived analytically elsewhere.

// Passive listener bookkeeping. She records each frame (one capture draw per
// frame; retransmissions are byte-identical so the frame is either hers or
// lost) and mirrors the sender's accumulator rule on the ACK/timeout outcomes,
// which she observes perfectly: a heard ACK folds the frame's header IV into
// her running value when she captured the frame. Missing an ACKed frame loses
// that IV forever, leaving her value offset by the missed IVs from then on:
// she is blind, though she keeps folding whatever she captures afterwards.
//
// Events must arrive in transmission order, one frame event then one outcome
// event per frame; anything else is a harness bug and throws logic_error.
class EveObserver {
 public:
  explicit EveObserver(bool capture_required = true)
      : capture_required_(capture_required) {}

  void frame_seen(bool is_data, Iv24 header_iv);
  void frame_erased(bool is_data);
  void ack_seen();      // the sender heard an ACK for the open frame
  void timeout_seen();  // the sender gave up on the open frame

  Iv24 v_eve() const { return v_eve_; }
  bool blind() const { return blind_; }
  int64_t blind_at_frame() const { return blind_at_frame_; }  // -1: never
  uint64_t useful_count() const { return useful_; }
  uint64_t frames_observed() const { return frame_index_; }
  bool frame_open() const { return frame_open_; }
  bool captured_current() const;

 private:
  void open_frame(bool is_data, bool captured, Iv24 header_iv);
  void resolve(bool folded);

  bool capture_required_;
  Iv24 v_eve_{0};
  bool blind_ = false;
  int64_t blind_at_frame_ = -1;
  uint64_t useful_ = 0;
  uint64_t frame_index_ = 0;

  bool frame_open_ = false;
  bool is_data_ = false;
  bool captured_ = false;
  bool blind_at_open_ = false;
  Iv24 current_iv_{0};
};

struct SessionConfig {
  SecretKey key;
  uint64_t n_init = 0;
  uint64_t n_data = 0;
  size_t payload_len = 16;
  int attempt_limit = 7;
  bool eve_capture_required = true;
};

struct SessionMetrics {
  uint64_t seed = 0;

  uint64_t init_attempts = 0;
  uint64_t data_attempts = 0;
  uint64_t frames_tx = 0;      // total transmissions on the air
  uint64_t frames_acked = 0;   // frames resolved by a heard ACK
  uint64_t frames_abandoned = 0;
  uint64_t frames_dropped = 0;  // intact arrivals the receiver could not decrypt
  uint64_t duplicates = 0;

  uint64_t acked_init = 0;  // realized count of accepted IV-advance frames
  uint64_t acked_data = 0;
  uint64_t data_delivered = 0;  // payloads accepted by the receiver

  uint64_t useful_frames_at_eve = 0;
  int64_t blind_at_frame = -1;
  uint64_t eve_collision_frames = 0;  // blind listener's value matched anyway
  uint64_t spot_decrypt_attempts = 0;
  uint64_t spot_decrypt_successes = 0;

  uint64_t sync_violations = 0;  // receiver accepted under a seed the sender never used
  bool bob_sync_ok = true;
  bool aborted = false;  // receiver permanently desynchronized

  double overhead_ratio = 0;  // init bytes over total bytes (init modeled at 42 B)
};

// Observes every transmission (the exact wire bytes) as it happens.
using TransmitHook = std::function<void(const Bytes& wire)>;

// One full overlay session: n_init cleartext IV-advance frames, then n_data
// encrypted data frames, stop-and-wait with the configured attempt limit.
// The erasure triple is drawn once per frame and held across its attempts;
// receiver delivery uses one draw per attempt, the listener one per frame.
// Deterministic in (config, fading, seed).
SessionMetrics run_session(const SessionConfig& cfg, const FadingModel& fading,
                           uint64_t seed, const TransmitHook* on_transmit = nullptr);

struct KeyshareConfig {
  size_t k = 10;
  size_t n1_bits = 16;
  bool resend_ack_bits = false;
};

// One line of a key-sharing transcript: a single transmission and its fate.
struct KeyshareEvent {
  uint64_t index = 0;  // transmission counter, from 0
  uint32_t seq = 0;
  bool delivered = false;       // receiver got it
  bool captured = false;        // listener got it
  bool feedback_heard = false;  // sender heard the ACK (or cumulative feedback)
};

using KeyshareHook = std::function<void(const KeyshareEvent&)>;

struct KeyshareResult {
  uint64_t frames_sent = 0;
  bool completed = false;
  Bytes alice_key;
  Bytes bob_key;
  bool keys_match = false;
  bool eve_missed_any = false;  // outage (Eq.-style) indicator is !eve_missed_any
  Bytes eve_key;                // XOR of the accepted frames she captured
};

// One ARQ key-sharing run: fresh random frames until the sender has seen k of
// them ACKed; both sides distill the XOR. The listener applies the same rule
// to the accepted frames she captured. Baseline feedback holds the erasure
// triple fixed across one accepted frame's replacement attempts; with
// resend_ack_bits every transmission draws a fresh triple.
KeyshareResult run_keyshare_session(const KeyshareConfig& cfg, const FadingModel& fading,
                                    uint64_t seed, const KeyshareHook* on_event = nullptr);

struct ExperimentConfig {
  std::string id = "experiment";
  uint64_t master_seed = 0;
  size_t trials = 40;
  std::vector<uint64_t> n_init_points{0};
  uint64_t n_data = 100000;
  size_t payload_len = 16;
  int attempt_limit = 7;
  bool eve_capture_required = true;
  SecretKey wep_key;
  int jobs = 1;
  bool capture_trace = false;  // record trial-0 wire traffic per sweep point
};

struct TrialRow {
  uint64_t n_init = 0;
  size_t trial = 0;
  SessionMetrics metrics;
};

struct PointSummary {
  uint64_t n_init = 0;
  size_t trials = 0;
  double mean_useful = 0;
  double se_useful = 0;  // standard error of the mean
  double min_useful = 0;
  double max_useful = 0;
};

struct ExperimentResult {
  std::vector<TrialRow> rows;          // ordered by (point, trial)
  std::vector<PointSummary> summaries;
  std::string csv;    // stable schema, byte-identical across re-runs and job counts
  std::string trace;  // "n_init,trial,frame_hex" lines when capture_trace is set
};

inline constexpr const char* kExperimentCsvHeader =
    "experiment_id,k_i,trial,useful_frames,frames_tx,frames_acked,overhead_ratio,"
    "blind_at_frame,seed";

// Sweeps n_init points, running `trials` independent sessions per point. Each
// (point, trial) pair derives its own seed from the master seed, so results
// do not depend on scheduling; jobs > 1 only parallelizes the work.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const FadingModel& fading);

}  // namespace arqwep
