#include "arqwep/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "arqwep/arq_session.hpp"
#include "arqwep/errors.hpp"
#include "arqwep/key_exchange.hpp"
#include "arqwep/rng.hpp"

namespace arqwep {

void EveObserver::open_frame(bool is_data, bool captured, Iv24 header_iv) {
  if (frame_open_) throw std::logic_error("listener frame event without an outcome");
  frame_open_ = true;
  is_data_ = is_data;
  captured_ = captured;
  current_iv_ = header_iv;
  blind_at_open_ = blind_;
}

void EveObserver::frame_seen(bool is_data, Iv24 header_iv) {
  open_frame(is_data, true, header_iv);
}

void EveObserver::frame_erased(bool is_data) { open_frame(is_data, false, Iv24(0)); }

bool EveObserver::captured_current() const {
  if (!frame_open_) throw std::logic_error("no open frame");
  return captured_;
}

void EveObserver::resolve(bool folded) {
  if (!frame_open_) throw std::logic_error("listener outcome event without a frame");
  // Usefulness is judged with the state she was in when the frame aired.
  bool useful = is_data_ && !blind_at_open_ && (captured_ || !capture_required_);
  if (folded) {
    if (captured_) {
      v_eve_ ^= current_iv_;  // mirror the accumulator even after going blind
    } else if (!blind_) {
      blind_ = true;  // this IV is folded in out there and she will never have it
      blind_at_frame_ = static_cast<int64_t>(frame_index_);
    }
  }
  if (useful) ++useful_;
  frame_open_ = false;
  ++frame_index_;
}

void EveObserver::ack_seen() { resolve(true); }
void EveObserver::timeout_seen() { resolve(false); }

SessionMetrics run_session(const SessionConfig& cfg, const FadingModel& fading,
                           uint64_t seed, const TransmitHook* on_transmit) {
  SessionMetrics m;
  m.seed = seed;

  ChannelRng fading_rng(seed, stream_id::kFading);
  ChannelRng forward_rng(seed, stream_id::kForward);
  ChannelRng eve_rng(seed, stream_id::kEavesdrop);
  ChannelRng feedback_rng(seed, stream_id::kFeedback);
  ChannelRng iv_rng(seed, stream_id::kHeaderIv);
  ChannelRng payload_rng(seed, stream_id::kPayload);

  ArqSender alice(cfg.key, cfg.attempt_limit);
  ArqReceiver bob(cfg.key);
  EveObserver eve(cfg.eve_capture_required);

  // Overhead accounting uses the 42-byte management-frame footprint for
  // IV-advance frames; data frames count their 3-byte IV header plus
  // ciphertext (the wire length field is simulator framing, not protocol).
  double init_bytes = 0, data_bytes = 0;

  uint64_t total_frames = cfg.n_init + cfg.n_data;
  for (uint64_t f = 0; f < total_frames; ++f) {
    bool is_data = f >= cfg.n_init;
    ErasureTriple triple = fading.draw_slot(fading_rng);  // held for all attempts

    const Bytes* wire;
    if (is_data) {
      Bytes payload = payload_rng.next_bytes(cfg.payload_len);
      wire = &alice.begin_data_frame(payload, iv_rng);
    } else {
      wire = &alice.begin_init_frame(iv_rng);
    }

    bool eve_captured = transmit(triple.ae, eve_rng);  // one capture draw per frame
    if (eve_captured)
      eve.frame_seen(is_data, alice.pending_header_iv());
    else
      eve.frame_erased(is_data);

    // A blind listener's captured traffic must not validate under her
    // reconstructed accumulator (sampled, since each check costs a decrypt).
    if (eve_captured && is_data && eve.blind() && m.spot_decrypt_attempts < 100) {
      ++m.spot_decrypt_attempts;
      if (wep_decrypt(decode_frame(*wire), eve.v_eve(), cfg.key))
        ++m.spot_decrypt_successes;
    }

    for (;;) {
      ++m.frames_tx;
      if (is_data) {
        ++m.data_attempts;
        data_bytes += static_cast<double>(wire->size() - 4);
      } else {
        ++m.init_attempts;
        init_bytes += 42.0;
      }
      if (on_transmit) (*on_transmit)(*wire);

      bool delivered = transmit(triple.ab, forward_rng);
      bool ack_sent = false;
      if (delivered) {
        if (is_data) {
          DataResult r = bob.on_data_frame(decode_frame(*wire));
          switch (r.kind) {
            case DataResult::Kind::Delivered:
              ++m.data_delivered;
              if (!(r.seed_used == alice.encryption_iv())) {
                ++m.sync_violations;
                m.bob_sync_ok = false;
                m.aborted = true;
              }
              ack_sent = true;
              break;
            case DataResult::Kind::Duplicate:
              ++m.duplicates;
              ack_sent = true;
              break;
            case DataResult::Kind::Drop:
              // an intact frame neither candidate could open: the receiver
              // guessed wrong somewhere in the cleartext phase and is stuck
              ++m.frames_dropped;
              m.bob_sync_ok = false;
              m.aborted = true;
              break;
          }
        } else {
          bob.on_init_frame(decode_init_frame(*wire).value());
          ack_sent = true;  // fresh and duplicate IV-advance frames both get ACKed
        }
      }

      bool ack_heard = ack_sent && transmit(triple.ba, feedback_rng);
      if (ack_heard) {
        alice.on_ack_heard();
        ++m.frames_acked;
        if (is_data)
          ++m.acked_data;
        else
          ++m.acked_init;
        eve.ack_seen();
        break;
      }
      if (!alice.can_retry()) {
        alice.abandon();
        ++m.frames_abandoned;
        eve.timeout_seen();
        break;
      }
      alice.retransmit();
    }

    if (eve.blind() && eve.v_eve() == alice.encryption_iv()) ++m.eve_collision_frames;
  }

  m.useful_frames_at_eve = eve.useful_count();
  m.blind_at_frame = eve.blind_at_frame();
  double total_bytes = init_bytes + data_bytes;
  m.overhead_ratio = total_bytes > 0 ? init_bytes / total_bytes : 0.0;
  return m;
}

namespace {

void xor_into(Bytes& acc, const Bytes& payload) {
  for (size_t i = 0; i < acc.size(); ++i) acc[i] ^= payload[i];
}

constexpr uint64_t kTransmissionCap = 100'000'000;

}  // namespace

KeyshareResult run_keyshare_session(const KeyshareConfig& cfg, const FadingModel& fading,
                                    uint64_t seed, const KeyshareHook* on_event) {
  if (cfg.k < 1) throw ConfigError("key length k must be at least 1");
  KeyshareResult res;
  uint64_t event_index = 0;
  auto emit = [&](uint32_t seq, bool delivered, bool captured, bool heard) {
    if (on_event && *on_event)
      (*on_event)(KeyshareEvent{event_index, seq, delivered, captured, heard});
    ++event_index;
  };

  ChannelRng fading_rng(seed, stream_id::kFading);
  ChannelRng forward_rng(seed, stream_id::kForward);
  ChannelRng eve_rng(seed, stream_id::kEavesdrop);
  ChannelRng feedback_rng(seed, stream_id::kFeedback);
  ChannelRng payload_rng(seed, stream_id::kKeyPayload);

  KeySender alice(cfg.n1_bits, cfg.k, cfg.resend_ack_bits);
  KeyReceiver bob(cfg.n1_bits);
  Bytes eve_acc(payload_bytes_for_bits(cfg.n1_bits), 0);

  if (!cfg.resend_ack_bits) {
    // One accepted frame per epoch; the erasure triple holds across the
    // replacement attempts within the epoch.
    for (size_t epoch = 0; epoch < cfg.k; ++epoch) {
      ErasureTriple triple = fading.draw_slot(fading_rng);
      for (;;) {
        if (res.frames_sent >= kTransmissionCap)
          throw ProtocolError("key sharing cannot complete on this channel");
        KeyFrame frame = alice.next_frame(payload_rng);
        ++res.frames_sent;
        bool delivered = transmit(triple.ab, forward_rng);
        bool captured = transmit(triple.ae, eve_rng);
        if (delivered) {
          bob.on_frame(frame);
          if (transmit(triple.ba, feedback_rng)) {
            alice.on_ack_heard();
            if (captured)
              xor_into(eve_acc, frame.payload);
            else
              res.eve_missed_any = true;
            emit(frame.seq, true, captured, true);
            break;
          }
        }
        emit(frame.seq, delivered, captured, false);
        alice.on_timeout();
      }
    }
  } else {
    // Cumulative feedback: a steady stream of fresh frames; the accepted set
    // converges to the receiver's first k receptions. Fresh triple per frame.
    size_t receptions = 0;
    while (!alice.complete()) {
      if (res.frames_sent >= kTransmissionCap)
        throw ProtocolError("key sharing cannot complete on this channel");
      ErasureTriple triple = fading.draw_slot(fading_rng);
      KeyFrame frame = alice.next_frame(payload_rng);
      ++res.frames_sent;
      bool delivered = transmit(triple.ab, forward_rng);
      bool captured = transmit(triple.ae, eve_rng);
      bool heard = false;
      if (delivered) {
        bob.on_frame(frame);
        ++receptions;
        if (receptions <= cfg.k) {  // destined to be one of the key frames
          if (captured)
            xor_into(eve_acc, frame.payload);
          else
            res.eve_missed_any = true;
        }
        if (transmit(triple.ba, feedback_rng)) {
          alice.on_cumulative_feedback(bob.received_seqs());
          heard = true;
        }
      }
      emit(frame.seq, delivered, captured, heard);
    }
  }

  res.completed = alice.complete();
  res.alice_key = alice.key();
  res.bob_key = cfg.resend_ack_bits ? bob.key_first_received(cfg.k) : bob.key(cfg.k);
  res.keys_match = res.alice_key == res.bob_key;
  res.eve_key = std::move(eve_acc);
  return res;
}

namespace {

void append_csv_row(std::string& csv, const std::string& id, const TrialRow& row) {
  const SessionMetrics& m = row.metrics;
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%s,%llu,%zu,%llu,%llu,%llu,%.9g,%lld,%llu\n",
                id.c_str(), static_cast<unsigned long long>(row.n_init), row.trial,
                static_cast<unsigned long long>(m.useful_frames_at_eve),
                static_cast<unsigned long long>(m.frames_tx),
                static_cast<unsigned long long>(m.frames_acked), m.overhead_ratio,
                static_cast<long long>(m.blind_at_frame),
                static_cast<unsigned long long>(m.seed));
  csv += buf;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const FadingModel& fading) {
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (cfg.n_init_points.empty()) throw ConfigError("need at least one n_init point");

  size_t points = cfg.n_init_points.size();
  size_t total = points * cfg.trials;
  std::vector<TrialRow> rows(total);
  std::vector<std::string> traces(points);

  auto run_task = [&](size_t idx) {
    size_t p = idx / cfg.trials;
    size_t t = idx % cfg.trials;
    SessionConfig sc;
    sc.key = cfg.wep_key;
    sc.n_init = cfg.n_init_points[p];
    sc.n_data = cfg.n_data;
    sc.payload_len = cfg.payload_len;
    sc.attempt_limit = cfg.attempt_limit;
    sc.eve_capture_required = cfg.eve_capture_required;
    uint64_t trial_seed = derive_seed(cfg.master_seed, {static_cast<uint64_t>(p),
                                                        static_cast<uint64_t>(t)});
    std::string local_trace;
    TransmitHook hook;
    const TransmitHook* hook_ptr = nullptr;
    if (cfg.capture_trace && t == 0) {
      uint64_t point = cfg.n_init_points[p];
      hook = [&local_trace, point](const Bytes& wire) {
        local_trace += std::to_string(point);
        local_trace += ",0,";
        local_trace += hex_encode(wire);
        local_trace += '\n';
      };
      hook_ptr = &hook;
    }
    rows[idx] = TrialRow{cfg.n_init_points[p], t, run_session(sc, fading, trial_seed, hook_ptr)};
    if (cfg.capture_trace && t == 0) traces[p] = std::move(local_trace);
  };

  int jobs = std::max(1, cfg.jobs);
  if (jobs == 1 || total == 1) {
    for (size_t i = 0; i < total; ++i) run_task(i);
  } else {
    // Each task is self-seeded; threads only divide the work.
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (size_t i; (i = next.fetch_add(1)) < total;) {
        try {
          run_task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    size_t nthreads = std::min(static_cast<size_t>(jobs), total);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  ExperimentResult result;
  result.rows = std::move(rows);

  result.csv = kExperimentCsvHeader;
  result.csv += '\n';
  for (const auto& row : result.rows) append_csv_row(result.csv, cfg.id, row);

  for (size_t p = 0; p < points; ++p) {
    PointSummary s;
    s.n_init = cfg.n_init_points[p];
    s.trials = cfg.trials;
    double sum = 0, sum_sq = 0;
    s.min_useful = std::numeric_limits<double>::infinity();
    s.max_useful = -std::numeric_limits<double>::infinity();
    for (size_t t = 0; t < cfg.trials; ++t) {
      double u = static_cast<double>(
          result.rows[p * cfg.trials + t].metrics.useful_frames_at_eve);
      sum += u;
      sum_sq += u * u;
      s.min_useful = std::min(s.min_useful, u);
      s.max_useful = std::max(s.max_useful, u);
    }
    double n = static_cast<double>(cfg.trials);
    s.mean_useful = sum / n;
    if (cfg.trials > 1) {
      double var = (sum_sq - n * s.mean_useful * s.mean_useful) / (n - 1.0);
      s.se_useful = std::sqrt(std::max(0.0, var) / n);
    }
    result.summaries.push_back(s);
  }

  if (cfg.capture_trace)
    for (const auto& tr : traces) result.trace += tr;

  return result;
}

}  // namespace arqwep
