#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "arqwep/analysis.hpp"
#include "arqwep/errors.hpp"
#include "arqwep/simulator.hpp"

using namespace arqwep;

namespace {

const SecretKey kKey = SecretKey::from_hex("00112233445566778899aabbcc");

FadingModel det(double ab, double ae, double ba) {
  return FadingModel::deterministic({ab, ae, ba});
}

SessionConfig session_cfg(uint64_t n_init, uint64_t n_data) {
  SessionConfig cfg;
  cfg.key = kKey;
  cfg.n_init = n_init;
  cfg.n_data = n_data;
  return cfg;
}

}  // namespace

TEST_CASE("listener bookkeeping: ordering, folding, blindness") {
  EveObserver eve;
  CHECK_THROWS_AS(eve.ack_seen(), std::logic_error);

  // Frame 0: captured, ACKed. She folds it.
  eve.frame_seen(true, Iv24(0x000011));
  CHECK(eve.captured_current());
  CHECK_THROWS_AS(eve.frame_seen(true, Iv24(1)), std::logic_error);
  eve.ack_seen();
  CHECK(eve.v_eve() == Iv24(0x000011));
  CHECK(!eve.blind());
  CHECK(eve.useful_count() == 1);

  // Frame 1: missed, but only timed out. No harm done.
  eve.frame_erased(true);
  eve.timeout_seen();
  CHECK(!eve.blind());
  CHECK(eve.useful_count() == 1);

  // Frame 2: missed and ACKed. Blind from here on.
  eve.frame_erased(true);
  eve.ack_seen();
  CHECK(eve.blind());
  CHECK(eve.blind_at_frame() == 2);
  CHECK(eve.useful_count() == 1);

  // Frame 3: captured and ACKed while blind. Still folded (constant offset),
  // but no longer useful.
  eve.frame_seen(true, Iv24(0x000044));
  eve.ack_seen();
  CHECK(eve.v_eve() == Iv24(0x000011 ^ 0x000044));
  CHECK(eve.useful_count() == 1);
  CHECK(eve.frames_observed() == 4);
}

TEST_CASE("listener stays offset by exactly the missed IVs") {
  // Mirror of the sender accumulator: her value equals the true one XOR the
  // IVs of ACKed frames she missed, whatever happens afterwards.
  EveObserver eve;
  Iv24 truth(0);
  Iv24 missed(0);
  ChannelRng rng(123, 0);
  for (int f = 0; f < 200; ++f) {
    Iv24 iv(rng.next_iv24());
    bool captured = rng.bernoulli(0.8);
    bool acked = rng.bernoulli(0.7);
    if (captured)
      eve.frame_seen(true, iv);
    else
      eve.frame_erased(true);
    if (acked) {
      eve.ack_seen();
      truth ^= iv;
      if (!captured) missed ^= iv;
    } else {
      eve.timeout_seen();
    }
    CHECK(eve.v_eve() == (truth ^ missed));
  }
}

TEST_CASE("listener usefulness without the capture requirement") {
  // IV-knowledge-only accounting: a frame counts while she is not blind,
  // captured or not. Init frames never count.
  EveObserver eve(false);
  eve.frame_seen(false, Iv24(0x31));  // init frame
  eve.ack_seen();
  CHECK(eve.useful_count() == 0);

  eve.frame_erased(true);  // missed data frame, but only timed out
  eve.timeout_seen();
  CHECK(eve.useful_count() == 1);

  eve.frame_erased(true);  // missed data frame, ACKed: useful once more, then blind
  eve.ack_seen();
  CHECK(eve.useful_count() == 2);
  CHECK(eve.blind());

  eve.frame_seen(true, Iv24(0x32));
  eve.ack_seen();
  CHECK(eve.useful_count() == 2);
}

TEST_CASE("degenerate channels pin the leak count exactly") {
  // She captures nothing: zero useful frames, blind at the first accepted frame.
  SessionMetrics blocked = run_session(session_cfg(0, 50), det(0.0, 1.0, 0.0), 1);
  CHECK(blocked.useful_frames_at_eve == 0);
  CHECK(blocked.blind_at_frame == 0);
  CHECK(blocked.data_delivered == 50);
  CHECK(blocked.bob_sync_ok);

  // She captures everything: every data frame is hers.
  SessionMetrics open_book = run_session(session_cfg(0, 50), det(0.0, 0.0, 0.0), 2);
  CHECK(open_book.useful_frames_at_eve == 50);
  CHECK(open_book.blind_at_frame == -1);
  CHECK(open_book.eve_collision_frames == 0);  // never blind, nothing to collide

  // IV-advance frames cost her nothing when she sees them all.
  SessionMetrics with_init = run_session(session_cfg(20, 30), det(0.0, 0.0, 0.0), 3);
  CHECK(with_init.useful_frames_at_eve == 30);
  CHECK(with_init.acked_init == 20);

  // Capture-free accounting with a total blackout: only the very first data
  // frame airs before her first missed fold.
  SessionConfig cfg = session_cfg(0, 50);
  cfg.eve_capture_required = false;
  SessionMetrics iv_only = run_session(cfg, det(0.0, 1.0, 0.0), 4);
  CHECK(iv_only.useful_frames_at_eve == 1);
}

TEST_CASE("attempt counts match the truncated geometric expectation") {
  // Per attempt, ACK round-trip succeeds with (1-g_ab)(1-g_ba) = 0.81; the
  // mean attempts per frame is 1/0.81 up to an attempt-limit correction
  // smaller than 1e-5.
  SessionMetrics m = run_session(session_cfg(0, 50000), det(0.1, 0.5, 0.1), 42);
  double attempts_per_frame = double(m.frames_tx) / 50000.0;
  CHECK(attempts_per_frame == doctest::Approx(1.0 / 0.81).epsilon(0.02));
  CHECK(m.frames_acked + m.frames_abandoned == 50000);
  CHECK(m.frames_abandoned < 10);  // abandon probability 0.19^7 per frame
  CHECK(m.duplicates > 0);         // lost ACKs re-deliver frames
  CHECK(m.bob_sync_ok);
  CHECK(m.sync_violations == 0);
}

TEST_CASE("session metrics replay bit-identically per seed") {
  SessionConfig cfg = session_cfg(5, 500);
  FadingModel fading = FadingModel::independent_beta({1, 9}, {1, 19}, {1, 9});
  SessionMetrics a = run_session(cfg, fading, 7);
  SessionMetrics b = run_session(cfg, fading, 7);
  CHECK(a.frames_tx == b.frames_tx);
  CHECK(a.useful_frames_at_eve == b.useful_frames_at_eve);
  CHECK(a.blind_at_frame == b.blind_at_frame);
  CHECK(a.overhead_ratio == b.overhead_ratio);
  SessionMetrics c = run_session(cfg, fading, 8);
  CHECK(a.frames_tx != c.frames_tx);  // overwhelmingly likely
}

TEST_CASE("byte overhead ratio accounts 42-byte IV-advance frames") {
  // Lossless session: 10 init frames at 42 B; data frames carry a 3-byte IV
  // plus ciphertext of history + 16-byte payload + 4-byte checksum.
  SessionMetrics m = run_session(session_cfg(10, 100), det(0, 1, 0), 5);
  double init_bytes = 10 * 42.0;
  double data_bytes = 28.0 + 99 * 29.0;  // first frame's history window is empty
  CHECK(m.overhead_ratio == doctest::Approx(init_bytes / (init_bytes + data_bytes))
                                .epsilon(1e-9));
}

TEST_CASE("a blind listener's reconstruction never validates a frame") {
  SessionMetrics m = run_session(session_cfg(0, 2000), det(0.1, 0.1, 0.1), 99);
  CHECK(m.blind_at_frame >= 0);  // she goes blind quickly at these rates
  CHECK(m.spot_decrypt_attempts > 0);
  CHECK(m.spot_decrypt_successes == 0);
  CHECK(m.eve_collision_frames == 0);
}

TEST_CASE("feedback blackout degrades the session without corrupting it") {
  // No ACK ever returns: the sender abandons every frame; the receiver's
  // optimistic IV-advance folds are wrong, so it drops every data frame
  // rather than accept one under a bogus seed.
  SessionConfig cfg = session_cfg(3, 20);
  cfg.attempt_limit = 2;
  SessionMetrics m = run_session(cfg, det(0.0, 0.0, 1.0), 6);
  CHECK(m.frames_acked == 0);
  CHECK(m.frames_abandoned == 23);
  CHECK(m.data_delivered == 0);
  CHECK(m.frames_dropped == 20 * 2);  // every attempt arrives and is dropped
  CHECK(m.aborted);
  CHECK(!m.bob_sync_ok);
  CHECK(m.sync_violations == 0);  // it never wrongly accepted anything
}

TEST_CASE("leak expectation matches the geometric-sum value across sweeps") {
  // With a lossless main channel the leak count is the length of the
  // listener's initial capture run, whose mean is the closed-form bound.
  for (uint64_t ki : {uint64_t(0), uint64_t(10)}) {
    const double gae = 0.1;
    const size_t trials = 400;
    const uint64_t n_data = 300;
    double sum = 0;
    for (size_t t = 0; t < trials; ++t) {
      SessionMetrics m =
          run_session(session_cfg(ki, n_data), det(0.0, gae, 0.0), derive_seed(50, {ki, t}));
      sum += double(m.useful_frames_at_eve);
    }
    double mean = sum / trials;
    double bound = eve_useful_frames_bound(gae, ki, ki + n_data);
    // The run length has variance close to (1-p)/p^2; 4 standard errors.
    double sigma = std::sqrt((1 - gae) / (gae * gae));
    CHECK(std::abs(mean - bound) < 4 * sigma / std::sqrt(double(trials)));
  }
}

TEST_CASE("lossless key sharing needs exactly k frames and leaks to a perfect listener") {
  KeyshareConfig cfg;
  cfg.k = 10;
  cfg.n1_bits = 16;
  KeyshareResult r = run_keyshare_session(cfg, det(0, 0, 0), 11);
  CHECK(r.completed);
  CHECK(r.frames_sent == 10);
  CHECK(r.keys_match);
  CHECK(!r.eve_missed_any);
  CHECK(r.eve_key == r.alice_key);

  // An always-erased listener misses everything.
  KeyshareResult sealed = run_keyshare_session(cfg, det(0, 1, 0), 12);
  CHECK(sealed.keys_match);
  CHECK(sealed.eve_missed_any);
  CHECK(sealed.eve_key != sealed.alice_key);
}

TEST_CASE("key sharing under loss: keys always match, frame count scales") {
  KeyshareConfig cfg;
  cfg.k = 10;
  cfg.n1_bits = 24;
  const size_t sessions = 400;
  uint64_t total = 0;
  for (size_t s = 0; s < sessions; ++s) {
    KeyshareResult r = run_keyshare_session(cfg, det(0.2, 0.3, 0.5), derive_seed(70, {s}));
    REQUIRE(r.completed);
    REQUIRE(r.keys_match);
    total += r.frames_sent;
  }
  // Expected 10 / ((1-0.2)(1-0.5)) = 25 frames per key.
  double mean = double(total) / sessions;
  double sigma_mean = 6.1 / std::sqrt(double(sessions));  // sd(frames) ~ 6.1
  CHECK(std::abs(mean - 25.0) < 5 * sigma_mean);
}

TEST_CASE("cumulative feedback never wastes a delivered frame") {
  KeyshareConfig base;
  base.k = 8;
  base.n1_bits = 16;
  KeyshareConfig cum = base;
  cum.resend_ack_bits = true;

  uint64_t base_total = 0, cum_total = 0;
  const size_t sessions = 300;
  for (size_t s = 0; s < sessions; ++s) {
    KeyshareResult rb = run_keyshare_session(base, det(0.2, 0.1, 0.4), derive_seed(90, {s}));
    KeyshareResult rc = run_keyshare_session(cum, det(0.2, 0.1, 0.4), derive_seed(91, {s}));
    REQUIRE(rb.keys_match);
    REQUIRE(rc.keys_match);
    base_total += rb.frames_sent;
    cum_total += rc.frames_sent;
  }
  // Baseline pays for lost ACKs (factor 1/(1-g_ba)); cumulative mode does not.
  CHECK(double(cum_total) < 0.8 * double(base_total));
}

TEST_CASE("keyshare transcript hook sees every transmission") {
  KeyshareConfig cfg;
  cfg.k = 5;
  cfg.n1_bits = 16;
  std::vector<KeyshareEvent> events;
  KeyshareHook hook = [&](const KeyshareEvent& e) { events.push_back(e); };
  KeyshareResult r = run_keyshare_session(cfg, det(0.3, 0.5, 0.2), 21, &hook);
  CHECK(events.size() == r.frames_sent);
  uint64_t heard = 0;
  for (size_t i = 0; i < events.size(); ++i) {
    CHECK(events[i].index == i);
    heard += events[i].feedback_heard;
  }
  CHECK(heard == cfg.k);
}

TEST_CASE("experiment sweeps are deterministic and schedule-independent") {
  ExperimentConfig cfg;
  cfg.id = "unit";
  cfg.master_seed = 99;
  cfg.trials = 6;
  cfg.n_init_points = {0, 10};
  cfg.n_data = 200;
  cfg.jobs = 1;
  FadingModel fading = det(0.05, 0.1, 0.05);

  ExperimentResult a = run_experiment(cfg, fading);
  ExperimentResult b = run_experiment(cfg, fading);
  CHECK(a.csv == b.csv);

  cfg.jobs = 4;
  ExperimentResult c = run_experiment(cfg, fading);
  CHECK(a.csv == c.csv);

  REQUIRE(a.summaries.size() == 2);
  CHECK(a.summaries[0].n_init == 0);
  CHECK(a.summaries[1].n_init == 10);
  CHECK(a.rows.size() == 12);
  CHECK(a.csv.rfind(kExperimentCsvHeader, 0) == 0);

  // Each row's seed must be derivable from (point, trial), not schedule order.
  CHECK(a.rows[0].metrics.seed == derive_seed(99, {0, 0}));
  CHECK(a.rows[7].metrics.seed == derive_seed(99, {1, 1}));
}

TEST_CASE("experiment trace captures trial zero wire traffic") {
  ExperimentConfig cfg;
  cfg.id = "trace";
  cfg.master_seed = 5;
  cfg.trials = 2;
  cfg.n_init_points = {1};
  cfg.n_data = 3;
  cfg.capture_trace = true;
  ExperimentResult res = run_experiment(cfg, det(0, 1, 0));
  CHECK(!res.trace.empty());
  // One line per transmission: 1 init + 3 data, lossless, trial 0 only.
  size_t lines = 0;
  for (char ch : res.trace)
    if (ch == '\n') ++lines;
  CHECK(lines == 4);
  CHECK(res.trace.rfind("1,0,a1", 0) == 0);  // IV-advance type byte leads

  cfg.capture_trace = false;
  CHECK(run_experiment(cfg, det(0, 1, 0)).trace.empty());
}

TEST_CASE("experiment config validation") {
  ExperimentConfig cfg;
  cfg.trials = 0;
  CHECK_THROWS_AS(run_experiment(cfg, det(0, 0, 0)), ConfigError);
  cfg.trials = 1;
  cfg.n_init_points = {};
  CHECK_THROWS_AS(run_experiment(cfg, det(0, 0, 0)), ConfigError);
}
