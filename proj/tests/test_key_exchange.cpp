#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <vector>

#include "arqwep/errors.hpp"
#include "arqwep/key_exchange.hpp"
#include "arqwep/rng.hpp"

using namespace arqwep;

TEST_CASE("payload sizing and bit masking") {
  CHECK(payload_bytes_for_bits(1) == 1);
  CHECK(payload_bytes_for_bits(8) == 1);
  CHECK(payload_bytes_for_bits(9) == 2);
  CHECK(payload_bytes_for_bits(16) == 2);
  CHECK(payload_bytes_for_bits(128) == 16);

  // Frames for a 12-bit secret must keep the top 4 bits of byte 1 clear.
  KeySender alice(12, 4);
  ChannelRng rng(5, stream_id::kKeyPayload);
  for (int i = 0; i < 50; ++i) {
    KeyFrame f = alice.next_frame(rng);
    REQUIRE(f.payload.size() == 2);
    CHECK((f.payload[1] & 0xf0) == 0);
    alice.on_timeout();
  }
}

TEST_CASE("bit widths outside 1..128 are rejected") {
  CHECK_THROWS_AS(KeySender(0, 3), ConfigError);
  CHECK_THROWS_AS(KeySender(129, 3), ConfigError);
  CHECK_THROWS_AS(KeyAccumulator(0, 3), ConfigError);
}

TEST_CASE("accumulator is a strict xor of exactly k payloads") {
  KeyAccumulator acc(16, 3);
  CHECK(!acc.complete());
  CHECK_THROWS_AS(acc.distill(), ProtocolError);

  Bytes a = {0x0f, 0x10}, b = {0xf0, 0x01}, c = {0xaa, 0x55};
  acc.accumulate(a);
  CHECK(acc.accepted_count() == 1);
  CHECK_THROWS_AS(acc.distill(), ProtocolError);
  acc.accumulate(b);
  acc.accumulate(c);
  CHECK(acc.complete());
  CHECK(acc.distill() == Bytes{0x0f ^ 0xf0 ^ 0xaa, 0x10 ^ 0x01 ^ 0x55});

  CHECK_THROWS_AS(acc.accumulate(a), ProtocolError);          // already complete
  KeyAccumulator other(16, 2);
  Bytes wrong_size = {0x01};
  CHECK_THROWS_AS(other.accumulate(wrong_size), std::invalid_argument);
}

TEST_CASE("baseline sender replaces timed-out payloads with fresh randomness") {
  KeySender alice(32, 2);
  ChannelRng rng(9, stream_id::kKeyPayload);

  KeyFrame f0 = alice.next_frame(rng);
  CHECK(f0.seq == 0);
  CHECK_THROWS_AS(alice.next_frame(rng), ProtocolError);  // outcome not reported yet

  alice.on_timeout();
  KeyFrame f1 = alice.next_frame(rng);
  CHECK(f1.seq == 1);
  CHECK(f1.payload != f0.payload);  // 2^-32 false-failure odds, acceptable
  CHECK(f1.history.base_seq == 0);
  REQUIRE(f1.history.bits.size() == 1);
  CHECK(f1.history.bits[0] == 0);  // frame 0 was never ACKed

  alice.on_ack_heard();
  CHECK(alice.accepted_count() == 1);
  KeyFrame f2 = alice.next_frame(rng);
  CHECK(f2.seq == 2);
  // The heard ACK flushed the window up to the ACKed frame, whose own bit rides
  // along once more so the receiver can confirm it.
  CHECK(f2.history.base_seq == 1);
  REQUIRE(f2.history.bits.size() == 1);
  CHECK(f2.history.bits[0] == 1);

  alice.on_ack_heard();
  CHECK(alice.complete());
  CHECK(alice.key() == Bytes{uint8_t(f1.payload[0] ^ f2.payload[0]),
                             uint8_t(f1.payload[1] ^ f2.payload[1]),
                             uint8_t(f1.payload[2] ^ f2.payload[2]),
                             uint8_t(f1.payload[3] ^ f2.payload[3])});
  CHECK_THROWS_AS(alice.next_frame(rng), ProtocolError);
}

TEST_CASE("receiver reconciles tentative frames against the embedded history") {
  // Script: Bob gets frames 0,1,3; the ACK for 1 is lost and frame 2 never
  // arrives. The history in frame 3 says 0=acked, 1=timeout, 2=timeout, so
  // Bob must drop frame 1.
  KeyReceiver bob(16);
  Bytes p0 = {1, 0}, p1 = {2, 0}, p3 = {8, 0};

  bob.on_frame(KeyFrame{0, p0, AckHistory{0, {}}});
  bob.on_frame(KeyFrame{1, p1, AckHistory{0, {1}}});
  bob.on_frame(KeyFrame{3, p3, AckHistory{0, {1, 0, 0}}});

  auto acc = bob.accepted_seqs();
  REQUIRE(acc.size() == 2);
  CHECK(acc[0] == 0);
  CHECK(acc[1] == 3);
  auto rec = bob.received_seqs();
  REQUIRE(rec.size() == 3);
  CHECK(rec[1] == 1);

  // key(k) folds accepted frames only.
  CHECK(bob.key(2) == Bytes{1 ^ 8, 0});
  CHECK_THROWS_AS(bob.key(3), ProtocolError);
  // first-received folds receptions regardless of ACK fate.
  CHECK(bob.key_first_received(3) == Bytes{1 ^ 2 ^ 8, 0});
}

TEST_CASE("receiver rejects impossible histories") {
  KeyReceiver bob(8);
  bob.on_frame(KeyFrame{0, {0x11}, AckHistory{0, {}}});

  // A window claiming an ACK for a frame Bob never received.
  KeyReceiver fresh(8);
  CHECK_THROWS_AS(fresh.on_frame(KeyFrame{2, {0x22}, AckHistory{0, {1, 0}}}), ProtocolError);

  // A window starting past a tentative frame whose fate was never reported.
  KeyReceiver gap(8);
  gap.on_frame(KeyFrame{0, {0x11}, AckHistory{0, {}}});
  CHECK_THROWS_AS(gap.on_frame(KeyFrame{2, {0x22}, AckHistory{2, {}}}), ProtocolError);

  // Retracting a confirmed frame is a protocol violation.
  KeyReceiver retract(8);
  retract.on_frame(KeyFrame{0, {0x11}, AckHistory{0, {}}});
  retract.on_frame(KeyFrame{1, {0x22}, AckHistory{0, {1}}});  // confirms 0
  CHECK_THROWS_AS(retract.on_frame(KeyFrame{2, {0x33}, AckHistory{0, {0, 0}}}),
                  ProtocolError);

  // Sequence number must match the history's end.
  KeyReceiver mism(8);
  CHECK_THROWS_AS(mism.on_frame(KeyFrame{5, {0x11}, AckHistory{0, {}}}), ProtocolError);

  // Duplicate delivery of one sequence number cannot happen with fresh frames.
  KeyReceiver dup(8);
  dup.on_frame(KeyFrame{0, {0x11}, AckHistory{0, {}}});
  CHECK_THROWS_AS(dup.on_frame(KeyFrame{0, {0x22}, AckHistory{0, {}}}), ProtocolError);
}

TEST_CASE("late confirmation restores an excluded frame (cumulative mode)") {
  // Bob receives 0, then a frame whose window says 0 timed out (baseline view),
  // then a cumulative window that re-confirms 0.
  KeyReceiver bob(8);
  bob.on_frame(KeyFrame{0, {0x11}, AckHistory{0, {}}});
  bob.on_frame(KeyFrame{1, {0x22}, AckHistory{0, {0}}});
  CHECK(bob.accepted_seqs() == std::vector<uint32_t>{1});
  bob.resync_on_history(AckHistory{0, {1, 1}});
  CHECK(bob.accepted_seqs() == std::vector<uint32_t>{0, 1});
}

TEST_CASE("scripted lossless exchange ends in equal keys") {
  const size_t k = 5;
  KeySender alice(24, k);
  KeyReceiver bob(24);
  ChannelRng rng(77, stream_id::kKeyPayload);
  while (!alice.complete()) {
    KeyFrame f = alice.next_frame(rng);
    bob.on_frame(f);
    alice.on_ack_heard();
  }
  CHECK(alice.frames_sent() == k);
  CHECK(alice.key() == bob.key(k));
}

TEST_CASE("scripted lossy exchange with lost acks still ends in equal keys") {
  // Deterministic loss pattern over (frame delivered, ack delivered):
  // a mix of clean accepts, forward losses and feedback losses.
  struct Step {
    bool fwd;
    bool ack;
  };
  const Step steps[] = {{true, true},  {false, false}, {true, false}, {true, true},
                        {false, true}, {true, true},   {true, false}, {true, true},
                        {true, true},  {true, true}};
  KeySender alice(16, 6);
  KeyReceiver bob(16);
  ChannelRng rng(31, stream_id::kKeyPayload);
  for (const Step& s : steps) {
    REQUIRE(!alice.complete());
    KeyFrame f = alice.next_frame(rng);
    if (s.fwd) bob.on_frame(f);
    if (s.fwd && s.ack)
      alice.on_ack_heard();
    else
      alice.on_timeout();
  }
  REQUIRE(alice.complete());
  CHECK(alice.key() == bob.key(6));
}

TEST_CASE("cumulative feedback accepts every reception, in reception order") {
  // Forward losses only; every delivered frame's feedback arrives.
  KeySender alice(16, 3, true);
  KeyReceiver bob(16);
  ChannelRng rng(13, stream_id::kKeyPayload);
  const bool delivered[] = {false, true, false, true, true};
  size_t got = 0;
  for (bool d : delivered) {
    KeyFrame f = alice.next_frame(rng);
    if (d) {
      bob.on_frame(f);
      ++got;
      alice.on_cumulative_feedback(bob.received_seqs());
    }
  }
  REQUIRE(got == 3);
  REQUIRE(alice.complete());
  CHECK(alice.frames_sent() == 5);
  CHECK(alice.key() == bob.key_first_received(3));
}

TEST_CASE("cumulative feedback salvages frames whose feedback was lost") {
  // Frame 0 delivered but its feedback lost; frame 1 delivered with feedback.
  // The cumulative report in frame 1's answer confirms both: 2 accepted from
  // 2 deliveries, where baseline would have wasted frame 0.
  KeySender alice(16, 2, true);
  KeyReceiver bob(16);
  ChannelRng rng(21, stream_id::kKeyPayload);

  KeyFrame f0 = alice.next_frame(rng);
  bob.on_frame(f0);  // feedback lost: no report reaches alice
  KeyFrame f1 = alice.next_frame(rng);
  bob.on_frame(f1);
  alice.on_cumulative_feedback(bob.received_seqs());

  CHECK(alice.complete());
  CHECK(alice.frames_sent() == 2);
  CHECK(alice.key() == bob.key_first_received(2));
}

TEST_CASE("cumulative feedback tolerates empty-report violation checks") {
  KeySender alice(16, 2, true);
  CHECK_THROWS_AS(alice.on_cumulative_feedback({}), std::invalid_argument);
  KeySender baseline(16, 2, false);
  CHECK_THROWS_AS(baseline.on_cumulative_feedback({0}), ProtocolError);
  CHECK_THROWS_AS(alice.on_ack_heard(), ProtocolError);
}
