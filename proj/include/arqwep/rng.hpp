#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace arqwep {

// splitmix64 finalizer; used to whiten seed material before it reaches the engine.
constexpr uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Folds a sequence of ids into a seed, one mixing round per id.
// Used to derive per-(point, trial, link) stream seeds from one master seed.
inline uint64_t derive_seed(uint64_t seed, std::initializer_list<uint64_t> ids) {
  uint64_t s = mix64(seed);
  for (uint64_t id : ids) s = mix64(s ^ (id + 0x9e3779b97f4a7c15ULL));
  return s;
}

// Deterministic random stream. Identical (seed, stream) pairs yield identical
// draw sequences; distinct stream ids decorrelate links within one trial.
class ChannelRng {
 public:
  ChannelRng(uint64_t seed, uint64_t stream)
      : seed_(seed), stream_(stream), engine_(derive_seed(seed, {stream})) {}

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

  uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // True with probability p. p = 0 never fires, p = 1 always fires.
  bool bernoulli(double p) { return next_unit() < p; }

  // Uniform 24-bit value.
  uint32_t next_iv24() { return static_cast<uint32_t>(engine_() >> 40); }

  std::vector<uint8_t> next_bytes(size_t n) {
    std::vector<uint8_t> out(n);
    for (size_t i = 0; i < n; i += 8) {
      uint64_t w = engine_();
      for (size_t j = i; j < i + 8 && j < n; ++j) {
        out[j] = static_cast<uint8_t>(w);
        w >>= 8;
      }
    }
    return out;
  }

  // Gamma(alpha, 1) variate; building block for Beta sampling.
  double gamma(double alpha) {
    std::gamma_distribution<double> d(alpha, 1.0);
    return d(engine_);
  }

 private:
  uint64_t seed_;
  uint64_t stream_;
  std::mt19937_64 engine_;
};

// Stream ids for the per-trial links. Kept in one place so experiment replay
// stays stable across refactors.
namespace stream_id {
inline constexpr uint64_t kFading = 0;
inline constexpr uint64_t kForward = 1;        // Alice -> Bob erasures
inline constexpr uint64_t kEavesdrop = 2;      // Alice -> Eve erasures
inline constexpr uint64_t kFeedback = 3;       // Bob -> Alice erasures
inline constexpr uint64_t kEveFeedback = 4;    // Eve's view of ACK/timeout events
inline constexpr uint64_t kHeaderIv = 5;       // sender header-IV draws
inline constexpr uint64_t kPayload = 6;        // sender payload bytes
inline constexpr uint64_t kKeyPayload = 7;     // key-sharing frame payloads
}  // namespace stream_id

}  // namespace arqwep
