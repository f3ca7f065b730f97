#pragma once

#include <cstdint>
#include <functional>

#include "arqwep/channel.hpp"

namespace arqwep {

// Closed-form and numerical evaluation of the secrecy and throughput
// quantities of the erasure ARQ key-sharing scheme. Fading makes the erasure
// probabilities random; every quantity here is an expectation over one
// frame's erasure triple (triples are independent across frames).

enum class EvalMethod { ClosedForm, Quadrature, MonteCarlo };

struct EvalOptions {
  EvalMethod method = EvalMethod::ClosedForm;
  size_t mc_samples = 1'000'000;
  uint64_t mc_seed = 1;
};

// E[f(triple)] over the fading distribution. Deterministic and mixture models
// are evaluated exactly; beta marginals use 64-point Gauss-Legendre product
// quadrature or Monte Carlo. ClosedForm is only defined for the named
// quantities below, so it is rejected here with invalid_argument.
double expect(const FadingModel& model,
              const std::function<double(const ErasureTriple&)>& f,
              const EvalOptions& opts);

// Highest secure key rate with perfect feedback: E[(1 - g_ab) g_ae].
double secret_key_capacity(const FadingModel& model, const EvalOptions& opts = {});

// Erasure probability of the equivalent eavesdropper channel after the ARQ
// protocol filters out frames Bob never accepted: E[g_ae (1 - g_ab)].
double eve_equivalent_erasure(const FadingModel& model, const EvalOptions& opts = {});

// Secure key rate when a lost ACK discards the frame: E[(1-g_ab)(1-g_ba) g_ae].
double noisy_feedback_rate(const FadingModel& model, const EvalOptions& opts = {});

// Probability the eavesdropper captures all k accepted key frames and so
// learns the distilled key: (E[1 - g_ae])^k. Requires k >= 1.
double secrecy_outage(const FadingModel& model, uint64_t k, const EvalOptions& opts = {});

// Expected transmissions until k frames are accepted: k E[1/(1-g_ab)], or
// k E[1/((1-g_ab)(1-g_ba))] when a lost ACK also wastes the frame.
// DivergentExpectationError when the expectation does not exist.
double expected_trials(const FadingModel& model, uint64_t k, bool noisy_feedback,
                       const EvalOptions& opts = {});

// Keys distilled per transmitted frame: 1 / expected_trials.
double key_rate(const FadingModel& model, uint64_t k, bool noisy_feedback,
                const EvalOptions& opts = {});

// Expected number of data frames per session whose encryption IV the
// eavesdropper can reconstruct, given the mean capture-miss probability
// mean_ae, init_received IV-advance frames accepted before data, and
// total_received accepted frames overall (init plus data). This is the
// geometric sum of per-frame capture-run probabilities; with mean_ae = 0 it
// degenerates to total_received - init_received.
double eve_useful_frames_bound(double mean_ae, uint64_t init_received,
                               uint64_t total_received);

// Converts a byte-overhead ratio (init bytes over total bytes) into the
// number of IV-advance frames producing it for a given data session.
uint64_t overhead_to_init_count(double overhead_ratio, uint64_t data_frames,
                                double data_frame_bytes = 512.0,
                                double init_frame_bytes = 42.0);

// Passive-attack reference point: roughly 1.5 million distinct-IV frames
// suffice to recover a WEP key, and an unprotected network surrenders them in
// about ten minutes of listening.
constexpr double kWepCrackFrames = 1.5e6;
constexpr double kWepBaselineCrackSeconds = 600.0;
constexpr double kWepBaselineFramesPerSecond = kWepCrackFrames / kWepBaselineCrackSeconds;

struct AttackTimeEstimate {
  double mean_ae = 0;
  uint64_t init_frames = 0;
  uint64_t data_frames = 0;
  double useful_per_session = 0;  // expected decryptable data frames per session
  double sessions_needed = 0;
  double session_seconds = 0;
  double total_seconds = 0;
  bool unbounded = false;  // no useful frames ever: the attack cannot complete
};

// How long a passive listener needs to collect enough decryptable frames for
// a key-recovery attack, assuming back-to-back sessions of init_frames +
// data_frames at the given frame rate and no retransmissions.
AttackTimeEstimate attack_time_estimate(double mean_ae, uint64_t init_frames,
                                        uint64_t data_frames,
                                        double frames_per_second = kWepBaselineFramesPerSecond,
                                        double frames_needed = kWepCrackFrames);

}  // namespace arqwep
