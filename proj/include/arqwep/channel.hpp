#pragma once

#include <variant>
#include <vector>

#include "arqwep/rng.hpp"

namespace arqwep {

// Per-slot block-erasure probabilities for the three links:
// ab = Alice->Bob, ae = Alice->Eve, ba = Bob->Alice (feedback).
struct ErasureTriple {
  double ab = 0.0;
  double ae = 0.0;
  double ba = 0.0;
};

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
};

// Slot-to-slot fading law for the erasure triple. Temporally i.i.d.;
// the mixture variant correlates the three links through a shared latent state.
class FadingModel {
 public:
  enum class Kind { Deterministic, IndependentBeta, CorrelatedMixture };

  static FadingModel deterministic(ErasureTriple t);
  static FadingModel independent_beta(BetaParams ab, BetaParams ae, BetaParams ba);
  static FadingModel correlated_mixture(std::vector<double> weights,
                                        std::vector<ErasureTriple> atoms);

  Kind kind() const;
  ErasureTriple mean() const;

  // One i.i.d. slot realization. Successive calls are independent.
  ErasureTriple draw_slot(ChannelRng& rng) const;

  // Introspection for the closed-form evaluators.
  const ErasureTriple& fixed_triple() const;                // Deterministic only
  const std::vector<double>& mixture_weights() const;       // CorrelatedMixture only
  const std::vector<ErasureTriple>& mixture_atoms() const;  // CorrelatedMixture only
  BetaParams beta_ab() const;                               // IndependentBeta only
  BetaParams beta_ae() const;
  BetaParams beta_ba() const;

 private:
  struct Deterministic {
    ErasureTriple triple;
  };
  struct IndependentBeta {
    BetaParams ab, ae, ba;
  };
  struct Mixture {
    std::vector<double> weights;  // strictly positive, sums to 1
    std::vector<ErasureTriple> atoms;
  };

  explicit FadingModel(std::variant<Deterministic, IndependentBeta, Mixture> v)
      : state_(std::move(v)) {}

  std::variant<Deterministic, IndependentBeta, Mixture> state_;
};

// One transmission attempt across a link with the given erasure probability.
// Returns true when the frame is delivered.
bool transmit(double erasure_prob, ChannelRng& rng);

// One feedback (ACK) attempt; a lost ACK surfaces as a timeout at the sender.
bool feedback_delivered(const ErasureTriple& slot, ChannelRng& rng);

}  // namespace arqwep
