#include "arqwep/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "arqwep/errors.hpp"

namespace arqwep {

namespace {

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0, 1]");
}

void check_triple(const ErasureTriple& t) {
  check_prob(t.ab, "gamma_ab");
  check_prob(t.ae, "gamma_ae");
  check_prob(t.ba, "gamma_ba");
}

void check_beta(const BetaParams& p, const char* what) {
  if (!(p.alpha > 0.0) || !(p.beta > 0.0))
    throw ConfigError(std::string(what) + ": beta parameters must be positive");
}

double beta_mean(const BetaParams& p) { return p.alpha / (p.alpha + p.beta); }

double draw_beta(const BetaParams& p, ChannelRng& rng) {
  double a = rng.gamma(p.alpha);
  double b = rng.gamma(p.beta);
  double s = a + b;
  return s > 0.0 ? a / s : 0.0;
}

}  // namespace

FadingModel FadingModel::deterministic(ErasureTriple t) {
  check_triple(t);
  return FadingModel(Deterministic{t});
}

FadingModel FadingModel::independent_beta(BetaParams ab, BetaParams ae, BetaParams ba) {
  check_beta(ab, "ab");
  check_beta(ae, "ae");
  check_beta(ba, "ba");
  return FadingModel(IndependentBeta{ab, ae, ba});
}

FadingModel FadingModel::correlated_mixture(std::vector<double> weights,
                                            std::vector<ErasureTriple> atoms) {
  if (weights.empty() || weights.size() != atoms.size())
    throw ConfigError("mixture: need matching, non-empty weight and atom lists");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw ConfigError("mixture: weights must be strictly positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("mixture: weights must sum to 1");
  for (const auto& a : atoms) check_triple(a);
  return FadingModel(Mixture{std::move(weights), std::move(atoms)});
}

FadingModel::Kind FadingModel::kind() const {
  if (std::holds_alternative<Deterministic>(state_)) return Kind::Deterministic;
  if (std::holds_alternative<IndependentBeta>(state_)) return Kind::IndependentBeta;
  return Kind::CorrelatedMixture;
}

ErasureTriple FadingModel::mean() const {
  if (const auto* d = std::get_if<Deterministic>(&state_)) return d->triple;
  if (const auto* b = std::get_if<IndependentBeta>(&state_))
    return {beta_mean(b->ab), beta_mean(b->ae), beta_mean(b->ba)};
  const auto& m = std::get<Mixture>(state_);
  ErasureTriple t;
  for (size_t i = 0; i < m.weights.size(); ++i) {
    t.ab += m.weights[i] * m.atoms[i].ab;
    t.ae += m.weights[i] * m.atoms[i].ae;
    t.ba += m.weights[i] * m.atoms[i].ba;
  }
  return t;
}

ErasureTriple FadingModel::draw_slot(ChannelRng& rng) const {
  if (const auto* d = std::get_if<Deterministic>(&state_)) return d->triple;
  if (const auto* b = std::get_if<IndependentBeta>(&state_))
    return {draw_beta(b->ab, rng), draw_beta(b->ae, rng), draw_beta(b->ba, rng)};
  const auto& m = std::get<Mixture>(state_);
  double u = rng.next_unit();
  double acc = 0.0;
  for (size_t i = 0; i < m.weights.size(); ++i) {
    acc += m.weights[i];
    if (u < acc) return m.atoms[i];
  }
  return m.atoms.back();
}

const ErasureTriple& FadingModel::fixed_triple() const {
  return std::get<Deterministic>(state_).triple;
}
const std::vector<double>& FadingModel::mixture_weights() const {
  return std::get<Mixture>(state_).weights;
}
const std::vector<ErasureTriple>& FadingModel::mixture_atoms() const {
  return std::get<Mixture>(state_).atoms;
}
BetaParams FadingModel::beta_ab() const { return std::get<IndependentBeta>(state_).ab; }
BetaParams FadingModel::beta_ae() const { return std::get<IndependentBeta>(state_).ae; }
BetaParams FadingModel::beta_ba() const { return std::get<IndependentBeta>(state_).ba; }

bool transmit(double erasure_prob, ChannelRng& rng) {
  if (!(erasure_prob >= 0.0 && erasure_prob <= 1.0))
    throw std::invalid_argument("transmit: erasure probability outside [0, 1]");
  return !rng.bernoulli(erasure_prob);
}

bool feedback_delivered(const ErasureTriple& slot, ChannelRng& rng) {
  return transmit(slot.ba, rng);
}

}  // namespace arqwep
