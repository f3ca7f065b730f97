#include "arqwep/analysis.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "arqwep/errors.hpp"
#include "arqwep/rng.hpp"

namespace arqwep {

namespace {

// 64-point Gauss-Legendre rule on [0,1], computed once by Newton iteration on
// the Legendre recurrence.
struct GaussRule {
  std::array<double, 64> x;
  std::array<double, 64> w;
};

const GaussRule& gauss_rule() {
  static const GaussRule rule = [] {
    GaussRule r{};
    constexpr int n = 64;
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double pp = 0;
      for (int it = 0; it < 100; ++it) {
        double p1 = 1, p2 = 0;
        for (int j = 0; j < n; ++j) {
          double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
        }
        pp = n * (z * p1 - p2) / (z * z - 1.0);
        double z1 = z;
        z = z1 - p1 / pp;
        if (std::abs(z - z1) < 1e-15) break;
      }
      // map [-1,1] to [0,1]; nodes come in symmetric pairs
      r.x[i] = (1.0 - z) / 2.0;
      r.x[n - 1 - i] = (1.0 + z) / 2.0;
      r.w[i] = r.w[n - 1 - i] = 1.0 / ((1.0 - z * z) * pp * pp);
    }
    return r;
  }();
  return rule;
}

double beta_pdf(double x, const BetaParams& p) {
  double log_norm = std::lgamma(p.alpha) + std::lgamma(p.beta) - std::lgamma(p.alpha + p.beta);
  return std::exp((p.alpha - 1.0) * std::log(x) + (p.beta - 1.0) * std::log1p(-x) - log_norm);
}

// Which erasure probability of the triple a term refers to.
enum class Link { AB, AE, BA };

double pick(const ErasureTriple& t, Link link) {
  switch (link) {
    case Link::AB: return t.ab;
    case Link::AE: return t.ae;
    default: return t.ba;
  }
}

struct Term {
  Link link;
  enum class Kind { Erasure, Success, InverseSuccess } kind;
};

double term_value(const ErasureTriple& t, const Term& term) {
  double g = pick(t, term.link);
  switch (term.kind) {
    case Term::Kind::Erasure: return g;
    case Term::Kind::Success: return 1.0 - g;
    default: return 1.0 / (1.0 - g);
  }
}

BetaParams beta_of(const FadingModel& m, Link link) {
  switch (link) {
    case Link::AB: return m.beta_ab();
    case Link::AE: return m.beta_ae();
    default: return m.beta_ba();
  }
}

double beta_moment(const BetaParams& p, Term::Kind kind) {
  switch (kind) {
    case Term::Kind::Erasure: return p.alpha / (p.alpha + p.beta);
    case Term::Kind::Success: return p.beta / (p.alpha + p.beta);
    default:
      if (p.beta <= 1.0)
        throw DivergentExpectationError(
            "E[1/(1-x)] diverges for a beta marginal with beta <= 1");
      return (p.alpha + p.beta - 1.0) / (p.beta - 1.0);
  }
}

// Throws when any InverseSuccess term has infinite expectation, so numerical
// methods never silently average a divergent integrand.
void check_divergence(const FadingModel& m, std::span<const Term> terms) {
  for (const auto& term : terms) {
    if (term.kind != Term::Kind::InverseSuccess) continue;
    switch (m.kind()) {
      case FadingModel::Kind::Deterministic:
        if (pick(m.fixed_triple(), term.link) >= 1.0)
          throw DivergentExpectationError("erasure probability 1: no frame ever arrives");
        break;
      case FadingModel::Kind::IndependentBeta:
        beta_moment(beta_of(m, term.link), term.kind);
        break;
      case FadingModel::Kind::CorrelatedMixture:
        for (const auto& atom : m.mixture_atoms())
          if (pick(atom, term.link) >= 1.0)
            throw DivergentExpectationError("mixture atom with erasure probability 1");
        break;
    }
  }
}

double product_over(const ErasureTriple& t, std::span<const Term> terms) {
  double v = 1.0;
  for (const auto& term : terms) v *= term_value(t, term);
  return v;
}

double closed_product(const FadingModel& m, std::span<const Term> terms) {
  switch (m.kind()) {
    case FadingModel::Kind::Deterministic:
      return product_over(m.fixed_triple(), terms);
    case FadingModel::Kind::CorrelatedMixture: {
      double sum = 0;
      const auto& weights = m.mixture_weights();
      const auto& atoms = m.mixture_atoms();
      for (size_t i = 0; i < atoms.size(); ++i) sum += weights[i] * product_over(atoms[i], terms);
      return sum;
    }
    case FadingModel::Kind::IndependentBeta: {
      // independent marginals, and each link appears at most once
      double prod = 1.0;
      for (const auto& term : terms) prod *= beta_moment(beta_of(m, term.link), term.kind);
      return prod;
    }
  }
  throw std::logic_error("unreachable fading kind");
}

double expect_product(const FadingModel& m, std::span<const Term> terms,
                      const EvalOptions& opts) {
  check_divergence(m, terms);
  if (opts.method == EvalMethod::ClosedForm) return closed_product(m, terms);
  return expect(m, [&](const ErasureTriple& t) { return product_over(t, terms); }, opts);
}

}  // namespace

double expect(const FadingModel& model,
              const std::function<double(const ErasureTriple&)>& f,
              const EvalOptions& opts) {
  if (opts.method == EvalMethod::ClosedForm)
    throw std::invalid_argument("no closed form for an arbitrary integrand");

  if (opts.method == EvalMethod::MonteCarlo) {
    if (opts.mc_samples == 0) throw std::invalid_argument("mc_samples must be positive");
    ChannelRng rng(opts.mc_seed, stream_id::kFading);
    double sum = 0;
    for (size_t i = 0; i < opts.mc_samples; ++i) sum += f(model.draw_slot(rng));
    return sum / static_cast<double>(opts.mc_samples);
  }

  // Quadrature: exact for point masses, tensor-product Gauss-Legendre for
  // independent beta marginals.
  switch (model.kind()) {
    case FadingModel::Kind::Deterministic:
      return f(model.fixed_triple());
    case FadingModel::Kind::CorrelatedMixture: {
      double sum = 0;
      const auto& weights = model.mixture_weights();
      const auto& atoms = model.mixture_atoms();
      for (size_t i = 0; i < atoms.size(); ++i) sum += weights[i] * f(atoms[i]);
      return sum;
    }
    case FadingModel::Kind::IndependentBeta: {
      const auto& rule = gauss_rule();
      BetaParams pab = model.beta_ab(), pae = model.beta_ae(), pba = model.beta_ba();
      std::array<double, 64> wab, wae, wba;
      for (int i = 0; i < 64; ++i) {
        wab[i] = rule.w[i] * beta_pdf(rule.x[i], pab);
        wae[i] = rule.w[i] * beta_pdf(rule.x[i], pae);
        wba[i] = rule.w[i] * beta_pdf(rule.x[i], pba);
      }
      double sum = 0;
      for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) {
          double wij = wab[i] * wae[j];
          for (int l = 0; l < 64; ++l)
            sum += wij * wba[l] * f({rule.x[i], rule.x[j], rule.x[l]});
        }
      return sum;
    }
  }
  throw std::logic_error("unreachable fading kind");
}

double secret_key_capacity(const FadingModel& model, const EvalOptions& opts) {
  const Term terms[] = {{Link::AB, Term::Kind::Success}, {Link::AE, Term::Kind::Erasure}};
  return expect_product(model, terms, opts);
}

double eve_equivalent_erasure(const FadingModel& model, const EvalOptions& opts) {
  const Term terms[] = {{Link::AE, Term::Kind::Erasure}, {Link::AB, Term::Kind::Success}};
  return expect_product(model, terms, opts);
}

double noisy_feedback_rate(const FadingModel& model, const EvalOptions& opts) {
  const Term terms[] = {{Link::AB, Term::Kind::Success},
                        {Link::BA, Term::Kind::Success},
                        {Link::AE, Term::Kind::Erasure}};
  return expect_product(model, terms, opts);
}

double secrecy_outage(const FadingModel& model, uint64_t k, const EvalOptions& opts) {
  if (k < 1) throw std::domain_error("secrecy outage needs at least one key frame");
  const Term terms[] = {{Link::AE, Term::Kind::Success}};
  double per_frame = expect_product(model, terms, opts);
  return std::pow(per_frame, static_cast<double>(k));
}

double expected_trials(const FadingModel& model, uint64_t k, bool noisy_feedback,
                       const EvalOptions& opts) {
  if (k < 1) throw std::domain_error("expected trials needs at least one key frame");
  std::vector<Term> terms{{Link::AB, Term::Kind::InverseSuccess}};
  if (noisy_feedback) terms.push_back({Link::BA, Term::Kind::InverseSuccess});
  return static_cast<double>(k) * expect_product(model, terms, opts);
}

double key_rate(const FadingModel& model, uint64_t k, bool noisy_feedback,
                const EvalOptions& opts) {
  return 1.0 / expected_trials(model, k, noisy_feedback, opts);
}

double eve_useful_frames_bound(double mean_ae, uint64_t init_received,
                               uint64_t total_received) {
  if (mean_ae < 0.0 || mean_ae > 1.0)
    throw std::domain_error("mean erasure probability must lie in [0,1]");
  if (init_received > total_received)
    throw std::domain_error("init frames cannot exceed total frames");
  double span = static_cast<double>(total_received - init_received);
  if (mean_ae == 0.0) return span;  // every capture succeeds: all data frames leak
  double p = 1.0 - mean_ae;
  return (std::pow(p, static_cast<double>(init_received) + 1.0) -
          std::pow(p, static_cast<double>(total_received) + 1.0)) /
         mean_ae;
}

uint64_t overhead_to_init_count(double overhead_ratio, uint64_t data_frames,
                                double data_frame_bytes, double init_frame_bytes) {
  if (overhead_ratio < 0.0 || overhead_ratio >= 1.0)
    throw ConfigError("overhead ratio must lie in [0,1)");
  if (data_frame_bytes <= 0.0 || init_frame_bytes <= 0.0)
    throw ConfigError("frame sizes must be positive");
  double count = overhead_ratio * static_cast<double>(data_frames) * data_frame_bytes /
                 (init_frame_bytes * (1.0 - overhead_ratio));
  return static_cast<uint64_t>(std::llround(count));
}

AttackTimeEstimate attack_time_estimate(double mean_ae, uint64_t init_frames,
                                        uint64_t data_frames, double frames_per_second,
                                        double frames_needed) {
  if (frames_per_second <= 0.0) throw ConfigError("frame rate must be positive");
  if (frames_needed <= 0.0) throw ConfigError("frames needed must be positive");
  AttackTimeEstimate est;
  est.mean_ae = mean_ae;
  est.init_frames = init_frames;
  est.data_frames = data_frames;
  est.useful_per_session =
      eve_useful_frames_bound(mean_ae, init_frames, init_frames + data_frames);
  est.session_seconds =
      static_cast<double>(init_frames + data_frames) / frames_per_second;
  if (est.useful_per_session <= 0.0) {
    est.unbounded = true;
    est.sessions_needed = std::numeric_limits<double>::infinity();
    est.total_seconds = std::numeric_limits<double>::infinity();
    return est;
  }
  est.sessions_needed = frames_needed / est.useful_per_session;
  est.total_seconds = est.sessions_needed * est.session_seconds;
  return est;
}

}  // namespace arqwep
