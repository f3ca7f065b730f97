// arqwep: command line front end for the ARQ-WEP overlay toolkit.
//
// Subcommands:
//   simulate  run a sweep experiment from a config file, write CSV results
//   analyze   print one closed-form quantity for scalar erasure probabilities
//   codec     encrypt or decrypt a single frame file
//   keyshare  run ARQ key-sharing sessions and report agreement/secrecy
//
// Exit codes: 0 success, 2 usage/parse error, 3 protocol violation,
// 4 frame integrity failure.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "arqwep/analysis.hpp"
#include "arqwep/channel.hpp"
#include "arqwep/config.hpp"
#include "arqwep/errors.hpp"
#include "arqwep/rng.hpp"
#include "arqwep/simulator.hpp"
#include "arqwep/wep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitIntegrity = 4;

arqwep::Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw arqwep::ConfigError("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string& s = ss.str();
  return arqwep::Bytes(s.begin(), s.end());
}

void write_file(const std::string& path, const void* data, size_t len) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw arqwep::ConfigError("cannot open output file: " + path);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
  if (!out) throw arqwep::ConfigError("write failed: " + path);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string humanize_seconds(double s) {
  char buf[128];
  if (!std::isfinite(s)) return "never";
  std::snprintf(buf, sizeof buf, "%.4g s = %.4g h = %.4g d = %.4g y", s, s / 3600.0,
                s / 86400.0, s / (365.25 * 86400.0));
  return buf;
}

struct AnalyzeArgs {
  std::string formula;
  std::optional<double> gab, gae, gba;
  std::optional<uint64_t> k, ki;
  uint64_t n_data = 100000;
  double frame_rate = arqwep::kWepBaselineFramesPerSecond;
  double frames_needed = arqwep::kWepCrackFrames;
  std::optional<double> overhead;
  double data_bytes = 512.0;
  double init_bytes = 42.0;
};

double require(const std::optional<double>& v, const char* flag) {
  if (!v) throw arqwep::ConfigError(std::string("missing required option ") + flag);
  return *v;
}

uint64_t require(const std::optional<uint64_t>& v, const char* flag) {
  if (!v) throw arqwep::ConfigError(std::string("missing required option ") + flag);
  return *v;
}

void check_prob(double v, const char* flag) {
  if (!(v >= 0.0 && v <= 1.0))
    throw arqwep::ConfigError(std::string(flag) + " must lie in [0, 1]");
}

// Prints one row: formula,inputs,value. The inputs column lists only the
// parameters the formula consumed.
int run_analyze(const AnalyzeArgs& a) {
  using namespace arqwep;
  std::vector<std::pair<std::string, std::string>> used;
  auto note = [&](const char* name, const std::string& v) { used.emplace_back(name, v); };

  auto det = [&](double ab, double ae, double ba) {
    return FadingModel::deterministic(ErasureTriple{ab, ae, ba});
  };

  double value = 0.0;
  std::string human;
  if (a.formula == "capacity") {
    double ab = require(a.gab, "--gab"), ae = require(a.gae, "--gae");
    check_prob(ab, "--gab");
    check_prob(ae, "--gae");
    note("gab", fmt_double(ab));
    note("gae", fmt_double(ae));
    value = secret_key_capacity(det(ab, ae, 0.0));
  } else if (a.formula == "eve-erasure") {
    double ab = require(a.gab, "--gab"), ae = require(a.gae, "--gae");
    check_prob(ab, "--gab");
    check_prob(ae, "--gae");
    note("gab", fmt_double(ab));
    note("gae", fmt_double(ae));
    value = eve_equivalent_erasure(det(ab, ae, 0.0));
  } else if (a.formula == "rate-noisy") {
    double ab = require(a.gab, "--gab"), ae = require(a.gae, "--gae"),
           ba = require(a.gba, "--gba");
    check_prob(ab, "--gab");
    check_prob(ae, "--gae");
    check_prob(ba, "--gba");
    note("gab", fmt_double(ab));
    note("gae", fmt_double(ae));
    note("gba", fmt_double(ba));
    value = noisy_feedback_rate(det(ab, ae, ba));
  } else if (a.formula == "outage") {
    double ae = require(a.gae, "--gae");
    check_prob(ae, "--gae");
    uint64_t k = require(a.k, "--k");
    note("gae", fmt_double(ae));
    note("k", std::to_string(k));
    value = secrecy_outage(det(0.0, ae, 0.0), k);
  } else if (a.formula == "trials" || a.formula == "key-rate") {
    double ab = require(a.gab, "--gab");
    check_prob(ab, "--gab");
    uint64_t k = require(a.k, "--k");
    bool noisy = a.gba.has_value();
    double ba = noisy ? *a.gba : 0.0;
    if (noisy) check_prob(ba, "--gba");
    note("gab", fmt_double(ab));
    if (noisy) note("gba", fmt_double(ba));
    note("k", std::to_string(k));
    value = a.formula == "trials" ? expected_trials(det(ab, 0.0, ba), k, noisy)
                                  : key_rate(det(ab, 0.0, ba), k, noisy);
  } else if (a.formula == "useful-bound") {
    double ae = require(a.gae, "--gae");
    check_prob(ae, "--gae");
    uint64_t ki = a.ki.value_or(0);
    note("gae", fmt_double(ae));
    note("ki", std::to_string(ki));
    note("n_data", std::to_string(a.n_data));
    value = eve_useful_frames_bound(ae, ki, ki + a.n_data);
  } else if (a.formula == "attack-time") {
    double ae = require(a.gae, "--gae");
    check_prob(ae, "--gae");
    uint64_t ki = a.ki.value_or(0);
    if (a.overhead) {
      ki = overhead_to_init_count(*a.overhead, a.n_data, a.data_bytes, a.init_bytes);
      note("overhead", fmt_double(*a.overhead));
    }
    note("gae", fmt_double(ae));
    note("ki", std::to_string(ki));
    note("n_data", std::to_string(a.n_data));
    note("frame_rate", fmt_double(a.frame_rate));
    note("frames_needed", fmt_double(a.frames_needed));
    AttackTimeEstimate est =
        attack_time_estimate(ae, ki, a.n_data, a.frame_rate, a.frames_needed);
    std::printf("# passive listener; sessions of ki + n_data accepted frames back to back\n");
    std::printf("# per session it expects %.6g decryptable data frames\n",
                est.useful_per_session);
    std::printf("# needs %.6g such frames total, i.e. %.6g sessions at %.6g s each\n",
                a.frames_needed, est.sessions_needed, est.session_seconds);
    if (est.unbounded) std::printf("# no frame is ever decryptable: attack never completes\n");
    value = est.total_seconds;
    human = humanize_seconds(est.total_seconds);
  } else {
    std::fprintf(stderr, "unknown formula '%s' (expected capacity, eve-erasure, rate-noisy, "
                         "outage, trials, key-rate, useful-bound or attack-time)\n",
                 a.formula.c_str());
    return kExitUsage;
  }

  std::string inputs;
  for (size_t i = 0; i < used.size(); ++i) {
    if (i) inputs += ';';
    inputs += used[i].first + "=" + used[i].second;
  }
  std::printf("%s,%s,%s\n", a.formula.c_str(), inputs.c_str(), fmt_double(value).c_str());
  if (!human.empty()) std::printf("total: %s\n", human.c_str());
  return kExitOk;
}

struct SimulateArgs {
  std::string config_path;
  std::string out_override;
  std::string trace_override;
  int jobs = 0;  // 0 = take from config
  std::optional<uint64_t> seed_override;
};

int run_simulate(const SimulateArgs& s) {
  using namespace arqwep;
  ParsedConfig cfg = load_config(s.config_path);
  if (s.jobs > 0) cfg.experiment.jobs = s.jobs;
  if (s.seed_override) cfg.experiment.master_seed = *s.seed_override;
  if (!s.out_override.empty()) cfg.csv_path = s.out_override;
  if (!s.trace_override.empty()) {
    cfg.trace_path = s.trace_override;
    cfg.experiment.capture_trace = true;
  }
  if (!cfg.fading) throw ConfigError("config lacks a [fading] section");

  ExperimentResult res = run_experiment(cfg.experiment, *cfg.fading);

  if (!cfg.csv_path.empty()) {
    write_file(cfg.csv_path, res.csv.data(), res.csv.size());
    std::printf("wrote %zu rows to %s\n", res.rows.size(), cfg.csv_path.c_str());
  } else {
    std::fputs(res.csv.c_str(), stdout);
  }
  if (!cfg.trace_path.empty() && cfg.experiment.capture_trace) {
    write_file(cfg.trace_path, res.trace.data(), res.trace.size());
    std::printf("wrote wire trace to %s\n", cfg.trace_path.c_str());
  }

  ErasureTriple mean = cfg.fading->mean();
  std::printf("%-8s %-7s %-12s %-12s %-12s %-12s %-12s\n", "k_i", "trials", "mean_useful",
              "se", "min", "max", "analytic");
  for (const PointSummary& p : res.summaries) {
    double bound = eve_useful_frames_bound(mean.ae, p.n_init, p.n_init + cfg.experiment.n_data);
    std::printf("%-8" PRIu64 " %-7zu %-12.4f %-12.4f %-12.0f %-12.0f %-12.4f\n", p.n_init,
                p.trials, p.mean_useful, p.se_useful, p.min_useful, p.max_useful, bound);
  }
  return kExitOk;
}

struct CodecArgs {
  std::string op;
  std::string key_hex;
  std::string iv_hex;
  std::string in_path;
  std::string out_path;
};

int run_codec(const CodecArgs& c) {
  using namespace arqwep;
  SecretKey key = SecretKey::from_hex(c.key_hex);
  Bytes input = read_file(c.in_path);

  if (c.op == "encrypt") {
    if (c.iv_hex.empty()) throw ConfigError("encrypt requires --iv (6 hex chars)");
    Bytes ivb = hex_decode(c.iv_hex);
    if (ivb.size() != 3) throw ConfigError("--iv must be exactly 6 hex chars");
    Iv24 iv = Iv24::from_bytes(ivb.data());
    // Plain (non-overlay) framing: the advertised IV is also the seed IV.
    WepFrame frame = wep_encrypt(input, iv, iv, key);
    Bytes wire = encode_frame(frame);
    write_file(c.out_path, wire.data(), wire.size());
    std::printf("encrypted %zu bytes -> %zu byte frame (iv %s)\n", input.size(), wire.size(),
                hex_encode(iv.to_bytes()).c_str());
    return kExitOk;
  }
  if (c.op == "decrypt") {
    size_t consumed = 0;
    WepFrame frame = decode_frame(input, &consumed);
    if (consumed != input.size())
      throw ConfigError("trailing bytes after frame in " + c.in_path);
    std::optional<Bytes> msg = wep_decrypt(frame, frame.header_iv, key);
    if (!msg) throw IcvError("integrity check failed (wrong key or corrupted frame)");
    write_file(c.out_path, msg->data(), msg->size());
    std::printf("decrypted %zu byte frame -> %zu bytes (iv %s)\n", input.size(), msg->size(),
                hex_encode(frame.header_iv.to_bytes()).c_str());
    return kExitOk;
  }
  std::fprintf(stderr, "unknown codec operation '%s' (expected encrypt or decrypt)\n",
               c.op.c_str());
  return kExitUsage;
}

struct KeyshareArgs {
  uint64_t k = 10;
  uint64_t n1 = 16;
  double gab = 0.0;
  double gae = 0.0;
  double gba = 0.0;
  uint64_t seed = 1;
  uint64_t sessions = 1;
  bool resend_acks = false;
};

int run_keyshare(const KeyshareArgs& ks) {
  using namespace arqwep;
  check_prob(ks.gab, "--gab");
  check_prob(ks.gae, "--gae");
  check_prob(ks.gba, "--gba");
  if (ks.sessions < 1) throw ConfigError("--sessions must be at least 1");

  KeyshareConfig cfg;
  cfg.k = ks.k;
  cfg.n1_bits = ks.n1;
  cfg.resend_ack_bits = ks.resend_acks;
  FadingModel fading = FadingModel::deterministic(ErasureTriple{ks.gab, ks.gae, ks.gba});

  if (ks.sessions == 1) {
    KeyshareHook hook = [](const KeyshareEvent& e) {
      std::printf("tx %4" PRIu64 "  seq %4" PRIu32 "  receiver:%s  listener:%s  ack:%s\n",
                  e.index, e.seq, e.delivered ? "got " : "lost", e.captured ? "got " : "lost",
                  e.feedback_heard ? "heard" : "-");
    };
    KeyshareResult r = run_keyshare_session(cfg, fading, ks.seed, &hook);
    std::printf("frames sent: %" PRIu64 "\n", r.frames_sent);
    std::printf("alice key:   %s\n", hex_encode(r.alice_key).c_str());
    std::printf("bob key:     %s  (%s)\n", hex_encode(r.bob_key).c_str(),
                r.keys_match ? "match" : "MISMATCH");
    std::printf("eve key:     %s  (%s)\n", hex_encode(r.eve_key).c_str(),
                r.eve_missed_any ? "missed at least one frame: key useless"
                                 : "captured every accepted frame: KEY LEAKED");
    return r.keys_match ? kExitOk : kExitProtocol;
  }

  uint64_t leaks = 0, mismatches = 0, total_frames = 0;
  for (uint64_t s = 0; s < ks.sessions; ++s) {
    KeyshareResult r = run_keyshare_session(cfg, fading, derive_seed(ks.seed, {s}));
    total_frames += r.frames_sent;
    if (!r.eve_missed_any) ++leaks;
    if (!r.keys_match) ++mismatches;
  }
  double mean_frames = double(total_frames) / double(ks.sessions);
  double leak_rate = double(leaks) / double(ks.sessions);
  double closed = secrecy_outage(fading, ks.k);
  std::printf("sessions=%" PRIu64 " k=%" PRIu64 " resend_acks=%d\n", ks.sessions, ks.k,
              int(ks.resend_acks));
  std::printf("mean frames per key: %.6g\n", mean_frames);
  std::printf("key mismatches:      %" PRIu64 "\n", mismatches);
  std::printf("listener learned key in %" PRIu64 "/%" PRIu64 " sessions (rate %.6g, "
              "closed form %.6g)\n",
              leaks, ks.sessions, leak_rate, closed);
  return mismatches == 0 ? kExitOk : kExitProtocol;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ARQ-WEP overlay toolkit: frame codec, channel simulator, closed forms"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "run a sweep experiment from a config file");
  c_sim->add_option("--config", sim.config_path, "experiment config file")->required();
  c_sim->add_option("--out", sim.out_override, "override the CSV output path");
  c_sim->add_option("--trace-out", sim.trace_override, "write a wire trace here");
  c_sim->add_option("--jobs", sim.jobs, "worker threads (default from config)");
  c_sim->add_option("--seed", sim.seed_override, "override the master seed");

  AnalyzeArgs an;
  CLI::App* c_an = app.add_subcommand("analyze", "print one closed-form quantity as a CSV row");
  c_an->add_option("formula", an.formula,
                   "capacity | eve-erasure | rate-noisy | outage | trials | key-rate | "
                   "useful-bound | attack-time")
      ->required();
  c_an->add_option("--gab", an.gab, "forward erasure probability");
  c_an->add_option("--gae", an.gae, "listener erasure probability");
  c_an->add_option("--gba", an.gba, "feedback erasure probability");
  c_an->add_option("--k", an.k, "key frames to accept");
  c_an->add_option("--ki", an.ki, "accepted IV-advance frames per session");
  c_an->add_option("--n-data", an.n_data, "accepted data frames per session");
  c_an->add_option("--frame-rate", an.frame_rate, "frames per second on the air");
  c_an->add_option("--frames-needed", an.frames_needed, "decryptable frames the attack needs");
  c_an->add_option("--overhead", an.overhead, "derive --ki from this byte overhead ratio");
  c_an->add_option("--data-bytes", an.data_bytes, "average data frame size in bytes");
  c_an->add_option("--init-bytes", an.init_bytes, "IV-advance frame size in bytes");

  CodecArgs cod;
  CLI::App* c_cod = app.add_subcommand("codec", "encrypt or decrypt one frame file");
  c_cod->add_option("operation", cod.op, "encrypt | decrypt")->required();
  c_cod->add_option("--key", cod.key_hex, "secret key, 26 hex chars")->required();
  c_cod->add_option("--iv", cod.iv_hex, "initialization vector, 6 hex chars (encrypt only)");
  c_cod->add_option("--in", cod.in_path, "input file")->required();
  c_cod->add_option("--out", cod.out_path, "output file")->required();

  KeyshareArgs ks;
  CLI::App* c_ks = app.add_subcommand("keyshare", "run ARQ key-sharing sessions");
  c_ks->add_option("--k", ks.k, "key frames to accept (default 10)");
  c_ks->add_option("--n1", ks.n1, "bits per key frame payload (default 16)");
  c_ks->add_option("--gab", ks.gab, "forward erasure probability")->required();
  c_ks->add_option("--gae", ks.gae, "listener erasure probability")->required();
  c_ks->add_option("--gba", ks.gba, "feedback erasure probability")->required();
  c_ks->add_option("--seed", ks.seed, "random seed (default 1)");
  c_ks->add_option("--sessions", ks.sessions, "session count; 1 prints a transcript");
  c_ks->add_flag("--resend-acks", ks.resend_acks, "cumulative feedback instead of stop-and-wait");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_an->parsed()) return run_analyze(an);
    if (c_cod->parsed()) return run_codec(cod);
    if (c_ks->parsed()) return run_keyshare(ks);
    std::fputs(app.help().c_str(), stderr);
    return kExitUsage;
  } catch (const arqwep::IcvError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIntegrity;
  } catch (const arqwep::ProtocolError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitProtocol;
  } catch (const arqwep::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const arqwep::DivergentExpectationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
