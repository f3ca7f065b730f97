#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "arqwep/channel.hpp"
#include "arqwep/simulator.hpp"

namespace arqwep {

// Experiment definitions live in a small line-oriented config format:
//
//   [experiment]
//   id = fig2                     ; row label in the CSV
//   seed = 42                     ; master seed, REQUIRED
//   trials = 40
//   n_data = 100000
//   n_init = 0 100 1000           ; sweep points
//   retry_limit = 7
//   payload_len = 16
//   eve_capture_required = true
//   wep_key = 000102030405060708090a0b0c
//
//   [fading]
//   kind = deterministic          ; or beta, mixture
//   gab = 0.005                   ; deterministic: fixed erasure probabilities
//   gae = 0.004
//   gba = 0.009
//   ; beta: ab_alpha/ab_beta, ae_alpha/ae_beta, ba_alpha/ba_beta
//   ; mixture: repeated "atom = weight gab gae gba" lines
//
//   [output]
//   csv = fig2.csv                ; optional; summary always goes to stdout
//   trace = fig2_trace.txt        ; optional trial-0 wire log
//
// Comments start a line with '#' or ';'. Parsing is strict: an unknown
// section or key, a malformed value, or a missing seed raises ConfigError
// with the offending line number. Nothing falls back to silent entropy.

struct ParsedConfig {
  ExperimentConfig experiment;
  std::optional<FadingModel> fading;  // engaged after a successful parse
  std::string csv_path;
  std::string trace_path;
};

ParsedConfig parse_config(std::string_view text);
ParsedConfig load_config(const std::string& path);

}  // namespace arqwep
