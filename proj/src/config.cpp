#include "arqwep/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "arqwep/errors.hpp"

namespace arqwep {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

uint64_t parse_u64(std::string_view value, int line) {
  std::string v(value);
  char* end = nullptr;
  errno = 0;
  unsigned long long out = std::strtoull(v.c_str(), &end, 10);
  if (errno != 0 || end != v.c_str() + v.size() || v.empty() || v[0] == '-')
    throw ConfigError(line, "expected a non-negative integer, got '" + v + "'");
  return out;
}

double parse_double(std::string_view value, int line) {
  std::string v(value);
  char* end = nullptr;
  errno = 0;
  double out = std::strtod(v.c_str(), &end);
  if (errno != 0 || end != v.c_str() + v.size() || v.empty())
    throw ConfigError(line, "expected a number, got '" + v + "'");
  return out;
}

bool parse_bool(std::string_view value, int line) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(line, "expected true or false, got '" + std::string(value) + "'");
}

std::vector<std::string_view> split_fields(std::string_view value) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < value.size()) {
    while (i < value.size() && std::isspace(static_cast<unsigned char>(value[i]))) ++i;
    size_t start = i;
    while (i < value.size() && !std::isspace(static_cast<unsigned char>(value[i]))) ++i;
    if (i > start) out.push_back(value.substr(start, i - start));
  }
  return out;
}

struct RawEntry {
  std::string key;
  std::string value;
  int line;
};

}  // namespace

ParsedConfig parse_config(std::string_view text) {
  ParsedConfig cfg;
  bool seed_set = false;

  std::vector<RawEntry> fading_entries;
  std::string section;
  int section_line = 0;

  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                           : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    std::string_view t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;

    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(line_no, "unterminated section header");
      section = std::string(trim(t.substr(1, t.size() - 2)));
      section_line = line_no;
      if (section != "experiment" && section != "fading" && section != "output")
        throw ConfigError(line_no, "unknown section [" + section + "]");
      continue;
    }

    size_t eq = t.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected key = value");
    std::string key(trim(t.substr(0, eq)));
    std::string value(trim(t.substr(eq + 1)));
    if (key.empty()) throw ConfigError(line_no, "empty key");
    if (section.empty()) throw ConfigError(line_no, "key outside any section");

    if (section == "experiment") {
      auto& e = cfg.experiment;
      if (key == "id") {
        e.id = value;
      } else if (key == "seed") {
        e.master_seed = parse_u64(value, line_no);
        seed_set = true;
      } else if (key == "trials") {
        e.trials = static_cast<size_t>(parse_u64(value, line_no));
        if (e.trials < 1) throw ConfigError(line_no, "trials must be at least 1");
      } else if (key == "n_data") {
        e.n_data = parse_u64(value, line_no);
      } else if (key == "n_init") {
        e.n_init_points.clear();
        for (auto field : split_fields(value)) e.n_init_points.push_back(parse_u64(field, line_no));
        if (e.n_init_points.empty()) throw ConfigError(line_no, "n_init needs at least one value");
      } else if (key == "retry_limit") {
        uint64_t v = parse_u64(value, line_no);
        if (v < 1 || v > 1000) throw ConfigError(line_no, "retry_limit must be in 1..1000");
        e.attempt_limit = static_cast<int>(v);
      } else if (key == "payload_len") {
        e.payload_len = static_cast<size_t>(parse_u64(value, line_no));
        if (e.payload_len < 1 || e.payload_len > 2304)
          throw ConfigError(line_no, "payload_len must be in 1..2304");
      } else if (key == "eve_capture_required") {
        e.eve_capture_required = parse_bool(value, line_no);
      } else if (key == "wep_key") {
        try {
          e.wep_key = SecretKey::from_hex(value);
        } catch (const std::exception& ex) {
          throw ConfigError(line_no, ex.what());
        }
      } else {
        throw ConfigError(line_no, "unknown key '" + key + "' in [experiment]");
      }
    } else if (section == "fading") {
      fading_entries.push_back(RawEntry{key, value, line_no});
    } else {  // output
      if (key == "csv") {
        cfg.csv_path = value;
      } else if (key == "trace") {
        cfg.trace_path = value;
        cfg.experiment.capture_trace = !value.empty();
      } else {
        throw ConfigError(line_no, "unknown key '" + key + "' in [output]");
      }
    }
  }

  if (!seed_set) throw ConfigError("missing required key 'seed' in [experiment]");

  // Assemble the fading model once all its keys are known, since the key set
  // depends on the kind.
  std::string kind;
  int kind_line = section_line;
  for (const auto& e : fading_entries) {
    if (e.key == "kind") {
      kind = e.value;
      kind_line = e.line;
    }
  }
  if (fading_entries.empty()) throw ConfigError("missing [fading] section with kind");
  if (kind.empty()) throw ConfigError("missing 'kind' in [fading]");

  auto take = [&](const char* key) -> const RawEntry* {
    for (const auto& e : fading_entries)
      if (e.key == key) return &e;
    return nullptr;
  };
  auto require = [&](const char* key) -> const RawEntry& {
    const RawEntry* e = take(key);
    if (!e) throw ConfigError(kind_line, std::string("fading kind '") + kind +
                                             "' requires key '" + key + "'");
    return *e;
  };
  auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
    for (const auto& e : fading_entries) {
      bool ok = e.key == "kind";
      for (const char* a : allowed) ok = ok || e.key == a;
      if (!ok) throw ConfigError(e.line, "unknown key '" + e.key + "' for fading kind '" + kind + "'");
    }
  };

  try {
    if (kind == "deterministic") {
      reject_unknown({"gab", "gae", "gba"});
      const auto &ab = require("gab"), &ae = require("gae"), &ba = require("gba");
      cfg.fading = FadingModel::deterministic({parse_double(ab.value, ab.line),
                                               parse_double(ae.value, ae.line),
                                               parse_double(ba.value, ba.line)});
    } else if (kind == "beta") {
      reject_unknown({"ab_alpha", "ab_beta", "ae_alpha", "ae_beta", "ba_alpha", "ba_beta"});
      auto param = [&](const char* a, const char* b) {
        const auto &ea = require(a), &eb = require(b);
        return BetaParams{parse_double(ea.value, ea.line), parse_double(eb.value, eb.line)};
      };
      cfg.fading = FadingModel::independent_beta(param("ab_alpha", "ab_beta"),
                                                 param("ae_alpha", "ae_beta"),
                                                 param("ba_alpha", "ba_beta"));
    } else if (kind == "mixture") {
      reject_unknown({"atom"});
      std::vector<double> weights;
      std::vector<ErasureTriple> atoms;
      for (const auto& e : fading_entries) {
        if (e.key != "atom") continue;
        auto fields = split_fields(e.value);
        if (fields.size() != 4)
          throw ConfigError(e.line, "atom needs 4 fields: weight gab gae gba");
        weights.push_back(parse_double(fields[0], e.line));
        atoms.push_back({parse_double(fields[1], e.line), parse_double(fields[2], e.line),
                         parse_double(fields[3], e.line)});
      }
      if (atoms.empty()) throw ConfigError(kind_line, "mixture needs at least one atom");
      cfg.fading = FadingModel::correlated_mixture(weights, atoms);
    } else {
      throw ConfigError(kind_line, "unknown fading kind '" + kind + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigError(kind_line, ex.what());
  }

  return cfg;
}

ParsedConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace arqwep
