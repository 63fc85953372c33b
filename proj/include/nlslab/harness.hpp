#pragma once
// Experiment orchestration: flat key=value configs, deterministic initial
// data families, experiment dispatch with CSV/JSON artifacts.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlslab/field.hpp"
#include "nlslab/params.hpp"

namespace nlslab {

// Flat INI-style configuration: `key = value` lines, '#'/';' comments.
struct Config {
  std::map<std::string, std::string> kv;
  std::vector<std::string> order;  // first-seen key order, for the echo

  bool has(const std::string& key) const { return kv.count(key) != 0; }
  std::string get(const std::string& key, const std::string& dflt = "") const;
  double num(const std::string& key, double dflt) const;
  double num_required(const std::string& key) const;
  long integer(const std::string& key, long dflt) const;
  void set(const std::string& key, const std::string& value);
};

Config parse_config_text(const std::string& text);
Config load_config(const std::string& path);

// FNV-1a over the canonical (sorted) "key=value\n" serialization.
std::uint64_t config_hash(const Config& cfg);

// Params (a, sign, gamma, delta, t0) read from a config.
Params params_from_config(const Config& cfg);

// Grid (grid_L, grid_n) read from a config.
Grid grid_from_config(const Config& cfg);

// Deterministic initial data from the family keys:
//   family = gaussian | band | lowfreq-cap | random-phase | chirped
//   amplitude, width, band_lo, band_hi, cap_gamma, seed
// Constructed in spectral space; the unpaired Nyquist slot stays empty.
SpectralField initial_data(const Config& cfg, const Grid& grid,
                           std::uint64_t seed);

// Run the experiment named by cfg "kind" and write report.json, manifest.json
// and the kind's CSV series into out_dir.  Returns 0 when every checked flag
// passes and 2 otherwise; guard refusals and numerical failures propagate as
// their exceptions.
int run_experiment(const Config& cfg, const std::string& out_dir,
                   std::optional<std::uint64_t> seed_override = {},
                   bool quiet = true);

}  // namespace nlslab
