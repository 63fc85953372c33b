// Command-line front end: one subcommand per experiment kind, all driven by
// a flat key=value config file.  Exit codes: 0 pass, 2 config error or a
// failed check, 3 guard refusal, 4 numerical failure.
#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "nlslab/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for long-time dynamics over a constant "
               "background and the associated singular filament flows"};
  app.require_subcommand(1);

  static const char* kinds[] = {
      "linear-evolve",    "linear-scatter", "nonlinear-evolve",
      "nonlinear-scatter", "modes",         "wave-op",
      "curve",            "corner-angle",   "sweep"};

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  for (const char* k : kinds) {
    auto* sub = app.add_subcommand(k, std::string("run a '") + k + "' experiment");
    sub->add_option("--config", config_path, "config file (key = value lines)")
        ->required();
    sub->add_option("--out", out_dir, "output directory for artifacts");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_flag("--quiet", quiet, "suppress the summary line");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string kind = app.get_subcommands().front()->get_name();

  try {
    nlslab::Config cfg = nlslab::load_config(config_path);
    if (cfg.has("kind") && cfg.get("kind") != kind) {
      std::fprintf(stderr, "config kind '%s' does not match subcommand '%s'\n",
                   cfg.get("kind").c_str(), kind.c_str());
      return 2;
    }
    cfg.set("kind", kind);
    return nlslab::run_experiment(cfg, out_dir, seed, quiet);
  } catch (const nlslab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const nlslab::GuardRefusal& e) {
    std::fprintf(stderr, "guard refusal: %s\n", e.what());
    return 3;
  } catch (const nlslab::NumericalFailure& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  }
}
