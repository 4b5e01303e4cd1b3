#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "rhmc/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

const char* const kKeys[] = {"scenario",  "sampler",   "lambda-grid", "horowitz-angle",
                             "step-length", "n-samples", "seed",      "output",
                             "sigmas",    "burn-in",   "initial-q",   "initial-p",
                             "horizon",   "replicas",  "h-grid",      "threads"};

struct Subcommand {
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::string> flags;
};

void add_options(Subcommand& sub) {
  sub.app->add_option("--config", sub.config_path, "flat key=value configuration file");
  for (const char* key : kKeys) {
    sub.app->add_option(std::string("--") + key, sub.flags[key], std::string("override ") + key);
  }
}

rhmc::RawConfig collect(const Subcommand& sub) {
  rhmc::RawConfig raw;
  if (!sub.config_path.empty()) raw = rhmc::read_config_file(sub.config_path);
  rhmc::RawConfig overrides;
  for (const auto& [key, value] : sub.flags) {
    if (sub.app->count(std::string("--") + key) > 0) overrides[key] = value;
  }
  return rhmc::merge_config(std::move(raw), overrides);
}

std::string run(rhmc::Command command, const rhmc::ExperimentConfig& config) {
  std::ostringstream out;
  switch (command) {
    case rhmc::Command::kSweep: rhmc::write_sweep_csv(out, rhmc::run_sweep(config)); break;
    case rhmc::Command::kDriftCheck: rhmc::write_drift_csv(out, rhmc::run_drift_check(config)); break;
    case rhmc::Command::kVariantBias:
      rhmc::write_variant_bias_csv(out, rhmc::run_variant_bias(config));
      break;
    case rhmc::Command::kSample: rhmc::write_sample_csv(out, rhmc::run_sample(config)); break;
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized and fixed-duration Hamiltonian Monte Carlo experiments"};
  app.require_subcommand(1);

  const std::pair<rhmc::Command, std::pair<const char*, const char*>> specs[] = {
      {rhmc::Command::kSweep, {"sweep", "IAC and MSD over a grid of durations"}},
      {rhmc::Command::kDriftCheck, {"drift-check", "Lyapunov drift curve averaged over replicas"}},
      {rhmc::Command::kVariantBias, {"variant-bias", "second-moment bias of the jump processes"}},
      {rhmc::Command::kSample, {"sample", "raw path dump (t, q, p)"}},
  };
  std::map<rhmc::Command, Subcommand> subs;
  for (const auto& [command, names] : specs) {
    Subcommand& sub = subs[command];
    sub.app = app.add_subcommand(names.first, names.second);
    add_options(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  for (auto& [command, sub] : subs) {
    if (!sub.app->parsed()) continue;
    try {
      const rhmc::ExperimentConfig config = rhmc::build_config(collect(sub), command);
      rhmc::write_output(config.output_path, run(command, config));
      return 0;
    } catch (const rhmc::ConfigError& e) {
      for (const auto& v : e.violations()) std::cerr << "config error: " << v << '\n';
      return kExitConfig;
    } catch (const rhmc::ContractViolation& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitRuntime;
    }
  }
  return kExitConfig;
}
