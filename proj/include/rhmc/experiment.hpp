#ifndef RHMC_EXPERIMENT_HPP
#define RHMC_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rhmc/analysis.hpp"
#include "rhmc/model.hpp"

namespace rhmc {

enum class Scenario { kGaussian1d, kGaussian10d, kDoubleWell2d, kCustom };
enum class SamplerKind { kHmc, kHmcMetropolis, kRhmc, kVariant1, kVariant2 };
enum class Command { kSweep, kDriftCheck, kVariantBias, kSample };

/// Invalid configuration; carries every violation found, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Output file could not be written.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::kGaussian1d;
  SamplerKind sampler = SamplerKind::kRhmc;
  std::vector<double> lambda_grid;
  double horowitz_angle = 1.5707963267948966;
  double step_length = 1e-3;
  std::size_t n_samples = 1000000;
  std::uint64_t seed = 1;
  std::string output_path = "-";

  Vector sigmas;  ///< component standard deviations (Gaussian scenarios)
  std::size_t burn_in = 0;
  std::optional<Vector> initial_q;
  std::optional<Vector> initial_p;
  double horizon = 30.0;
  std::size_t replicas = 1000;
  std::vector<double> h_grid;
  unsigned threads = 0;  ///< 0: hardware concurrency
};

/// key -> raw value, keys normalized to dash-case.
using RawConfig = std::map<std::string, std::string>;

/// Parses flat `key = value` text; `#` starts a comment.
RawConfig parse_config_text(const std::string& text);
RawConfig read_config_file(const std::string& path);

/// Entries of `overrides` replace those of `base`.
RawConfig merge_config(RawConfig base, const RawConfig& overrides);

/// Validates and applies defaults.  Throws ConfigError listing all problems.
ExperimentConfig build_config(const RawConfig& raw, Command command);

/// Parses a real; also accepts multiples/fractions of pi such as "pi/2",
/// "3pi/4" or "2*pi".
std::optional<double> parse_real(const std::string& token);

std::string to_string(Scenario s);
std::string to_string(SamplerKind s);

struct SweepRecord {
  std::string scenario;
  std::string sampler;
  double lambda;
  int component_index;  ///< 1-based component, -1 for aggregate statistics
  std::string statistic;  ///< "iac" or "msd"
  double empirical_value;  ///< NaN when undefined
  std::optional<double> analytic_value;
  std::size_t n_samples;
  std::uint64_t seed;
  std::optional<std::size_t> window;
  std::string flag;  ///< "resonant", "degenerate" or empty
};

std::vector<SweepRecord> run_sweep(const ExperimentConfig& config);

struct VariantBiasRecord {
  double h;
  double time_weighted_q2;
  double bias;
  std::size_t n_events;
};

std::vector<VariantBiasRecord> run_variant_bias(const ExperimentConfig& config);

std::vector<DriftPoint> run_drift_check(const ExperimentConfig& config);

/// Raw path: rows (t, q_1..q_D, p_1..p_D), starting with the initial state.
struct SampleDump {
  std::vector<double> times;
  Matrix positions;
  Matrix momenta;
};

SampleDump run_sample(const ExperimentConfig& config);

/// Target for a scenario (sigmas are used for the Gaussian ones).
std::unique_ptr<TargetModel> make_target(const ExperimentConfig& config);

/// Fixed 17-significant-digit rendering; NaN renders as an empty field.
std::string format_real(double x);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);
void write_variant_bias_csv(std::ostream& out, const std::vector<VariantBiasRecord>& records);
void write_drift_csv(std::ostream& out, const std::vector<DriftPoint>& curve);
void write_sample_csv(std::ostream& out, const SampleDump& dump);

/// Writes `content` to `path`, or to stdout when path is "-".
void write_output(const std::string& path, const std::string& content);

}  // namespace rhmc

#endif  // RHMC_EXPERIMENT_HPP
