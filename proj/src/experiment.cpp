#include "rhmc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "rhmc/samplers.hpp"

namespace rhmc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_gaussian(Scenario s) { return s != Scenario::kDoubleWell2d; }

bool full_refresh(double angle) { return std::abs(angle - std::numbers::pi / 2.0) <= 1e-15; }

std::unique_ptr<FlowMap> make_flow(const ExperimentConfig& config, const TargetModel& target) {
  if (is_gaussian(config.scenario)) return std::make_unique<ExactGaussianFlow>(config.sigmas);
  return std::make_unique<VerletFlow>(target, config.step_length);
}

/// Start of a chain: configured values, else a stationary draw for Gaussian
/// targets and the right-hand well for the double well.
PhaseState initial_state(const ExperimentConfig& config, RandomSource& rng) {
  const Index dim = is_gaussian(config.scenario) ? config.sigmas.size() : 2;
  Vector q;
  if (config.initial_q) {
    q = *config.initial_q;
  } else if (is_gaussian(config.scenario)) {
    q = rng.standard_normal(dim).cwiseProduct(config.sigmas);
  } else {
    q = Vector{{2.0, 1.0}};
  }
  Vector p = config.initial_p ? *config.initial_p : rng.standard_normal(dim);
  return PhaseState(std::move(q), std::move(p));
}

PhaseState last_state(const ChainOutput& out) {
  const Index n = out.size() - 1;
  return PhaseState(out.positions.col(n), out.momenta.col(n));
}

/// Runs `work(k)` for k in [0, n) on a pool of worker threads; the first
/// failure in index order is rethrown after all workers finish.
template <class Work>
void parallel_for(std::size_t n, unsigned threads, Work&& work) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t k) {
    try {
      work(k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (threads <= 1) {
    for (std::size_t k = 0; k < n; ++k) guarded(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < n; k = next++) guarded(k);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct ChainResult {
  Matrix positions;  ///< post-burn-in, one column per recorded state
};

ChainResult run_chain(const ExperimentConfig& config, const TargetModel& target,
                      const FlowMap& flow, double lambda, RandomSource& rng) {
  PhaseState z = initial_state(config, rng);
  const SamplerConfig cfg(lambda, config.horowitz_angle, config.step_length, config.seed);
  ChainResult result;
  switch (config.sampler) {
    case SamplerKind::kHmc:
    case SamplerKind::kHmcMetropolis: {
      auto run = [&](std::size_t n, const Vector& x0) {
        return config.sampler == SamplerKind::kHmc
                   ? hmc_chain(target, flow, lambda, n, x0, rng)
                   : hmc_metropolis_chain(target, lambda, config.step_length, n, x0, rng);
      };
      Vector x0 = z.position();
      if (config.burn_in > 0) x0 = last_state(run(config.burn_in, x0)).position();
      result.positions = run(config.n_samples, x0).positions;
      break;
    }
    case SamplerKind::kRhmc:
      if (config.burn_in > 0) z = last_state(rhmc_chain(target, flow, cfg, config.burn_in, z, rng));
      result.positions = rhmc_chain(target, flow, cfg, config.n_samples, z, rng).positions;
      break;
    case SamplerKind::kVariant1:
    case SamplerKind::kVariant2: {
      auto run = [&](std::size_t n, const PhaseState& start) {
        return config.sampler == SamplerKind::kVariant1 ? variant1_chain(target, cfg, n, start, rng)
                                                        : variant2_chain(target, cfg, n, start, rng);
      };
      if (config.burn_in > 0) {
        const JumpPath warm = run(config.burn_in, z);
        z = warm.state(warm.size() - 1);
      }
      const JumpPath path = run(config.n_samples, z);
      result.positions = path.positions.rightCols(path.size() - 1);
      break;
    }
  }
  return result;
}

struct Observable1d {
  int component_index;
  std::vector<double> series;
  std::optional<double> analytic;
  bool resonant = false;
};

std::vector<Observable1d> tracked_observables(const ExperimentConfig& config, const Matrix& x,
                                              double lambda) {
  std::vector<Observable1d> out;
  const auto n = static_cast<std::size_t>(x.cols());
  if (!is_gaussian(config.scenario)) {
    Observable1d obs{1, std::vector<double>(n), std::nullopt};
    for (std::size_t i = 0; i < n; ++i) {
      obs.series[i] = 2.0 * x(0, static_cast<Index>(i)) + x(1, static_cast<Index>(i));
    }
    out.push_back(std::move(obs));
    return out;
  }
  for (Index c = 0; c < x.rows(); ++c) {
    Observable1d obs{static_cast<int>(c) + 1, std::vector<double>(n), std::nullopt};
    for (std::size_t i = 0; i < n; ++i) obs.series[i] = x(c, static_cast<Index>(i));
    const double sigma = config.sigmas(c);
    if (config.sampler == SamplerKind::kHmc) {
      obs.analytic = iac_hmc_formula(sigma, lambda);
      obs.resonant = hmc_resonant(sigma, lambda);
    } else if (config.sampler == SamplerKind::kRhmc && full_refresh(config.horowitz_angle)) {
      obs.analytic = iac_rhmc_formula(sigma, lambda);
    }
    out.push_back(std::move(obs));
  }
  return out;
}

std::vector<SweepRecord> sweep_point(const ExperimentConfig& config, double lambda,
                                     std::size_t stream) {
  const auto target = make_target(config);
  const auto flow = make_flow(config, *target);
  RandomSource rng(config.seed, stream);
  const ChainResult chain = run_chain(config, *target, *flow, lambda, rng);

  std::vector<SweepRecord> records;
  const std::string scenario = to_string(config.scenario);
  const std::string sampler = to_string(config.sampler);

  SweepRecord msd{scenario, sampler, lambda, -1, "msd", msd_estimate(chain.positions),
                  std::nullopt, config.n_samples, config.seed, std::nullopt, ""};
  if (is_gaussian(config.scenario)) {
    if (config.sampler == SamplerKind::kHmc) {
      msd.analytic_value = msd_hmc_formula(config.sigmas, lambda);
    } else if (config.sampler == SamplerKind::kRhmc && full_refresh(config.horowitz_angle)) {
      msd.analytic_value = msd_rhmc_formula(config.sigmas, lambda);
    }
  }
  records.push_back(msd);

  for (auto& obs : tracked_observables(config, chain.positions, lambda)) {
    SweepRecord rec{scenario, sampler, lambda, obs.component_index, "iac", kNaN,
                    obs.analytic, config.n_samples, config.seed, std::nullopt, ""};
    try {
      const IacEstimate est = iac_estimate(obs.series);
      rec.empirical_value = est.value;
      rec.window = est.window;
      if (obs.resonant) rec.flag = "resonant";
    } catch (const DegenerateVariance&) {
      rec.flag = obs.resonant ? "resonant" : "degenerate";
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::unique_ptr<TargetModel> make_target(const ExperimentConfig& config) {
  if (is_gaussian(config.scenario)) return std::make_unique<DiagonalGaussianTarget>(config.sigmas);
  return std::make_unique<DoubleWell2D>();
}

std::vector<SweepRecord> run_sweep(const ExperimentConfig& config) {
  const std::size_t n = config.lambda_grid.size();
  std::vector<std::vector<SweepRecord>> per_point(n);
  parallel_for(n, config.threads, [&](std::size_t k) {
    per_point[k] = sweep_point(config, config.lambda_grid[k], k);
  });
  std::vector<SweepRecord> records;
  for (auto& block : per_point) {
    records.insert(records.end(), std::make_move_iterator(block.begin()),
                   std::make_move_iterator(block.end()));
  }
  std::stable_sort(records.begin(), records.end(), [](const SweepRecord& a, const SweepRecord& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return a.component_index < b.component_index;
  });
  return records;
}

std::vector<VariantBiasRecord> run_variant_bias(const ExperimentConfig& config) {
  if (config.scenario != Scenario::kGaussian1d) {
    throw ConfigError({"scenario: variant-bias is defined for gaussian1d only"});
  }
  if (config.sampler != SamplerKind::kVariant1 && config.sampler != SamplerKind::kVariant2) {
    throw ConfigError({"sampler: variant-bias needs variant1 or variant2"});
  }
  const double lambda = config.lambda_grid.empty() ? 1.0 : config.lambda_grid.front();
  const std::size_t n = config.h_grid.size();
  std::vector<VariantBiasRecord> out(n);
  parallel_for(n, config.threads, [&](std::size_t k) {
    const double h = config.h_grid[k];
    const auto target = make_target(config);
    RandomSource rng(config.seed, k);
    const PhaseState z0 = initial_state(config, rng);
    const SamplerConfig cfg(lambda, config.horowitz_angle, h, config.seed);
    const JumpPath path = config.sampler == SamplerKind::kVariant1
                              ? variant1_chain(*target, cfg, config.n_samples, z0, rng)
                              : variant2_chain(*target, cfg, config.n_samples, z0, rng);
    const double q2 = time_average_position(
        path, [](const Eigen::Ref<const Vector>& q) { return q(0) * q(0); }, path.final_time());
    out[k] = {h, q2, q2 - 1.0, config.n_samples};
  });
  return out;
}

std::vector<DriftPoint> run_drift_check(const ExperimentConfig& config) {
  const auto target = make_target(config);
  const auto flow = make_flow(config, *target);
  const Index dim = target->dim();
  const double start = is_gaussian(config.scenario) ? 10.0 : 6.0;
  PhaseState z0(config.initial_q.value_or(Vector::Constant(dim, start)),
                config.initial_p.value_or(Vector::Zero(dim)));
  const double lambda = config.lambda_grid.empty() ? 1.0 : config.lambda_grid.front();
  const SamplerConfig cfg(lambda, config.horowitz_angle, config.step_length, config.seed);
  return drift_verify(*target, *flow, cfg, z0, config.horizon, config.replicas,
                      RandomSource(config.seed, 0), config.threads);
}

SampleDump run_sample(const ExperimentConfig& config) {
  const auto target = make_target(config);
  const auto flow = make_flow(config, *target);
  RandomSource rng(config.seed, 0);
  const PhaseState z0 = initial_state(config, rng);
  const double lambda = config.lambda_grid.empty() ? 1.0 : config.lambda_grid.front();
  const SamplerConfig cfg(lambda, config.horowitz_angle, config.step_length, config.seed);
  const Index dim = z0.dim();
  const auto n = static_cast<Index>(config.n_samples);

  SampleDump dump;
  switch (config.sampler) {
    case SamplerKind::kVariant1:
    case SamplerKind::kVariant2: {
      JumpPath path = config.sampler == SamplerKind::kVariant1
                          ? variant1_chain(*target, cfg, config.n_samples, z0, rng)
                          : variant2_chain(*target, cfg, config.n_samples, z0, rng);
      dump.times = std::move(path.times);
      dump.positions = std::move(path.positions);
      dump.momenta = std::move(path.momenta);
      return dump;
    }
    case SamplerKind::kHmc:
    case SamplerKind::kHmcMetropolis:
    case SamplerKind::kRhmc: {
      const ChainOutput out =
          config.sampler == SamplerKind::kHmc
              ? hmc_chain(*target, *flow, lambda, config.n_samples, z0.position(), rng)
          : config.sampler == SamplerKind::kHmcMetropolis
              ? hmc_metropolis_chain(*target, lambda, config.step_length, config.n_samples,
                                     z0.position(), rng)
              : rhmc_chain(*target, *flow, cfg, config.n_samples, z0, rng);
      dump.positions.resize(dim, n + 1);
      dump.momenta.resize(dim, n + 1);
      dump.positions.col(0) = z0.position();
      dump.momenta.col(0) = z0.momentum();
      dump.positions.rightCols(n) = out.positions;
      dump.momenta.rightCols(n) = out.momenta;
      dump.times.resize(static_cast<std::size_t>(n) + 1, 0.0);
      for (Index i = 0; i < n; ++i) {
        dump.times[static_cast<std::size_t>(i) + 1] =
            out.jump_times.empty() ? static_cast<double>(i + 1) * lambda
                                   : out.jump_times[static_cast<std::size_t>(i)];
      }
      return dump;
    }
  }
  return dump;
}

std::string format_real(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << "scenario,sampler,lambda,component_index,statistic,empirical_value,analytic_value,"
         "n_samples,seed,window,flag\n";
  for (const auto& r : records) {
    out << csv_field(r.scenario) << ',' << csv_field(r.sampler) << ',' << format_real(r.lambda)
        << ',' << r.component_index << ',' << r.statistic << ',' << format_real(r.empirical_value)
        << ',' << (r.analytic_value ? format_real(*r.analytic_value) : "") << ',' << r.n_samples
        << ',' << r.seed << ',' << (r.window ? std::to_string(*r.window) : "") << ','
        << csv_field(r.flag) << '\n';
  }
}

void write_variant_bias_csv(std::ostream& out, const std::vector<VariantBiasRecord>& records) {
  out << "h,time_weighted_q2,bias,n_events\n";
  for (const auto& r : records) {
    out << format_real(r.h) << ',' << format_real(r.time_weighted_q2) << ','
        << format_real(r.bias) << ',' << r.n_events << '\n';
  }
}

void write_drift_csv(std::ostream& out, const std::vector<DriftPoint>& curve) {
  out << "time,mean_v,replica_stderr\n";
  for (const auto& p : curve) {
    out << format_real(p.time) << ',' << format_real(p.mean_v) << ','
        << format_real(p.std_error) << '\n';
  }
}

void write_sample_csv(std::ostream& out, const SampleDump& dump) {
  const Index dim = dump.positions.rows();
  out << 't';
  for (Index i = 1; i <= dim; ++i) out << ",q_" << i;
  for (Index i = 1; i <= dim; ++i) out << ",p_" << i;
  out << '\n';
  for (std::size_t k = 0; k < dump.times.size(); ++k) {
    const auto c = static_cast<Index>(k);
    out << format_real(dump.times[k]);
    for (Index i = 0; i < dim; ++i) out << ',' << format_real(dump.positions(i, c));
    for (Index i = 0; i < dim; ++i) out << ',' << format_real(dump.momenta(i, c));
    out << '\n';
  }
}

void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content << std::flush;
    if (!std::cout) throw OutputError("cannot write to standard output");
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw OutputError("cannot open '" + path + "' for writing");
  file << content;
  file.close();
  if (!file) throw OutputError("error while writing '" + path + "'");
}

}  // namespace rhmc
