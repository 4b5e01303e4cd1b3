#include "rhmc/analysis.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "rhmc/samplers.hpp"

namespace rhmc {

IacEstimate iac_estimate(std::span<const double> series, const IacOptions& options) {
  const std::size_t n = series.size();
  if (n < 100) throw ContractViolation("iac_estimate: need at least 100 samples");
  const std::vector<double> cov = autocovariance(series, n / 2);
  if (!(cov[0] > 0.0)) throw DegenerateVariance("iac_estimate: series has zero variance");

  const std::size_t max_lag = cov.size() - 1;
  double tau = 1.0;
  std::size_t window = 0;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    tau += 2.0 * cov[lag] / cov[0];
    window = lag;
    if (lag >= options.min_window && static_cast<double>(lag) >= options.window_factor * tau) {
      break;
    }
  }
  IacEstimate est;
  est.value = tau;
  est.window = window;
  est.n = n;
  est.std_error =
      std::abs(tau) * std::sqrt(2.0 * (2.0 * static_cast<double>(window) + 1.0) /
                                static_cast<double>(n));
  return est;
}

double iac_rhmc_formula(double sigma, double lambda) {
  return 1.0 + 2.0 * sigma * sigma / (lambda * lambda);
}

double iac_hmc_formula(double sigma, double lambda) {
  const double c = std::cos(lambda / sigma);
  if (c >= 1.0) return std::numeric_limits<double>::infinity();
  return (1.0 + c) / (1.0 - c);
}

double msd_rhmc_formula(const Vector& sigmas, double lambda) {
  const double l2 = lambda * lambda;
  double sum = 0.0;
  for (Index i = 0; i < sigmas.size(); ++i) {
    const double s2 = sigmas[i] * sigmas[i];
    sum += 2.0 * l2 * s2 / (s2 + l2);
  }
  return sum;
}

double msd_hmc_formula(const Vector& sigmas, double lambda) {
  double sum = 0.0;
  for (Index i = 0; i < sigmas.size(); ++i) {
    sum += 2.0 * (1.0 - std::cos(lambda / sigmas[i])) * sigmas[i] * sigmas[i];
  }
  return sum;
}

double optimal_lambda(const Vector& sigmas) {
  if (sigmas.size() < 1 || !(sigmas.array() > 0.0).all()) {
    throw ContractViolation("optimal_lambda: need a nonempty vector of positive sigmas");
  }
  const double s2 = sigmas.array().square().sum();
  const double s4 = sigmas.array().square().square().sum();
  return std::sqrt(s4 / s2);
}

double efficiency_maximizer(const Vector& sigmas) {
  if (sigmas.size() < 1 || !(sigmas.array() > 0.0).all()) {
    throw ContractViolation("efficiency_maximizer: need a nonempty vector of positive sigmas");
  }
  const double lo = sigmas.minCoeff();
  const double hi = sigmas.maxCoeff();
  if (lo == hi) return lo;
  const auto slope = [&](double lambda) {
    const double l2 = lambda * lambda;
    double sum = 0.0;
    for (Index i = 0; i < sigmas.size(); ++i) {
      const double s2 = sigmas[i] * sigmas[i];
      sum += s2 * (s2 - l2) / ((s2 + l2) * (s2 + l2));
    }
    return sum;
  };
  std::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      slope, lo, hi, boost::math::tools::eps_tolerance<double>(52), iterations);
  return 0.5 * (a + b);
}

bool hmc_resonant(double sigma, double lambda, double tol) {
  const double turns = lambda / (sigma * std::numbers::pi);
  return std::abs(turns - std::round(turns)) <= tol * std::max(1.0, turns);
}

double msd_estimate(const Matrix& positions) {
  if (positions.cols() < 2) throw ContractViolation("msd_estimate: need at least two positions");
  double sum = 0.0;
  for (Index k = 1; k < positions.cols(); ++k) {
    sum += (positions.col(k) - positions.col(k - 1)).squaredNorm();
  }
  return sum / static_cast<double>(positions.cols() - 1);
}

LyapunovParams LyapunovParams::make(double lambda, double angle) {
  if (!(lambda > 0.0)) throw ContractViolation("LyapunovParams: lambda must be > 0");
  check_horowitz_angle(angle);
  const double s = std::sin(angle);
  LyapunovParams params{};
  params.lambda = lambda;
  params.angle = angle;
  params.c1 = s * s / (4.0 * lambda);
  params.c2 = params.c1 * (1.0 - std::cos(angle)) / lambda;
  if (!(params.c1 > 0.0) || !(params.c2 > params.c1 * params.c1)) {
    throw ContractViolation("LyapunovParams: c2 > c1^2 > 0 violated");
  }
  return params;
}

double lyapunov_value(const TargetModel& target, const PhaseState& z, const LyapunovParams& params) {
  const Vector& q = z.position();
  return hamiltonian(target, z) + params.c1 * q.dot(z.momentum()) +
         0.5 * params.c2 * q.squaredNorm();
}

double generator_on_lyapunov(const TargetModel& target, const PhaseState& z,
                             const LyapunovParams& params) {
  const Vector grad = target.gradient(z.position());
  const double s = std::sin(params.angle);
  const double kinetic = 0.5 * z.momentum().squaredNorm();
  const double virial = 0.5 * grad.dot(z.position());
  return -2.0 * params.c1 * (kinetic + virial) +
         static_cast<double>(z.dim()) * 0.5 * s * s / params.lambda;
}

namespace {

std::vector<double> drift_grid(double horizon) {
  if (horizon == 0.0) return {0.0};
  std::vector<double> grid(kDriftGridPoints);
  for (std::size_t k = 0; k < kDriftGridPoints; ++k) {
    grid[k] = horizon * static_cast<double>(k) / static_cast<double>(kDriftGridPoints - 1);
  }
  grid.back() = horizon;
  return grid;
}

// V along one RHMC path, sampled on the grid.  Event draws follow rhmc_chain:
// duration, flow, refresh normals.
void drift_replica(const TargetModel& target, const FlowMap& flow, const SamplerConfig& cfg,
                   const LyapunovParams& params, const PhaseState& z0,
                   const std::vector<double>& grid, RandomSource rng, double* out) {
  const double c = std::cos(cfg.horowitz_angle());
  const double s = std::sin(cfg.horowitz_angle());
  PhaseState z = z0;
  Vector xi(z0.dim());
  double t = 0.0;
  double next_event = draw_duration(cfg.mean_duration(), rng);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double target_time = grid[k];
    while (next_event <= target_time) {
      flow.advance(z, next_event - t);
      t = next_event;
      rng.fill_standard_normal(xi);
      z.momentum() = c * z.momentum() + s * xi;
      next_event = t + draw_duration(cfg.mean_duration(), rng);
    }
    flow.advance(z, target_time - t);
    t = target_time;
    if (!z.is_finite()) throw NonFiniteState("drift_verify: non-finite state", -1);
    out[k] = lyapunov_value(target, z, params);
  }
}

}  // namespace

std::vector<DriftPoint> drift_verify(const TargetModel& target, const FlowMap& flow,
                                     const SamplerConfig& cfg, const PhaseState& z0,
                                     double horizon, std::size_t n_replicas,
                                     const RandomSource& rng, unsigned n_threads) {
  if (z0.dim() != target.dim()) throw ContractViolation("drift_verify: dimension mismatch");
  if (!(horizon >= 0.0)) throw ContractViolation("drift_verify: horizon must be >= 0");
  if (n_replicas == 0) throw ContractViolation("drift_verify: need at least one replica");
  const LyapunovParams params = LyapunovParams::make(cfg.mean_duration(), cfg.horowitz_angle());
  const std::vector<double> grid = drift_grid(horizon);
  const std::size_t points = grid.size();

  // values[r * points + k] = V of replica r at grid point k.
  std::vector<double> values(n_replicas * points);
  std::vector<std::exception_ptr> errors(n_replicas);
  auto run = [&](std::size_t r) {
    try {
      drift_replica(target, flow, cfg, params, z0, grid,
                    RandomSource(rng.seed(), (rng.stream() << 32) + r), &values[r * points]);
    } catch (...) {
      errors[r] = std::current_exception();
    }
  };
  if (n_threads == 0) n_threads = std::max(1U, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_replicas));
  if (n_threads <= 1) {
    for (std::size_t r = 0; r < n_replicas; ++r) run(r);
  } else {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < n_threads; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t r = w; r < n_replicas; r += n_threads) run(r);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<DriftPoint> curve(points);
  const double n = static_cast<double>(n_replicas);
  for (std::size_t k = 0; k < points; ++k) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n_replicas; ++r) sum += values[r * points + k];
    const double m = sum / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < n_replicas; ++r) {
      const double d = values[r * points + k] - m;
      ss += d * d;
    }
    const double se = n_replicas > 1 ? std::sqrt(ss / (n - 1.0) / n)
                                     : std::numeric_limits<double>::quiet_NaN();
    curve[k] = {grid[k], m, se};
  }
  return curve;
}

}  // namespace rhmc
