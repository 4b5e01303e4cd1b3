#ifndef RHMC_ANALYSIS_HPP
#define RHMC_ANALYSIS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "rhmc/dynamics.hpp"
#include "rhmc/model.hpp"
#include "rhmc/random.hpp"
#include "rhmc/statistics.hpp"

namespace rhmc {

/// Integrated autocorrelation time of a scalar series.
struct IacEstimate {
  double value = 0.0;
  std::size_t window = 0;  ///< truncation lag W
  std::size_t n = 0;       ///< series length
  double std_error = 0.0;  ///< value * sqrt(2 (2W + 1) / n)
};

struct IacOptions {
  double window_factor = 5.0;    ///< Sokal constant c in W >= c * tau(W)
  std::size_t min_window = 12;   ///< floor on W; see README
};

/**
 * tau = 1 + 2 sum_{j=1}^{W} rho_j with the self-consistent window: W is the
 * smallest lag >= min_window with W >= c * tau(W).  If no such lag exists
 * below n/2 the largest examined lag is reported as the window.
 *
 * Requires n >= 100 and nonzero sample variance (DegenerateVariance
 * otherwise).
 */
IacEstimate iac_estimate(std::span<const double> series, const IacOptions& options = {});

/// 1 + 2 sigma^2 / lambda^2.
double iac_rhmc_formula(double sigma, double lambda);
/// (1 + cos(lambda/sigma)) / (1 - cos(lambda/sigma)); +inf at cos = 1.
double iac_hmc_formula(double sigma, double lambda);
/// sum_i 2 lambda^2 sigma_i^2 / (sigma_i^2 + lambda^2).
double msd_rhmc_formula(const Vector& sigmas, double lambda);
/// sum_i 2 (1 - cos(lambda/sigma_i)) sigma_i^2.
double msd_hmc_formula(const Vector& sigmas, double lambda);
/// sqrt(sum sigma^4 / sum sigma^2).  This is the stationary point of
/// msd_rhmc_formula(lambda) / lambda when (sigma_i^2 + lambda^2)^2 is replaced
/// by lambda^4; it is exact only when all sigmas are equal.
double optimal_lambda(const Vector& sigmas);

/// Exact maximizer of msd_rhmc_formula(lambda) / lambda, the root of
/// sum sigma^2 (sigma^2 - lambda^2) / (sigma^2 + lambda^2)^2 in [min sigma, max sigma].
double efficiency_maximizer(const Vector& sigmas);

/// True when lambda / sigma is within `tol` (relative) of a multiple of pi.
bool hmc_resonant(double sigma, double lambda, double tol = 1e-9);

/// Mean squared Euclidean distance between consecutive columns.
double msd_estimate(const Matrix& positions);

/// Constants of V(z) = H(z) + c1 <q, p> + c2 |q|^2 / 2.
struct LyapunovParams {
  double c1;
  double c2;
  double lambda;
  double angle;

  /// c1 = sin^2(angle) / (4 lambda), c2 = c1 (1 - cos(angle)) / lambda.
  static LyapunovParams make(double lambda, double angle);
};

double lyapunov_value(const TargetModel& target, const PhaseState& z, const LyapunovParams& params);

/// Closed form of the RHMC generator applied to V:
/// -2 c1 (|p|^2/2 + <grad Phi, q>/2) + D sin^2(angle) / (2 lambda).
double generator_on_lyapunov(const TargetModel& target, const PhaseState& z,
                             const LyapunovParams& params);

/// Mean of V over the replicas at one time.  `std_error` is NaN for a single
/// replica.
struct DriftPoint {
  double time;
  double mean_v;
  double std_error;
};

constexpr std::size_t kDriftGridPoints = 50;

/**
 * Runs n_replicas independent RHMC paths from z0 and averages V on the
 * uniform grid linspace(0, horizon, 50) (a single point when horizon == 0).
 * Replica r draws from RandomSource(rng.seed(), (rng.stream() << 32) + r), so
 * the result does not depend on how replicas are scheduled over threads.
 * A visible decay needs V(z0) well above its stationary mean.
 */
std::vector<DriftPoint> drift_verify(const TargetModel& target, const FlowMap& flow,
                                     const SamplerConfig& cfg, const PhaseState& z0,
                                     double horizon, std::size_t n_replicas,
                                     const RandomSource& rng, unsigned n_threads = 0);

}  // namespace rhmc

#endif  // RHMC_ANALYSIS_HPP
