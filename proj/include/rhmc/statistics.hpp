#ifndef RHMC_STATISTICS_HPP
#define RHMC_STATISTICS_HPP

#include <span>
#include <stdexcept>
#include <vector>

namespace rhmc {

/// Raised by estimators fed a series with zero sample variance.
class DegenerateVariance : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

double mean(std::span<const double> x);
/// Unbiased sample variance (divides by n - 1).
double sample_variance(std::span<const double> x);

/// Biased autocovariances C_k = (1/n) sum_i (x_i - mean)(x_{i+k} - mean) for
/// k = 0 .. max_lag, computed with a zero-padded FFT.
std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag);

/// Lag-k sample autocorrelation C_k / C_0.
double autocorrelation(std::span<const double> x, std::size_t lag);

/// Standard error of the mean from non-overlapping batch means.
double batch_means_stderr(std::span<const double> x, std::size_t n_batches = 100);

double standard_normal_cdf(double x);

/**
 * Kolmogorov-Smirnov distance between the (optionally weighted) empirical
 * distribution of `values` and N(mean, sd^2).  With empty `weights` every
 * value has weight 1.
 */
double ks_statistic_normal(std::span<const double> values, std::span<const double> weights,
                           double mean = 0.0, double sd = 1.0);

/// Asymptotic one-sample KS critical value sqrt(-ln(alpha/2)/2) / sqrt(n).
double ks_critical_value(double alpha, double n);

}  // namespace rhmc

#endif  // RHMC_STATISTICS_HPP
