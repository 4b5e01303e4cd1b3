#include "rhmc/statistics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>

#include "rhmc/model.hpp"

namespace rhmc {

namespace {

// FFTW's planner is not re-entrant; only fftw_execute is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

double mean(std::span<const double> x) {
  if (x.empty()) throw ContractViolation("mean: empty series");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw ContractViolation("sample_variance: need at least two values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (n < 2) throw ContractViolation("autocovariance: need at least two values");
  max_lag = std::min(max_lag, n - 1);
  const double m = mean(x);
  const std::size_t size = next_pow2(2 * n);
  const std::size_t bins = size / 2 + 1;

  std::unique_ptr<double, FftwFree> buf(fftw_alloc_real(size));
  std::unique_ptr<fftw_complex, FftwFree> spec(
      reinterpret_cast<fftw_complex*>(fftw_alloc_complex(bins)));
  fftw_plan forward;
  fftw_plan backward;
  {
    std::lock_guard lock(fftw_planner_mutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(size), buf.get(), spec.get(), FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(size), spec.get(), buf.get(), FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) buf.get()[i] = x[i] - m;
  std::fill(buf.get() + n, buf.get() + size, 0.0);
  fftw_execute(forward);
  for (std::size_t k = 0; k < bins; ++k) {
    fftw_complex& c = spec.get()[k];
    c[0] = c[0] * c[0] + c[1] * c[1];
    c[1] = 0.0;
  }
  fftw_execute(backward);

  std::vector<double> out(max_lag + 1);
  const double scale = 1.0 / (static_cast<double>(size) * static_cast<double>(n));
  for (std::size_t k = 0; k <= max_lag; ++k) out[k] = buf.get()[k] * scale;
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  return out;
}

double autocorrelation(std::span<const double> x, std::size_t lag) {
  if (lag + 1 >= x.size()) throw ContractViolation("autocorrelation: lag too large");
  const double m = mean(x);
  double c0 = 0.0;
  double ck = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    c0 += (x[i] - m) * (x[i] - m);
    if (i + lag < x.size()) ck += (x[i] - m) * (x[i + lag] - m);
  }
  if (c0 == 0.0) throw DegenerateVariance("autocorrelation: series has zero variance");
  return ck / c0;
}

double batch_means_stderr(std::span<const double> x, std::size_t n_batches) {
  if (n_batches < 2 || x.size() < 2 * n_batches) {
    throw ContractViolation("batch_means_stderr: series too short for the batch count");
  }
  const std::size_t len = x.size() / n_batches;
  std::vector<double> means(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    means[b] = mean(x.subspan(b * len, len));
  }
  return std::sqrt(sample_variance(means) / static_cast<double>(n_batches));
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_statistic_normal(std::span<const double> values, std::span<const double> weights,
                           double mean_value, double sd) {
  if (values.empty()) throw ContractViolation("ks_statistic_normal: empty sample");
  if (!weights.empty() && weights.size() != values.size()) {
    throw ContractViolation("ks_statistic_normal: weights and values differ in length");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const auto weight = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) total += weight(i);
  if (!(total > 0.0)) throw ContractViolation("ks_statistic_normal: weights sum to zero");

  double below = 0.0;
  double d = 0.0;
  std::size_t k = 0;
  while (k < order.size()) {
    // Ties share a single jump of the empirical CDF.
    const double v = values[order[k]];
    const double cdf = standard_normal_cdf((v - mean_value) / sd);
    const double before = below / total;
    while (k < order.size() && values[order[k]] == v) below += weight(order[k++]);
    const double after = below / total;
    d = std::max({d, std::abs(cdf - before), std::abs(after - cdf)});
  }
  return d;
}

double ks_critical_value(double alpha, double n) {
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(n);
}

}  // namespace rhmc
