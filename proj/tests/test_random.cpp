#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "rhmc/random.hpp"
#include "rhmc/statistics.hpp"

using namespace rhmc;

TEST_CASE("identical seed and stream reproduce the sequence") {
  RandomSource a(123, 7);
  RandomSource b(123, 7);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.uniform() == b.uniform());
    CHECK(a.standard_normal() == b.standard_normal());
  }
  CHECK(a.seed() == 123);
  CHECK(a.stream() == 7);
}

TEST_CASE("seeding follows the documented seed_seq recipe") {
  const std::uint64_t seed = 0x0123456789abcdefULL;
  const std::uint64_t stream = 42;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 reference(seq);
  RandomSource rng(seed, stream);
  for (int i = 0; i < 100; ++i) {
    const double expected = (static_cast<double>(reference() >> 11) + 1.0) * 0x1.0p-53;
    CHECK(rng.uniform() == expected);
  }
}

TEST_CASE("uniforms lie in (0, 1]") {
  RandomSource rng(1, 0);
  double lo = 1.0;
  double hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi <= 1.0);
}

TEST_CASE("normal vectors consume one uniform pair per two entries") {
  RandomSource vec_rng(5, 1);
  RandomSource ref(5, 1);
  const Vector v = vec_rng.standard_normal(3);
  const double u1 = ref.uniform();
  const double u2 = ref.uniform();
  const double u3 = ref.uniform();
  const double u4 = ref.uniform();
  const double r1 = std::sqrt(-2.0 * std::log(u1));
  const double r2 = std::sqrt(-2.0 * std::log(u3));
  CHECK(v(0) == doctest::Approx(r1 * std::cos(2.0 * std::numbers::pi * u2)).epsilon(1e-15));
  CHECK(v(1) == doctest::Approx(r1 * std::sin(2.0 * std::numbers::pi * u2)).epsilon(1e-15));
  CHECK(v(2) == doctest::Approx(r2 * std::cos(2.0 * std::numbers::pi * u4)).epsilon(1e-15));
  // The odd spare is dropped, so both sources are in step again.
  CHECK(vec_rng.uniform() == ref.uniform());
}

TEST_CASE("normal draws have unit variance and no lag correlation") {
  RandomSource rng(99, 3);
  std::vector<double> x(400000);
  for (std::size_t i = 0; i < x.size(); i += 4) {
    const Vector v = rng.standard_normal(4);
    for (int k = 0; k < 4; ++k) x[i + static_cast<std::size_t>(k)] = v(k);
  }
  const double se = 1.0 / std::sqrt(static_cast<double>(x.size()));
  CHECK(std::abs(mean(x)) < 4.0 * se);
  CHECK(std::abs(sample_variance(x) - 1.0) < 4.0 * std::sqrt(2.0) * se);
  CHECK(std::abs(autocorrelation(x, 1)) < 4.0 * se);
  CHECK(ks_statistic_normal(x, {}) < ks_critical_value(0.01, static_cast<double>(x.size())));
}

TEST_CASE("distinct streams are uncorrelated") {
  RandomSource a(2024, 0);
  RandomSource b(2024, 1);
  const int n = 200000;
  double sum = 0.0;
  int equal = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.standard_normal();
    const double y = b.standard_normal();
    sum += x * y;
    equal += x == y;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(equal == 0);
}

TEST_CASE("exponential inverse CDF") {
  CHECK(exponential_from_uniform(2.0, 1.0) == 0.0);
  CHECK(!std::signbit(exponential_from_uniform(2.0, 1.0)));
  CHECK(exponential_from_uniform(2.0, std::exp(-1.0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(exponential_from_uniform(0.5, 0.25) == doctest::Approx(0.5 * std::log(4.0)));
}
