#ifndef RHMC_RANDOM_HPP
#define RHMC_RANDOM_HPP

#include <cstdint>
#include <random>

#include "rhmc/model.hpp"

namespace rhmc {

/**
 * Seeded pseudo-random stream identified by (master seed, stream index).
 *
 * The engine is std::mt19937_64 seeded through std::seed_seq with the four
 * 32-bit halves of (seed, stream); both are fully specified by the C++
 * standard, so a given pair yields the same sequence everywhere.  The
 * conversions below are written out rather than taken from <random>
 * distributions, whose algorithms are implementation-defined.
 *
 *  - uniform():  ((x >> 11) + 1) * 2^-53, in (0, 1]
 *  - normals:    Box-Muller on two uniforms u1, u2:
 *                sqrt(-2 ln u1) * (cos(2 pi u2), sin(2 pi u2)).
 *                A vector of length D consumes ceil(D/2) pairs in order;
 *                the spare value of an odd D is discarded.
 */
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  double uniform();
  double standard_normal();
  void fill_standard_normal(Vector& out);
  Vector standard_normal(Index dim);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

/// Inverse-CDF exponential with the given mean: -mean * ln(u), u in (0, 1].
double exponential_from_uniform(double mean, double u);

}  // namespace rhmc

#endif  // RHMC_RANDOM_HPP
