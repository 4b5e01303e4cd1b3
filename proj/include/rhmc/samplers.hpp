#ifndef RHMC_SAMPLERS_HPP
#define RHMC_SAMPLERS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "rhmc/dynamics.hpp"
#include "rhmc/model.hpp"
#include "rhmc/random.hpp"

namespace rhmc {

/**
 * Output of the discrete-time samplers.  Column i of `positions` is X_{i+1};
 * column i of `momenta` is the momentum held right after output i (after the
 * refresh for RHMC, at the end of the leg for HMC).  `jump_times` is empty
 * for fixed-duration HMC.
 */
struct ChainOutput {
  Matrix positions;
  Matrix momenta;
  std::vector<double> jump_times;
  std::size_t acceptance_count = 0;

  Index size() const noexcept { return positions.cols(); }
};

enum class JumpKind : std::uint8_t { kRandomize, kIntegrate, kFlip };

/**
 * Piecewise-constant path of a Markov jump process.  Column i of
 * `positions`/`momenta` holds on [times[i], times[i+1]); entry 0 is the
 * initial state at time 0.  kinds[i] is the jump that produced state i+1, so
 * kinds.size() == times.size() - 1.
 */
struct JumpPath {
  Matrix positions;
  Matrix momenta;
  std::vector<double> times;
  std::vector<JumpKind> kinds;

  Index size() const noexcept { return positions.cols(); }
  double final_time() const { return times.back(); }
  PhaseState state(Index i) const { return PhaseState(positions.col(i), momenta.col(i)); }
};

/// Momentum refresh with a given Gaussian vector: p <- cos(angle) p + sin(angle) xi.
PhaseState momentum_randomize_with(const PhaseState& z, double angle, const Vector& xi);

/// Momentum refresh drawing xi ~ N(0, I) from rng.
PhaseState momentum_randomize(const PhaseState& z, double angle, RandomSource& rng);

/// Exponential duration with mean lambda.
double draw_duration(double lambda, RandomSource& rng);

/**
 * Fixed-duration HMC with complete momentum refresh: each step draws
 * p ~ N(0, I), advances the flow for `duration` and records q.
 */
ChainOutput hmc_chain(const TargetModel& target, const FlowMap& flow, double duration,
                      std::size_t n_steps, const Vector& x0, RandomSource& rng);

/**
 * Metropolis-adjusted HMC: the proposal is verlet_flow over `duration` with
 * step dt, accepted with probability min(1, exp(H(z) - H(z'))).  On rejection
 * the recorded position repeats.  Uniforms are drawn only after the momentum.
 */
ChainOutput hmc_metropolis_chain(const TargetModel& target, double duration, double dt,
                                 std::size_t n_steps, const Vector& x0, RandomSource& rng);

/**
 * Randomized HMC.  Per event: duration ~ Exp(mean lambda), flow for that
 * duration, then momentum refresh with the Horowitz angle.  Records t_i and
 * q(t_i).  The initial momentum is taken from z0.
 */
ChainOutput rhmc_chain(const TargetModel& target, const FlowMap& flow, const SamplerConfig& cfg,
                       std::size_t n_events, const PhaseState& z0, RandomSource& rng);

/**
 * Jump-process discretization without bias correction.  Holding times are
 * Exp(mean h*lambda/(h+lambda)); with probability h/(h+lambda) the momentum
 * is refreshed, otherwise one Verlet step of length h is taken.
 */
JumpPath variant1_chain(const TargetModel& target, const SamplerConfig& cfg,
                        std::size_t n_events, const PhaseState& z0, RandomSource& rng);

/**
 * As variant1_chain, with the Verlet jump taken only with weight
 * alpha_h = min(1, exp(H(z) - H(theta_h z))) and a momentum flip otherwise.
 * Draw order per event: holding time, branch uniform, normals (refresh only).
 */
JumpPath variant2_chain(const TargetModel& target, const SamplerConfig& cfg,
                        std::size_t n_events, const PhaseState& z0, RandomSource& rng);

/// Metropolis weight of one Verlet step from z: min(1, exp(H(z) - H(theta_h z))).
double verlet_acceptance(const TargetModel& target, const PhaseState& z, double h);

using Observable = std::function<double(const PhaseState&)>;

/// (1/horizon) * integral_0^horizon f(Q(s), P(s)) ds along a jump path.
double time_average(const JumpPath& path, const Observable& f, double horizon);

/// Same, for an observable that only depends on the position column.
double time_average_position(const JumpPath& path,
                             const std::function<double(const Eigen::Ref<const Vector>&)>& f,
                             double horizon);

}  // namespace rhmc

#endif  // RHMC_SAMPLERS_HPP
