#ifndef RHMC_DYNAMICS_HPP
#define RHMC_DYNAMICS_HPP

#include <array>
#include <functional>

#include "rhmc/model.hpp"

namespace rhmc {

/// Deterministic map (z, t) -> z(t) for a fixed target.
class FlowMap {
 public:
  virtual ~FlowMap() = default;

  /// Advances z in place by a duration t >= 0.  t == 0 leaves z untouched.
  virtual void advance(PhaseState& z, double t) const = 0;

  PhaseState apply(PhaseState z, double t) const {
    advance(z, t);
    return z;
  }
};

/// Closed-form flow for Phi(q) = sum q_i^2 / (2 sigma_i^2): each (q_i, p_i)
/// rotates with angular frequency 1/sigma_i.
class ExactGaussianFlow final : public FlowMap {
 public:
  explicit ExactGaussianFlow(Vector sigmas);

  void advance(PhaseState& z, double t) const override;

  const Vector& sigmas() const noexcept { return sigmas_; }

 private:
  Vector sigmas_;
};

/**
 * Velocity Verlet with a two-entry gradient cache.
 *
 * The cache is keyed by position, so after `step` the gradient at the new
 * position is remembered, and an unchanged position (momentum refresh or
 * flip in between) reuses the old one.  Each step therefore costs exactly one
 * new gradient evaluation once the starting gradient is known.
 */
class VerletStepper {
 public:
  explicit VerletStepper(const TargetModel& target);

  const TargetModel& target() const noexcept { return *target_; }

  /// z <- theta_dt(z).
  void step(PhaseState& z, double dt);

  /// out <- theta_dt(z); z is left unchanged.  `out` must have z's dimension.
  void propose(const PhaseState& z, double dt, PhaseState& out);

  /// Gradient of the potential at q, served from the cache when possible.
  const Vector& gradient_at(const Vector& q);

  std::size_t gradient_evaluations() const noexcept { return evaluations_; }

 private:
  struct Slot {
    Vector q;
    Vector grad;
    bool valid = false;
  };

  Slot& fresh_slot(const Vector& keep_q);

  const TargetModel* target_;
  std::array<Slot, 2> slots_;
  std::size_t evaluations_ = 0;
};

/// Verlet flow over an arbitrary duration: ceil(t/dt) steps where the last
/// one is shortened so the elapsed time is exactly t.
class VerletFlow final : public FlowMap {
 public:
  VerletFlow(const TargetModel& target, double dt);

  void advance(PhaseState& z, double t) const override;

  double dt() const noexcept { return dt_; }

 private:
  const TargetModel* target_;
  double dt_;
};

PhaseState exact_gaussian_flow(const Vector& sigmas, const PhaseState& z, double t);

/// q1 = q + dt p - dt^2/2 grad(q);  p1 = p - dt/2 (grad(q) + grad(q1)).
/// Throws NonFiniteState when the result is not finite.
PhaseState verlet_step(const TargetModel& target, const PhaseState& z, double dt);

PhaseState verlet_flow(const TargetModel& target, const PhaseState& z, double t, double dt);

/// (q, p) -> (q, -p).
PhaseState momentum_flip(const PhaseState& z);
void flip_momentum_in_place(PhaseState& z) noexcept;

/// Number of Verlet steps used to cover duration t with nominal step dt.
long verlet_step_count(double t, double dt);

using StepMap = std::function<PhaseState(const PhaseState&)>;

/// max |(step o flip o step o flip)(z) - z|.  Zero for a reversible map.
double reversibility_defect(const StepMap& step, const PhaseState& z);
double reversibility_defect(const TargetModel& target, const PhaseState& z, double dt);
double reversibility_defect(const FlowMap& flow, const PhaseState& z, double t);

/// Determinant of the central-difference Jacobian (step 1e-6) of `step`.
double jacobian_determinant(const StepMap& step, const PhaseState& z, double fd_step = 1e-6);
double jacobian_determinant(const TargetModel& target, const PhaseState& z, double dt);

}  // namespace rhmc

#endif  // RHMC_DYNAMICS_HPP
