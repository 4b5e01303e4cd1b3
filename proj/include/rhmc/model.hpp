#ifndef RHMC_MODEL_HPP
#define RHMC_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace rhmc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when a caller breaks a documented precondition (dimension
/// mismatch, parameter out of range, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a chain produces a NaN or infinite state.  `last_valid_index`
/// is the index of the last recorded output that was finite, or -1 when the
/// failure happened before anything was recorded.
class NonFiniteState : public std::runtime_error {
 public:
  NonFiniteState(const std::string& what, long long last_valid_index)
      : std::runtime_error(what), last_valid_index_(last_valid_index) {}

  long long last_valid_index() const noexcept { return last_valid_index_; }

 private:
  long long last_valid_index_;
};

/**
 * A point z = (q, p) of phase space.  Position and momentum always share the
 * same length D >= 1 and, on construction, must be finite.
 */
class PhaseState {
 public:
  PhaseState(Vector position, Vector momentum);

  /// State with the given position and zero momentum.
  static PhaseState at_rest(Vector position);

  Index dim() const noexcept { return position_.size(); }

  const Vector& position() const noexcept { return position_; }
  const Vector& momentum() const noexcept { return momentum_; }
  // Mutable access is for in-place integrators; callers must keep lengths.
  Vector& position() noexcept { return position_; }
  Vector& momentum() noexcept { return momentum_; }

  bool is_finite() const noexcept {
    return position_.allFinite() && momentum_.allFinite();
  }

  friend bool operator==(const PhaseState& a, const PhaseState& b) {
    return a.position_ == b.position_ && a.momentum_ == b.momentum_;
  }

 private:
  Vector position_;
  Vector momentum_;
};

/**
 * Target density proportional to exp(-potential(q)).
 *
 * Only the potential and its gradient are exposed.  Public entry points check
 * the argument length; implementations override the unchecked hooks.
 */
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual Index dim() const noexcept = 0;
  virtual std::string_view name() const noexcept = 0;

  double potential(const Vector& q) const {
    check_dim(q);
    return eval_potential(q);
  }

  Vector gradient(const Vector& q) const {
    check_dim(q);
    Vector out(dim());
    eval_gradient(q, out);
    return out;
  }

  /// Allocation-free variant for integrator loops; `out` must have length D.
  void gradient_into(const Vector& q, Vector& out) const {
    check_dim(q);
    if (out.size() != dim()) throw_dim_mismatch(out.size());
    eval_gradient(q, out);
  }

 protected:
  virtual double eval_potential(const Vector& q) const = 0;
  virtual void eval_gradient(const Vector& q, Vector& out) const = 0;

 private:
  void check_dim(const Vector& q) const {
    if (q.size() != dim()) throw_dim_mismatch(q.size());
  }
  [[noreturn]] void throw_dim_mismatch(Index got) const;
};

/// Phi(q) = sum_i q_i^2 / (2 sigma_i^2).
class DiagonalGaussianTarget final : public TargetModel {
 public:
  explicit DiagonalGaussianTarget(Vector sigmas);

  Index dim() const noexcept override { return sigmas_.size(); }
  std::string_view name() const noexcept override { return "diagonal_gaussian"; }

  const Vector& sigmas() const noexcept { return sigmas_; }

 protected:
  double eval_potential(const Vector& q) const override;
  void eval_gradient(const Vector& q, Vector& out) const override;

 private:
  Vector sigmas_;
  Vector inv_var_;
};

/**
 * Phi(x1, x2) = 5 (x2^2 - 1)^2 + 1.25 (x2 - x1/2)^2.
 *
 * Minima at (2, 1) and (-2, -1) with Phi = 0, saddle at the origin with
 * Phi = 5.  Phi >= 0 everywhere.
 */
class DoubleWell2D final : public TargetModel {
 public:
  Index dim() const noexcept override { return 2; }
  std::string_view name() const noexcept override { return "double_well_2d"; }

 protected:
  double eval_potential(const Vector& q) const override;
  void eval_gradient(const Vector& q, Vector& out) const override;
};

/**
 * Mean duration, Horowitz angle, integrator step length and seed shared by
 * the samplers.  Construction rejects angle outside (0, pi/2] and
 * non-positive duration or step.
 */
class SamplerConfig {
 public:
  SamplerConfig(double mean_duration, double horowitz_angle, double step_length,
                std::uint64_t seed = 0);

  double mean_duration() const noexcept { return mean_duration_; }
  double horowitz_angle() const noexcept { return horowitz_angle_; }
  double step_length() const noexcept { return step_length_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  double mean_duration_;
  double horowitz_angle_;
  double step_length_;
  std::uint64_t seed_;
};

/// Throws ContractViolation unless angle is in (0, pi/2].
void check_horowitz_angle(double angle);

double potential(const TargetModel& target, const Vector& q);
Vector gradient(const TargetModel& target, const Vector& q);
double hamiltonian(const TargetModel& target, const PhaseState& z);

}  // namespace rhmc

#endif  // RHMC_MODEL_HPP
