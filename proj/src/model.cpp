#include "rhmc/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rhmc {

PhaseState::PhaseState(Vector position, Vector momentum)
    : position_(std::move(position)), momentum_(std::move(momentum)) {
  if (position_.size() < 1 || position_.size() != momentum_.size()) {
    throw ContractViolation("PhaseState: position and momentum must share a length >= 1 (got " +
                            std::to_string(position_.size()) + " and " +
                            std::to_string(momentum_.size()) + ")");
  }
  if (!is_finite()) {
    throw ContractViolation("PhaseState: entries must be finite");
  }
}

PhaseState PhaseState::at_rest(Vector position) {
  Vector momentum = Vector::Zero(position.size());
  return PhaseState(std::move(position), std::move(momentum));
}

void TargetModel::throw_dim_mismatch(Index got) const {
  throw ContractViolation(std::string(name()) + ": expected a vector of length " +
                          std::to_string(dim()) + ", got " + std::to_string(got));
}

DiagonalGaussianTarget::DiagonalGaussianTarget(Vector sigmas) : sigmas_(std::move(sigmas)) {
  if (sigmas_.size() < 1) {
    throw ContractViolation("DiagonalGaussianTarget: need at least one component");
  }
  for (Index i = 0; i < sigmas_.size(); ++i) {
    if (!(sigmas_[i] > 0.0) || !std::isfinite(sigmas_[i])) {
      throw ContractViolation("DiagonalGaussianTarget: sigmas must be finite and > 0");
    }
  }
  inv_var_ = sigmas_.array().square().inverse().matrix();
}

double DiagonalGaussianTarget::eval_potential(const Vector& q) const {
  return 0.5 * (q.array().square() * inv_var_.array()).sum();
}

void DiagonalGaussianTarget::eval_gradient(const Vector& q, Vector& out) const {
  out.array() = q.array() * inv_var_.array();
}

double DoubleWell2D::eval_potential(const Vector& q) const {
  const double x1 = q[0];
  const double x2 = q[1];
  const double well = x2 * x2 - 1.0;
  const double tilt = x2 - 0.5 * x1;
  return 5.0 * well * well + 1.25 * tilt * tilt;
}

void DoubleWell2D::eval_gradient(const Vector& q, Vector& out) const {
  const double x1 = q[0];
  const double x2 = q[1];
  const double tilt = x2 - 0.5 * x1;
  out[0] = -1.25 * tilt;
  out[1] = 20.0 * x2 * (x2 * x2 - 1.0) + 2.5 * tilt;
}

void check_horowitz_angle(double angle) {
  // A few ulps of slack so that a computed pi/2 is accepted.
  constexpr double kMax = std::numbers::pi / 2.0 * (1.0 + 4e-16);
  if (!(angle > 0.0) || !(angle <= kMax)) {
    throw ContractViolation("horowitz angle must lie in (0, pi/2], got " + std::to_string(angle));
  }
}

SamplerConfig::SamplerConfig(double mean_duration, double horowitz_angle, double step_length,
                             std::uint64_t seed)
    : mean_duration_(mean_duration),
      horowitz_angle_(horowitz_angle),
      step_length_(step_length),
      seed_(seed) {
  if (!(mean_duration > 0.0) || !std::isfinite(mean_duration)) {
    throw ContractViolation("mean duration must be finite and > 0");
  }
  if (!(step_length > 0.0) || !std::isfinite(step_length)) {
    throw ContractViolation("step length must be finite and > 0");
  }
  check_horowitz_angle(horowitz_angle);
}

double potential(const TargetModel& target, const Vector& q) { return target.potential(q); }

Vector gradient(const TargetModel& target, const Vector& q) { return target.gradient(q); }

double hamiltonian(const TargetModel& target, const PhaseState& z) {
  return 0.5 * z.momentum().squaredNorm() + target.potential(z.position());
}

}  // namespace rhmc
