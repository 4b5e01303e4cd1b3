#include "rhmc/dynamics.hpp"

#include <cmath>
#include <string>

namespace rhmc {

namespace {

void require_same_dim(Index expected, const PhaseState& z, const char* where) {
  if (z.dim() != expected) {
    throw ContractViolation(std::string(where) + ": state has dimension " +
                            std::to_string(z.dim()) + ", expected " + std::to_string(expected));
  }
}

void require_finite(const PhaseState& z, const char* where) {
  if (!z.is_finite()) {
    throw NonFiniteState(std::string(where) + ": integrator produced a non-finite state", -1);
  }
}

}  // namespace

ExactGaussianFlow::ExactGaussianFlow(Vector sigmas) : sigmas_(std::move(sigmas)) {
  if (sigmas_.size() < 1 || !(sigmas_.array() > 0.0).all() || !sigmas_.allFinite()) {
    throw ContractViolation("ExactGaussianFlow: sigmas must be finite and > 0");
  }
}

void ExactGaussianFlow::advance(PhaseState& z, double t) const {
  require_same_dim(sigmas_.size(), z, "exact_gaussian_flow");
  if (!(t >= 0.0)) throw ContractViolation("exact_gaussian_flow: duration must be >= 0");
  if (t == 0.0) return;
  Vector& q = z.position();
  Vector& p = z.momentum();
  for (Index i = 0; i < q.size(); ++i) {
    const double sigma = sigmas_[i];
    const double angle = t / sigma;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double qi = q[i];
    const double pi = p[i];
    q[i] = c * qi + sigma * s * pi;
    p[i] = -(s / sigma) * qi + c * pi;
  }
}

VerletStepper::VerletStepper(const TargetModel& target) : target_(&target) {
  for (auto& slot : slots_) {
    slot.q.resize(target.dim());
    slot.grad.resize(target.dim());
  }
}

const Vector& VerletStepper::gradient_at(const Vector& q) {
  for (auto& slot : slots_) {
    if (slot.valid && slot.q == q) return slot.grad;
  }
  Slot& slot = fresh_slot(q);
  slot.q = q;
  target_->gradient_into(slot.q, slot.grad);
  ++evaluations_;
  slot.valid = true;
  return slot.grad;
}

VerletStepper::Slot& VerletStepper::fresh_slot(const Vector& keep_q) {
  // Evict whichever slot does not hold keep_q.
  if (slots_[0].valid && slots_[0].q == keep_q) return slots_[1];
  return slots_[0];
}

void VerletStepper::step(PhaseState& z, double dt) {
  const Vector& g0 = gradient_at(z.position());
  Slot& next = fresh_slot(z.position());
  Vector& q = z.position();
  Vector& p = z.momentum();
  q.noalias() += dt * p - (0.5 * dt * dt) * g0;
  next.q = q;
  target_->gradient_into(next.q, next.grad);
  ++evaluations_;
  next.valid = true;
  p.noalias() -= (0.5 * dt) * (g0 + next.grad);
  if (!next.grad.allFinite()) {
    throw NonFiniteState("verlet step: non-finite gradient", -1);
  }
}

void VerletStepper::propose(const PhaseState& z, double dt, PhaseState& out) {
  require_same_dim(z.dim(), out, "verlet propose");
  const Vector& g0 = gradient_at(z.position());
  Slot& next = fresh_slot(z.position());
  out.position().noalias() = z.position() + dt * z.momentum() - (0.5 * dt * dt) * g0;
  next.q = out.position();
  target_->gradient_into(next.q, next.grad);
  ++evaluations_;
  next.valid = true;
  out.momentum().noalias() = z.momentum() - (0.5 * dt) * (g0 + next.grad);
  if (!next.grad.allFinite()) {
    throw NonFiniteState("verlet step: non-finite gradient", -1);
  }
}

VerletFlow::VerletFlow(const TargetModel& target, double dt) : target_(&target), dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ContractViolation("VerletFlow: step must be finite and > 0");
  }
}

long verlet_step_count(double t, double dt) {
  if (t <= 0.0) return 0;
  // Relative slack keeps t = k*dt (up to rounding) at k steps.
  const double steps = std::ceil(t / dt * (1.0 - 1e-12));
  return std::max(1L, static_cast<long>(steps));
}

void VerletFlow::advance(PhaseState& z, double t) const {
  require_same_dim(target_->dim(), z, "verlet_flow");
  if (!(t >= 0.0)) throw ContractViolation("verlet_flow: duration must be >= 0");
  const long n = verlet_step_count(t, dt_);
  if (n == 0) return;
  VerletStepper stepper(*target_);
  for (long k = 0; k + 1 < n; ++k) stepper.step(z, dt_);
  const double last = t - static_cast<double>(n - 1) * dt_;
  stepper.step(z, last);
  require_finite(z, "verlet_flow");
}

PhaseState exact_gaussian_flow(const Vector& sigmas, const PhaseState& z, double t) {
  return ExactGaussianFlow(sigmas).apply(z, t);
}

PhaseState verlet_step(const TargetModel& target, const PhaseState& z, double dt) {
  require_same_dim(target.dim(), z, "verlet_step");
  if (!(dt > 0.0)) throw ContractViolation("verlet_step: dt must be > 0");
  VerletStepper stepper(target);
  PhaseState out = z;
  stepper.step(out, dt);
  require_finite(out, "verlet_step");
  return out;
}

PhaseState verlet_flow(const TargetModel& target, const PhaseState& z, double t, double dt) {
  return VerletFlow(target, dt).apply(z, t);
}

PhaseState momentum_flip(const PhaseState& z) {
  PhaseState out = z;
  flip_momentum_in_place(out);
  return out;
}

void flip_momentum_in_place(PhaseState& z) noexcept { z.momentum() = -z.momentum(); }

double reversibility_defect(const StepMap& step, const PhaseState& z) {
  PhaseState w = momentum_flip(z);
  w = step(w);
  flip_momentum_in_place(w);
  w = step(w);
  const double dq = (w.position() - z.position()).lpNorm<Eigen::Infinity>();
  const double dp = (w.momentum() - z.momentum()).lpNorm<Eigen::Infinity>();
  return std::max(dq, dp);
}

double reversibility_defect(const TargetModel& target, const PhaseState& z, double dt) {
  return reversibility_defect([&](const PhaseState& w) { return verlet_step(target, w, dt); }, z);
}

double reversibility_defect(const FlowMap& flow, const PhaseState& z, double t) {
  return reversibility_defect([&](const PhaseState& w) { return flow.apply(w, t); }, z);
}

double jacobian_determinant(const StepMap& step, const PhaseState& z, double fd_step) {
  const Index d = z.dim();
  const Index n = 2 * d;
  Matrix jac(n, n);
  auto perturbed = [&](Index k, double delta) {
    PhaseState w = z;
    if (k < d) {
      w.position()[k] += delta;
    } else {
      w.momentum()[k - d] += delta;
    }
    PhaseState out = step(w);
    Vector flat(n);
    flat << out.position(), out.momentum();
    return flat;
  };
  for (Index k = 0; k < n; ++k) {
    jac.col(k) = (perturbed(k, fd_step) - perturbed(k, -fd_step)) / (2.0 * fd_step);
  }
  return jac.partialPivLu().determinant();
}

double jacobian_determinant(const TargetModel& target, const PhaseState& z, double dt) {
  return jacobian_determinant([&](const PhaseState& w) { return verlet_step(target, w, dt); }, z);
}

}  // namespace rhmc
