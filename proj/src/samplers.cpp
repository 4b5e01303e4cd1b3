#include "rhmc/samplers.hpp"

#include <cmath>
#include <string>

namespace rhmc {

namespace {

void require_dim(const TargetModel& target, Index got, const char* where) {
  if (got != target.dim()) {
    throw ContractViolation(std::string(where) + ": initial state has dimension " +
                            std::to_string(got) + ", target has " +
                            std::to_string(target.dim()));
  }
}

[[noreturn]] void abort_chain(const char* where, std::size_t recorded) {
  throw NonFiniteState(std::string(where) + ": non-finite state after output index " +
                           std::to_string(static_cast<long long>(recorded) - 1),
                       static_cast<long long>(recorded) - 1);
}

void refresh_in_place(PhaseState& z, double c, double s, Vector& xi, RandomSource& rng) {
  rng.fill_standard_normal(xi);
  z.momentum() = c * z.momentum() + s * xi;
}

JumpPath start_path(const PhaseState& z0, std::size_t n_events) {
  JumpPath path;
  const Index cols = static_cast<Index>(n_events) + 1;
  path.positions.resize(z0.dim(), cols);
  path.momenta.resize(z0.dim(), cols);
  path.times.reserve(cols);
  path.kinds.reserve(n_events);
  path.positions.col(0) = z0.position();
  path.momenta.col(0) = z0.momentum();
  path.times.push_back(0.0);
  return path;
}

void record_jump(JumpPath& path, const PhaseState& z, double t, JumpKind kind) {
  const Index i = static_cast<Index>(path.times.size());
  path.positions.col(i) = z.position();
  path.momenta.col(i) = z.momentum();
  path.times.push_back(t);
  path.kinds.push_back(kind);
}

struct JumpRates {
  double mean_holding;
  double refresh_probability;
};

JumpRates jump_rates(const SamplerConfig& cfg) {
  const double h = cfg.step_length();
  const double lambda = cfg.mean_duration();
  return {h * lambda / (h + lambda), h / (h + lambda)};
}

}  // namespace

PhaseState momentum_randomize_with(const PhaseState& z, double angle, const Vector& xi) {
  check_horowitz_angle(angle);
  if (xi.size() != z.dim()) {
    throw ContractViolation("momentum_randomize: noise vector has the wrong dimension");
  }
  return PhaseState(z.position(), std::cos(angle) * z.momentum() + std::sin(angle) * xi);
}

PhaseState momentum_randomize(const PhaseState& z, double angle, RandomSource& rng) {
  check_horowitz_angle(angle);
  return momentum_randomize_with(z, angle, rng.standard_normal(z.dim()));
}

double draw_duration(double lambda, RandomSource& rng) {
  if (!(lambda > 0.0)) throw ContractViolation("draw_duration: lambda must be > 0");
  return exponential_from_uniform(lambda, rng.uniform());
}

ChainOutput hmc_chain(const TargetModel& target, const FlowMap& flow, double duration,
                      std::size_t n_steps, const Vector& x0, RandomSource& rng) {
  require_dim(target, x0.size(), "hmc_chain");
  if (!(duration > 0.0)) throw ContractViolation("hmc_chain: duration must be > 0");
  ChainOutput out;
  out.positions.resize(x0.size(), static_cast<Index>(n_steps));
  out.momenta.resize(x0.size(), static_cast<Index>(n_steps));
  PhaseState z = PhaseState::at_rest(x0);
  for (std::size_t n = 0; n < n_steps; ++n) {
    rng.fill_standard_normal(z.momentum());
    try {
      flow.advance(z, duration);
    } catch (const NonFiniteState&) {
      abort_chain("hmc_chain", n);
    }
    if (!z.is_finite()) abort_chain("hmc_chain", n);
    out.positions.col(static_cast<Index>(n)) = z.position();
    out.momenta.col(static_cast<Index>(n)) = z.momentum();
  }
  return out;
}

ChainOutput hmc_metropolis_chain(const TargetModel& target, double duration, double dt,
                                 std::size_t n_steps, const Vector& x0, RandomSource& rng) {
  require_dim(target, x0.size(), "hmc_metropolis_chain");
  if (!(duration > 0.0)) throw ContractViolation("hmc_metropolis_chain: duration must be > 0");
  const VerletFlow flow(target, dt);
  ChainOutput out;
  out.positions.resize(x0.size(), static_cast<Index>(n_steps));
  out.momenta.resize(x0.size(), static_cast<Index>(n_steps));
  Vector q = x0;
  PhaseState proposal = PhaseState::at_rest(x0);
  for (std::size_t n = 0; n < n_steps; ++n) {
    proposal.position() = q;
    rng.fill_standard_normal(proposal.momentum());
    const double h0 = hamiltonian(target, proposal);
    try {
      flow.advance(proposal, duration);
    } catch (const NonFiniteState&) {
      abort_chain("hmc_metropolis_chain", n);
    }
    const double h1 = hamiltonian(target, proposal);
    if (!std::isfinite(h1)) abort_chain("hmc_metropolis_chain", n);
    const double u = rng.uniform();
    if (std::log(u) <= h0 - h1) {
      q = proposal.position();
      ++out.acceptance_count;
    }
    out.positions.col(static_cast<Index>(n)) = q;
    out.momenta.col(static_cast<Index>(n)) = proposal.momentum();
  }
  return out;
}

ChainOutput rhmc_chain(const TargetModel& target, const FlowMap& flow, const SamplerConfig& cfg,
                       std::size_t n_events, const PhaseState& z0, RandomSource& rng) {
  require_dim(target, z0.dim(), "rhmc_chain");
  const double c = std::cos(cfg.horowitz_angle());
  const double s = std::sin(cfg.horowitz_angle());
  ChainOutput out;
  out.positions.resize(z0.dim(), static_cast<Index>(n_events));
  out.momenta.resize(z0.dim(), static_cast<Index>(n_events));
  out.jump_times.reserve(n_events);
  PhaseState z = z0;
  Vector xi(z0.dim());
  double t = 0.0;
  for (std::size_t n = 0; n < n_events; ++n) {
    const double dt = draw_duration(cfg.mean_duration(), rng);
    try {
      flow.advance(z, dt);
    } catch (const NonFiniteState&) {
      abort_chain("rhmc_chain", n);
    }
    refresh_in_place(z, c, s, xi, rng);
    if (!z.is_finite()) abort_chain("rhmc_chain", n);
    t += dt;
    out.positions.col(static_cast<Index>(n)) = z.position();
    out.momenta.col(static_cast<Index>(n)) = z.momentum();
    out.jump_times.push_back(t);
  }
  return out;
}

JumpPath variant1_chain(const TargetModel& target, const SamplerConfig& cfg,
                        std::size_t n_events, const PhaseState& z0, RandomSource& rng) {
  require_dim(target, z0.dim(), "variant1_chain");
  const auto [mean_holding, refresh_probability] = jump_rates(cfg);
  const double c = std::cos(cfg.horowitz_angle());
  const double s = std::sin(cfg.horowitz_angle());
  const double h = cfg.step_length();
  JumpPath path = start_path(z0, n_events);
  VerletStepper stepper(target);
  PhaseState z = z0;
  Vector xi(z0.dim());
  double t = 0.0;
  for (std::size_t n = 0; n < n_events; ++n) {
    t += exponential_from_uniform(mean_holding, rng.uniform());
    JumpKind kind;
    if (rng.uniform() <= refresh_probability) {
      refresh_in_place(z, c, s, xi, rng);
      kind = JumpKind::kRandomize;
    } else {
      try {
        stepper.step(z, h);
      } catch (const NonFiniteState&) {
        abort_chain("variant1_chain", n);
      }
      kind = JumpKind::kIntegrate;
    }
    if (!z.is_finite()) abort_chain("variant1_chain", n);
    record_jump(path, z, t, kind);
  }
  return path;
}

JumpPath variant2_chain(const TargetModel& target, const SamplerConfig& cfg,
                        std::size_t n_events, const PhaseState& z0, RandomSource& rng) {
  require_dim(target, z0.dim(), "variant2_chain");
  const auto [mean_holding, refresh_probability] = jump_rates(cfg);
  const double c = std::cos(cfg.horowitz_angle());
  const double s = std::sin(cfg.horowitz_angle());
  const double h = cfg.step_length();
  const double lambda = cfg.mean_duration();
  JumpPath path = start_path(z0, n_events);
  VerletStepper stepper(target);
  PhaseState z = z0;
  PhaseState proposal = z0;
  Vector xi(z0.dim());
  double t = 0.0;
  for (std::size_t n = 0; n < n_events; ++n) {
    t += exponential_from_uniform(mean_holding, rng.uniform());
    const double u = rng.uniform();
    JumpKind kind;
    if (u <= refresh_probability) {
      refresh_in_place(z, c, s, xi, rng);
      kind = JumpKind::kRandomize;
    } else {
      try {
        stepper.propose(z, h, proposal);
      } catch (const NonFiniteState&) {
        abort_chain("variant2_chain", n);
      }
      const double delta = hamiltonian(target, z) - hamiltonian(target, proposal);
      const double alpha = delta >= 0.0 ? 1.0 : std::exp(delta);
      if (u <= (h + alpha * lambda) / (h + lambda)) {
        std::swap(z, proposal);
        kind = JumpKind::kIntegrate;
      } else {
        flip_momentum_in_place(z);
        kind = JumpKind::kFlip;
      }
    }
    if (!z.is_finite()) abort_chain("variant2_chain", n);
    record_jump(path, z, t, kind);
  }
  return path;
}

double verlet_acceptance(const TargetModel& target, const PhaseState& z, double h) {
  const PhaseState next = verlet_step(target, z, h);
  const double delta = hamiltonian(target, z) - hamiltonian(target, next);
  return delta >= 0.0 ? 1.0 : std::exp(delta);
}

namespace {

template <typename Value>
double weighted_time_average(const JumpPath& path, double horizon, Value&& value) {
  if (!(horizon > 0.0)) throw ContractViolation("time_average: horizon must be > 0");
  if (path.times.empty() || horizon > path.final_time()) {
    throw ContractViolation("time_average: horizon lies beyond the path's final jump time");
  }
  double total = 0.0;
  const std::size_t n = path.times.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double start = path.times[i];
    if (start >= horizon) break;
    const double end = std::min(horizon, path.times[i + 1]);
    total += value(static_cast<Index>(i)) * (end - start);
  }
  return total / horizon;
}

}  // namespace

double time_average(const JumpPath& path, const Observable& f, double horizon) {
  return weighted_time_average(path, horizon, [&](Index i) { return f(path.state(i)); });
}

double time_average_position(const JumpPath& path,
                             const std::function<double(const Eigen::Ref<const Vector>&)>& f,
                             double horizon) {
  return weighted_time_average(path, horizon, [&](Index i) { return f(path.positions.col(i)); });
}

}  // namespace rhmc
