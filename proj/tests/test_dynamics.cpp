#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rhmc/dynamics.hpp"

using namespace rhmc;

namespace {

constexpr double kPi = std::numbers::pi;

PhaseState state1(double q, double p) { return PhaseState(Vector{{q}}, Vector{{p}}); }

double max_abs_diff(const PhaseState& a, const PhaseState& b) {
  return std::max((a.position() - b.position()).lpNorm<Eigen::Infinity>(),
                  (a.momentum() - b.momentum()).lpNorm<Eigen::Infinity>());
}

PhaseState random_state(std::mt19937_64& engine, Index dim, double scale = 2.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector q(dim), p(dim);
  for (Index i = 0; i < dim; ++i) {
    q(i) = normal(engine);
    p(i) = normal(engine);
  }
  return PhaseState(q, p);
}

double gaussian_energy(const Vector& sigmas, const PhaseState& z) {
  return 0.5 * (z.position().array() / sigmas.array()).square().sum() +
         0.5 * z.momentum().squaredNorm();
}

/// Counts gradient evaluations of the wrapped target.
class CountingTarget final : public TargetModel {
 public:
  explicit CountingTarget(const TargetModel& inner) : inner_(&inner) {}
  Index dim() const noexcept override { return inner_->dim(); }
  std::string_view name() const noexcept override { return "CountingTarget"; }
  mutable std::size_t gradient_calls = 0;

 protected:
  double eval_potential(const Vector& q) const override { return inner_->potential(q); }
  void eval_gradient(const Vector& q, Vector& out) const override {
    ++gradient_calls;
    inner_->gradient_into(q, out);
  }

 private:
  const TargetModel* inner_;
};

}  // namespace

TEST_CASE("exact flow examples") {
  const Vector one = Vector::Ones(1);
  CHECK(max_abs_diff(exact_gaussian_flow(one, state1(1, 0), 2 * kPi), state1(1, 0)) < 1e-14);
  CHECK(max_abs_diff(exact_gaussian_flow(one, state1(1, 0), kPi / 2), state1(0, -1)) < 1e-15);
  CHECK(max_abs_diff(exact_gaussian_flow(Vector{{2.0}}, state1(1, 1), kPi), state1(2, -0.5)) <
        1e-15);
  const PhaseState z = state1(0.3, -1.7);
  CHECK(exact_gaussian_flow(one, z, 0.0) == z);
  CHECK_THROWS_AS(exact_gaussian_flow(one, z, -1.0), ContractViolation);
  CHECK_THROWS_AS(exact_gaussian_flow(Vector::Ones(2), z, 1.0), ContractViolation);
}

TEST_CASE("exact flow conserves energy and composes") {
  std::mt19937_64 engine(21);
  std::uniform_real_distribution<double> time(0.0, 20.0);
  const Vector sigmas{{0.1, 1.0, 3.0}};
  const ExactGaussianFlow flow(sigmas);
  for (int trial = 0; trial < 1000; ++trial) {
    const PhaseState z = random_state(engine, 3);
    const double s = time(engine);
    const double t = time(engine);
    const double h0 = gaussian_energy(sigmas, z);
    CHECK(std::abs(gaussian_energy(sigmas, flow.apply(z, t)) - h0) <= 1e-12 * h0);
    const PhaseState once = flow.apply(z, s + t);
    const PhaseState twice = flow.apply(flow.apply(z, s), t);
    CHECK(max_abs_diff(once, twice) <= 1e-12 * std::max(1.0, std::sqrt(2 * h0) * 3.0));
  }
}

TEST_CASE("verlet step examples") {
  const DiagonalGaussianTarget gauss(Vector::Ones(1));
  const PhaseState next = verlet_step(gauss, state1(1, 0), 0.1);
  CHECK(next.position()(0) == doctest::Approx(0.995).epsilon(1e-15));
  CHECK(next.momentum()(0) == doctest::Approx(-0.09975).epsilon(1e-14));

  const DoubleWell2D well;
  const PhaseState minimum(Vector{{2.0, 1.0}}, Vector::Zero(2));
  CHECK(verlet_step(well, minimum, 0.05) == minimum);
  const PhaseState origin(Vector::Zero(2), Vector::Zero(2));
  CHECK(verlet_step(well, origin, 0.3) == origin);
  CHECK_THROWS_AS(verlet_step(gauss, state1(1, 0), 0.0), ContractViolation);
}

TEST_CASE("verlet flow against the exact rotation") {
  const DiagonalGaussianTarget gauss(Vector::Ones(1));
  CHECK(verlet_flow(gauss, state1(0.4, 0.2), 0.0, 1e-3) == state1(0.4, 0.2));
  CHECK(max_abs_diff(verlet_flow(gauss, state1(1, 0), 2 * kPi, 1e-3), state1(1, 0)) < 1e-5);
  CHECK(max_abs_diff(verlet_flow(gauss, state1(1, 0), kPi / 2, 1e-3), state1(0, -1)) < 1e-5);
}

TEST_CASE("verlet flow hits the requested duration exactly") {
  CHECK(verlet_step_count(1.0, 0.1) == 10);
  CHECK(verlet_step_count(1.05, 0.1) == 11);
  CHECK(verlet_step_count(0.01, 0.1) == 1);
  CHECK(verlet_step_count(0.0, 0.1) == 0);

  // A short final step of length 0.05 after ten full steps.
  const DiagonalGaussianTarget gauss(Vector::Ones(1));
  PhaseState manual = state1(1, 0.5);
  for (int i = 0; i < 10; ++i) manual = verlet_step(gauss, manual, 0.1);
  manual = verlet_step(gauss, manual, 1.05 - 1.0);
  CHECK(max_abs_diff(verlet_flow(gauss, state1(1, 0.5), 1.05, 0.1), manual) < 1e-14);
}

TEST_CASE("verlet global error is second order") {
  const DiagonalGaussianTarget gauss(Vector{{0.7, 1.3}});
  const Vector sigmas{{0.7, 1.3}};
  const PhaseState z(Vector{{0.5, -1.0}}, Vector{{1.0, 0.25}});
  const PhaseState exact = exact_gaussian_flow(sigmas, z, 1.0);
  double previous = 0.0;
  for (double dt : {0.02, 0.01, 0.005, 0.0025}) {
    const double err = max_abs_diff(verlet_flow(gauss, z, 1.0, dt), exact);
    if (previous > 0.0) CHECK(previous / err == doctest::Approx(4.0).epsilon(0.2));
    previous = err;
  }
}

TEST_CASE("momentum flip") {
  const PhaseState z(Vector{{1.0, 2.0}}, Vector{{3.0, -4.0}});
  CHECK(momentum_flip(z) == PhaseState(Vector{{1.0, 2.0}}, Vector{{-3.0, 4.0}}));
  CHECK(momentum_flip(momentum_flip(z)) == z);
  const PhaseState zero = state1(0, 0);
  CHECK(momentum_flip(zero) == zero);
  PhaseState w = z;
  flip_momentum_in_place(w);
  CHECK(w == momentum_flip(z));
}

TEST_CASE("verlet is reversible and volume preserving") {
  std::mt19937_64 engine(9);
  const DiagonalGaussianTarget gauss(Vector{{0.5, 1.0, 2.0}});
  const DoubleWell2D well;
  for (int trial = 0; trial < 100; ++trial) {
    const PhaseState zg = random_state(engine, 3);
    const PhaseState zw = random_state(engine, 2, 1.0);
    CHECK(reversibility_defect(gauss, zg, 0.1) <= 1e-12);
    CHECK(reversibility_defect(well, zw, 0.01) <= 1e-10);
    CHECK(jacobian_determinant(gauss, zg, 0.1) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(jacobian_determinant(well, zw, 0.01) == doctest::Approx(1.0).epsilon(1e-6));
  }
  const PhaseState z(Vector{{0.5, 0.3}}, Vector{{0.1, -0.2}});
  CHECK(jacobian_determinant(well, z, 0.05) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("jacobian of a tiny step is the identity") {
  const DoubleWell2D well;
  const PhaseState z(Vector{{0.5, 0.3}}, Vector{{0.1, -0.2}});
  CHECK(jacobian_determinant(well, z, 1e-9) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("exact flow is reversible") {
  std::mt19937_64 engine(17);
  const ExactGaussianFlow flow(Vector{{0.3, 1.0}});
  for (int trial = 0; trial < 100; ++trial) {
    CHECK(reversibility_defect(flow, random_state(engine, 2), 3.7) <= 1e-10);
  }
}

TEST_CASE("a non-reversible map is detected") {
  const StepMap drift = [](const PhaseState& z) {
    PhaseState out = z;
    out.position().array() += 0.1;
    return out;
  };
  CHECK(reversibility_defect(drift, state1(0, 0)) == doctest::Approx(0.2));
  const StepMap doubling = [](const PhaseState& z) {
    return PhaseState(2.0 * z.position(), z.momentum());
  };
  CHECK(jacobian_determinant(doubling, state1(1, 1)) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("one gradient evaluation per step") {
  const DoubleWell2D well;
  const CountingTarget counted(well);
  VerletStepper stepper(counted);
  PhaseState z(Vector{{0.5, 0.3}}, Vector{{0.1, -0.2}});
  stepper.step(z, 0.01);
  CHECK(counted.gradient_calls == 2);
  for (int i = 0; i < 100; ++i) stepper.step(z, 0.01);
  CHECK(counted.gradient_calls == 102);
  CHECK(stepper.gradient_evaluations() == 102);

  // A momentum change keeps the position, so the cached gradient is reused.
  z.momentum() *= -1.0;
  stepper.step(z, 0.01);
  CHECK(counted.gradient_calls == 103);

  // A rejected proposal leaves the start gradient cached as well.
  PhaseState proposal = z;
  stepper.propose(z, 0.01, proposal);
  CHECK(counted.gradient_calls == 104);
  z.momentum() *= -1.0;
  stepper.propose(z, 0.01, proposal);
  CHECK(counted.gradient_calls == 105);

  const PhaseState expected = verlet_step(well, z, 0.01);
  CHECK(max_abs_diff(proposal, expected) < 1e-15);
}

TEST_CASE("verlet flow reports blow-up") {
  const DoubleWell2D well;
  const PhaseState far(Vector{{0.0, 1e6}}, Vector::Zero(2));
  CHECK_THROWS_AS(verlet_flow(well, far, 10.0, 0.5), NonFiniteState);
}
