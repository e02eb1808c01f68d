#include <doctest.h>

#include "nvghz/engine.hpp"
#include "nvghz/protocol.hpp"
#include "oracles.hpp"

using namespace nvghz;

namespace {

SimParams unit(int n, int n_max) {
  SimParams p;
  p.n_qubits = n;
  p.eta = 1.0;
  p.delta = 2.0;
  p.n_max = n_max;
  return p;
}

}  // namespace

TEST_CASE("constant Hamiltonian propagates to the matrix exponential") {
  SimParams p = unit(2, 3);
  p.Omega = 1.7;
  p.eta = 0.0;  // drive only
  const HamiltonianRecipe h = build_driven_hamiltonian(p, 0.0);
  PropagationSettings s = PropagationSettings::defaults_for(p);
  const TrajectoryResult r = propagate(h, InitialCondition::identity(p.layout()), 0.0, 2.5, s);
  const oracle::M expected = oracle::expm_i(oracle::kron(oracle::jx(2), oracle::eye(4)) * 1.7, 2.5);
  CHECK(max_abs(r.final_columns() - expected) < 1e-8);
  CHECK(r.has_propagator);
  CHECK_FALSE(r.failed);
}

TEST_CASE("time-dependent propagation agrees with a fine fixed-step integrator") {
  SimParams p = unit(2, 4);
  p.Omega = 5.0;
  const HamiltonianRecipe h = build_driven_hamiltonian(p, 0.3);
  const TrajectoryResult r =
      propagate(h, InitialCondition::identity(p.layout()), 0.0, 1.4, PropagationSettings::defaults_for(p));
  const oracle::M ref = oracle::rk4_propagator(
      [&](double t) { return oracle::driven_h(2, 4, 1.0, 2.0, 5.0, 0.3, t); }, p.layout().dim(), 1.4, 20000);
  CHECK(max_abs(r.final_columns() - ref) < 1e-8);
  CHECK(r.max_norm_defect() < 1e-8);
}

TEST_CASE("record times are hit exactly and t1 is always recorded") {
  const SimParams p = unit(1, 3);
  const HamiltonianRecipe h = build_effective_hamiltonian(p, 0.0);
  const StateVector psi = StateVector::basis(p.layout(), 0, 0);
  const TrajectoryResult r =
      propagate(h, InitialCondition::state(psi), 0.0, 2.0, PropagationSettings::defaults_for(p), {0.0, 0.5, 1.25});
  REQUIRE(r.times.size() == 4);
  CHECK(r.times[0] == 0.0);
  CHECK(r.times[1] == 0.5);
  CHECK(r.times[2] == 1.25);
  CHECK(r.times[3] == 2.0);
  CHECK_THROWS_AS(propagate(h, InitialCondition::state(psi), 0.0, 1.0, PropagationSettings{}, {2.0}),
                  PropagationError);
  CHECK_THROWS_AS(propagate(h, InitialCondition::state(psi), 1.0, 1.0, PropagationSettings{}), PropagationError);
}

TEST_CASE("zero coupling leaves every Fock state unchanged") {
  SimParams p = unit(2, 5);
  p.eta = 0.0;
  const HamiltonianRecipe h = build_effective_hamiltonian(p, 0.0);
  for (int n = 0; n <= 5; ++n) {
    const StateVector psi = StateVector::basis(p.layout(), 1, n);
    const TrajectoryResult r = propagate(h, InitialCondition::state(psi), 0.0, 3.0, PropagationSettings{});
    CHECK(max_abs(r.final_columns() - psi.amplitudes()) == 0.0);
  }
}

TEST_CASE("step underflow names the largest eigenfrequency") {
  SimParams p = unit(1, 2);
  p.Omega = 1e6;
  const HamiltonianRecipe h = build_driven_hamiltonian(p, 0.0);
  PropagationSettings s;
  s.max_step = 1e-3;
  s.min_step = 1e-4;
  try {
    propagate(h, InitialCondition::identity(p.layout()), 0.0, 1.0, s);
    FAIL("expected PropagationError");
  } catch (const PropagationError& e) {
    CHECK(std::string(e.what()).find("eigenfrequency") != std::string::npos);
  }
}

TEST_CASE("density initial condition reproduces rho") {
  const SimParams p = unit(1, 14);
  const DensityMatrix rho = DensityMatrix::thermal_cavity(p.layout(), 0, 0.3);
  const InitialCondition ic = InitialCondition::density(rho);
  CHECK(max_abs(ic.columns() * ic.columns().adjoint() - rho.matrix()) < 1e-12);
}

TEST_CASE("analytic propagator matches the padded fixed-step oracle") {
  const int n = 2, keep_max = 4, pad = 20;
  const double t = 1.9;
  const HilbertLayout small = HilbertLayout::qubits(n, keep_max);
  // effective_h(t) = e^{-i delta t} X + h.c. with X = eta a J_x; build X once
  const oracle::M x = oracle::effective_h(n, pad, 0.5, 2.0, 0.0, 0.0) -
                      oracle::effective_h(n, pad, 0.5, 2.0, oracle::PI / 2.0, 0.0) * oracle::I;
  CHECK(max_abs(oracle::effective_h(n, pad, 1.0, 2.0, 0.0, 0.4) -
                (std::exp(-oracle::I * 0.8) * x + std::exp(oracle::I * 0.8) * x.adjoint())) < 1e-13);
  const oracle::M ref = oracle::rk4_propagator(
      [&](double s) -> oracle::M {
        const oracle::C e = std::exp(-oracle::I * (2.0 * s));
        return e * x + std::conj(e) * x.adjoint();
      },
      4 * (pad + 1), t, 3000);
  oracle::M cropped(small.dim(), small.dim());
  for (int r = 0; r < small.dim(); ++r) {
    for (int c = 0; c < small.dim(); ++c) {
      cropped(r, c) = ref(small.spin_of(r) * (pad + 1) + small.fock_of(r), small.spin_of(c) * (pad + 1) + small.fock_of(c));
    }
  }
  const Matrix analytic = analytic_propagator(small, 1.0, 2.0, t).matrix();
  CHECK(oracle::phase_distance(analytic, cropped) < 1e-9);
}

TEST_CASE("coefficients of the closed-form propagator") {
  const double eta = 0.8, delta = 1.6;
  const double t = kTwoPi / delta;
  CHECK(std::abs(analytic_B(t, eta, delta)) < 1e-15);
  CHECK(analytic_A(t, eta, delta).real() == doctest::Approx(-eta * eta * t / delta));
  CHECK(std::abs(analytic_A(t, eta, delta).imag()) < 1e-14);
  CHECK_THROWS_AS(analytic_A(1.0, eta, 0.0), PhysicsError);
}

TEST_CASE("reduced qubit propagator exists only at closure") {
  const HilbertLayout layout = HilbertLayout::qubits(2, 6);
  const std::vector<double> tk = closure_times(2.0, 2);
  CHECK(tk[0] == doctest::Approx(kPi));
  CHECK(tk[1] == doctest::Approx(2.0 * kPi));
  const OperatorMatrix at_closure = analytic_propagator(layout, 1.0, 2.0, tk[0]);
  const Matrix q0 = reduced_qubit_propagator(at_closure, 0);
  const Matrix q3 = reduced_qubit_propagator(at_closure, 3);
  CHECK(max_abs(q0 - q3) < 1e-12);
  const oracle::M j = oracle::jx(2);
  CHECK(max_abs(q0 - oracle::expm_i(j * j, -kPi / 2.0)) < 1e-12);  // exp(i eta^2 T/delta J_x^2)
  CHECK_THROWS_AS(reduced_qubit_propagator(analytic_propagator(layout, 1.0, 2.0, 1.0), 0), PhysicsError);
}

TEST_CASE("settings validation") {
  PropagationSettings s;
  s.rel_tol = 0.0;
  CHECK_THROWS_AS(s.validate(), PropagationError);
  SimParams p = unit(1, 2);
  p.Omega = 12.0;
  CHECK(PropagationSettings::defaults_for(p).max_step == doctest::Approx(kTwoPi / 12.0 / 40.0));
}

TEST_CASE("halving max_step moves the final state by less than rel_tol") {
  SimParams p = unit(2, 6);
  p.Omega = 12.0;
  const HamiltonianRecipe h = build_driven_hamiltonian(p, 0.0);
  const PropagationSettings coarse = PropagationSettings::defaults_for(p);
  PropagationSettings fine = coarse;
  fine.max_step *= 0.5;
  const StateVector psi = StateVector::basis(p.layout(), 0, 0);
  const Matrix a = propagate(h, InitialCondition::state(psi), 0.0, 3.0, coarse).final_columns();
  const Matrix b = propagate(h, InitialCondition::state(psi), 0.0, 3.0, fine).final_columns();
  CHECK(max_abs(a - b) < coarse.rel_tol);
}
