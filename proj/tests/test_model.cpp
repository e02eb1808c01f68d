#include <doctest.h>

#include <string>

#include "nvghz/model.hpp"
#include "oracles.hpp"

using namespace nvghz;

namespace {

SimParams small_params(int n, int n_max) {
  SimParams p;
  p.n_qubits = n;
  p.eta = 0.7;
  p.delta = 1.9;
  p.Omega = 11.0;
  p.phi = 0.4;
  p.n_max = n_max;
  return p;
}

}  // namespace

TEST_CASE("validate rejects non-physical parameters") {
  SimParams p = small_params(2, 3);
  CHECK_NOTHROW(p.validate());
  p.delta = -1.0;
  try {
    p.validate();
    FAIL("expected PhysicsError");
  } catch (const PhysicsError& e) {
    CHECK(std::string(e.what()).find("delta > 0") != std::string::npos);
  }
  p = small_params(2, 3);
  p.eta = 0.0;
  CHECK_THROWS_AS(p.validate(), PhysicsError);
  p = small_params(2, 3);
  p.Omega = -1.0;
  CHECK_THROWS_AS(p.validate(), PhysicsError);
  p = small_params(2, 3);
  p.eta_per_qubit = {1.0};
  CHECK_THROWS(p.validate());
}

TEST_CASE("driven model matches the brute-force Hamiltonian") {
  const SimParams p = small_params(3, 3);
  const HamiltonianRecipe h = build_driven_hamiltonian(p, p.phi);
  for (double t : {0.0, 0.3, 2.2, 7.1}) {
    CHECK(max_abs(h.at(t) - oracle::driven_h(3, 3, p.eta, p.delta, p.Omega, p.phi, t)) < 1e-14);
    CHECK(h.hermiticity_defect(t) < 1e-15);
  }
}

TEST_CASE("effective model matches the brute-force Hamiltonian") {
  const SimParams p = small_params(2, 4);
  const HamiltonianRecipe h = build_effective_hamiltonian(p, 1.3);
  for (double t : {0.0, 0.9, 4.0}) {
    CHECK(max_abs(h.at(t) - oracle::effective_h(2, 4, p.eta, p.delta, 1.3, t)) < 1e-14);
  }
}

TEST_CASE("rotated frame equals the transformed driven Hamiltonian") {
  // e^{i Omega J_x t} H_driven e^{-i Omega J_x t} - Omega J_x
  const SimParams p = small_params(2, 3);
  const HamiltonianRecipe rot = build_rotated_hamiltonian(p, p.phi);
  const oracle::M jx = oracle::kron(oracle::jx(2), oracle::eye(4));
  for (double t : {0.0, 0.17, 0.9, 3.3}) {
    const oracle::M r = oracle::expm_i(jx, -p.Omega * t);
    const oracle::M expected = r * oracle::driven_h(2, 3, p.eta, p.delta, p.Omega, p.phi, t) * r.adjoint() - p.Omega * jx;
    CHECK(max_abs(rot.at(t) - expected) < 1e-12);
  }
}

TEST_CASE("rotated = effective + neglected, and the neglected terms match the trig form") {
  const SimParams p = small_params(3, 2);
  const HamiltonianRecipe rot = build_rotated_hamiltonian(p, p.phi);
  const HamiltonianRecipe eff = build_effective_hamiltonian(p, p.phi);
  const HamiltonianRecipe neg = build_neglected_terms(p, p.phi);
  for (double t : {0.0, 0.5, 1.7, 6.2}) {
    CHECK(max_abs(rot.at(t) - eff.at(t) - neg.at(t)) < 1e-13);
    CHECK(max_abs(neg.at(t) - oracle::neglected_h(3, 2, p.eta, p.delta, p.Omega, p.phi, t)) < 1e-13);
  }
}

TEST_CASE("zero drive leaves the driven model equal to the Raman model") {
  SimParams p = small_params(2, 2);
  p.Omega = 0.0;
  const HamiltonianRecipe a = build_driven_hamiltonian(p, 0.0);
  const HamiltonianRecipe b = build_raman_hamiltonian(p, 0.0);
  CHECK(max_abs(a.at(1.1) - b.at(1.1)) == 0.0);
}

TEST_CASE("per-qubit couplings") {
  SimParams p = small_params(2, 2);
  p.eta_per_qubit = {0.5, 0.9};
  CHECK_FALSE(p.uniform_eta());
  const HamiltonianRecipe h = build_raman_hamiltonian(p, 0.0);
  const oracle::M a = oracle::on_cavity(oracle::annihilation(2), 2);
  const double t = 0.8;
  const oracle::C env = std::exp(-oracle::I * (p.delta * t));
  oracle::M expected = oracle::M::Zero(12, 12);
  for (int j = 0; j < 2; ++j) {
    const oracle::M term = p.eta_per_qubit[j] * env * a * oracle::on_site(oracle::sp(), j, 2, 3);
    expected += term + term.adjoint();
  }
  CHECK(max_abs(h.at(t) - expected) < 1e-15);
}

TEST_CASE("effective coupling from the three-level parameters") {
  SimParams p = small_params(1, 2);
  const double g = kTwoPi * 1.0, wl = kTwoPi * 0.5, big = kTwoPi * 20.0, small = kTwoPi * 0.1;
  p.lambda = LambdaParams::from_detunings(g, wl, big, small);
  CHECK(p.lambda->Delta(0) == doctest::Approx(big));
  CHECK(p.lambda->delta(0) == doctest::Approx(small));
  const double expected = g * wl * (1.0 / (big + small) + 1.0 / big);
  CHECK(effective_eta(p).front() == doctest::Approx(expected).epsilon(1e-14));
  // far detuned: close to 2 G Omega_L / Delta = 2 pi x 0.05
  CHECK(effective_eta(p).front() / kTwoPi == doctest::Approx(0.05).epsilon(5e-3));
}

TEST_CASE("three-level Hamiltonian in the interaction picture") {
  SimParams p = small_params(1, 2);
  const double g = 1.1, wl = 0.6, big = 9.0, small = 0.8;
  p.lambda = LambdaParams::from_detunings(g, wl, big, small);
  p.phi = 0.25;
  const HamiltonianRecipe h = build_lambda_hamiltonian(p);
  CHECK(h.layout().site_dim() == 3);
  oracle::M e0 = oracle::M::Zero(3, 3), e1 = oracle::M::Zero(3, 3);
  e0(2, 0) = 1.0;
  e1(2, 1) = 1.0;
  const oracle::M a = oracle::kron(oracle::eye(3), oracle::annihilation(2));
  const oracle::M s_e0 = oracle::kron(e0, oracle::eye(3));
  const oracle::M s_e1 = oracle::kron(e1, oracle::eye(3));
  for (double t : {0.0, 0.4, 1.3}) {
    const oracle::M cav = g * std::exp(oracle::I * (big * t)) * a * s_e0;
    const oracle::M las = wl * std::exp(oracle::I * ((big + small) * t - p.phi)) * s_e1;
    const oracle::M expected = cav + cav.adjoint() + las + las.adjoint();
    CHECK(max_abs(h.at(t) - expected) < 1e-14);
  }
  SimParams missing = small_params(1, 2);
  CHECK_THROWS_AS(build_lambda_hamiltonian(missing), PhysicsError);
}

TEST_CASE("recipe sum requires matching layouts") {
  const HamiltonianRecipe a = build_effective_hamiltonian(small_params(2, 2), 0.0);
  const HamiltonianRecipe b = build_effective_hamiltonian(small_params(2, 3), 0.0);
  CHECK_THROWS_AS(HamiltonianRecipe::sum(a, b, "bad"), DimensionError);
}
