#include <doctest.h>

#include "nvghz/hilbert.hpp"
#include "oracles.hpp"

using namespace nvghz;

TEST_CASE("layout ordering puts site 1 first and the cavity last") {
  const HilbertLayout layout = HilbertLayout::qubits(3, 4);
  CHECK(layout.dim() == 8 * 5);
  CHECK(layout.index(0b101, 3) == 5 * 5 + 3);
  CHECK(layout.fock_of(layout.index(6, 2)) == 2);
  CHECK(layout.spin_of(layout.index(6, 2)) == 6);
  CHECK(layout.site_level(0b100, 0) == 1);
  CHECK(layout.site_level(0b100, 2) == 0);

  const HilbertLayout lam = HilbertLayout::lambda_sites(2, 1);
  CHECK(lam.spin_dim() == 9);
  CHECK(lam.site_level(2 * 3 + 1, 0) == 2);
  CHECK(lam.site_level(2 * 3 + 1, 1) == 1);
}

TEST_CASE("dimension cap and invalid shapes are rejected") {
  CHECK_THROWS_AS(HilbertLayout::qubits(12, 1), DimensionError);  // 4096 * 2
  CHECK_NOTHROW(HilbertLayout::qubits(11, 1));                     // 2048 * 2
  CHECK_THROWS_AS(HilbertLayout(2, 4, 3), DimensionError);
  CHECK_THROWS_AS(HilbertLayout(2, 2, 1), DimensionError);
  CHECK_THROWS_AS(HilbertLayout(0, 2, 3), DimensionError);
}

TEST_CASE("site embedding matches an explicit Kronecker chain") {
  const int n = 3, n_max = 2;
  const HilbertLayout layout = HilbertLayout::qubits(n, n_max);
  for (int site = 0; site < n; ++site) {
    const Matrix got = embed_site_op(layout, site, pauli::raising()).matrix();
    CHECK(max_abs(got - oracle::on_site(oracle::sp(), site, n, n_max + 1)) == 0.0);
  }
  const Matrix a = embed_cavity_op(layout, ladder_lowering(n_max + 1)).matrix();
  CHECK(max_abs(a - oracle::on_cavity(oracle::annihilation(n_max), n)) == 0.0);
  CHECK_THROWS_AS(embed_site_op(layout, 3, pauli::x()), DimensionError);
}

TEST_CASE("collective J_x") {
  const HilbertLayout layout = HilbertLayout::qubits(4, 1);
  const Matrix jx = collective_jx(layout).matrix();
  CHECK(max_abs(jx - oracle::kron(oracle::jx(4), oracle::eye(2))) < 1e-15);
  CHECK(max_abs(spin_jx(4) - oracle::jx(4)) < 1e-15);
  // spectrum -2..2
  Eigen::SelfAdjointEigenSolver<Matrix> es(spin_jx(4));
  CHECK(es.eigenvalues().minCoeff() == doctest::Approx(-2.0));
  CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(2.0));
}

TEST_CASE("Pauli conventions") {
  CHECK(max_abs(pauli::raising() - oracle::sp()) == 0.0);
  CHECK(max_abs(pauli::raising() - 0.5 * (pauli::x() - kImag * pauli::y())) < 1e-16);
  Matrix pm(2, 2);
  pm << 0.5, -0.5, 0.5, -0.5;
  CHECK(max_abs(pauli::plus_minus() - pm) < 1e-16);
}

TEST_CASE("unitary_exp agrees with the generic matrix exponential") {
  const Matrix h = collective_jx(HilbertLayout::qubits(2, 3)).matrix() +
                   embed_cavity_op(HilbertLayout::qubits(2, 3), ladder_lowering(4)).matrix() * 0.3;
  const Matrix herm = h + h.adjoint();
  CHECK(max_abs(unitary_exp(herm, 0.77) - oracle::expm_i(herm, 0.77)) < 1e-12);
}

TEST_CASE("state and density validation") {
  const HilbertLayout layout = HilbertLayout::qubits(1, 2);
  Vector v = Vector::Zero(layout.dim());
  v(0) = 1.0;
  CHECK_NOTHROW(StateVector(layout, v));
  v(1) = 0.1;
  CHECK_THROWS_AS(StateVector(layout, v), PhysicsError);
  CHECK_THROWS_AS(StateVector(layout, Vector::Zero(3)), DimensionError);

  Matrix rho = Matrix::Zero(layout.dim(), layout.dim());
  rho(0, 0) = 1.0;
  CHECK_NOTHROW(DensityMatrix(layout, rho));
  rho(0, 1) = 0.2;
  CHECK_THROWS(DensityMatrix(layout, rho));  // not Hermitian
  rho(0, 1) = 0.0;
  rho(0, 0) = 0.9;
  CHECK_THROWS(DensityMatrix(layout, rho));  // trace
}

TEST_CASE("thermal weights follow Bose-Einstein and guard the tail") {
  const ThermalWeights w = thermal_weights(0.5, 40);
  const double ratio = 0.5 / 1.5;
  CHECK(w.weights[0] == doctest::Approx(1.0 / 1.5).epsilon(1e-12));
  CHECK(w.weights[3] / w.weights[2] == doctest::Approx(ratio).epsilon(1e-12));
  double total = 0.0;
  for (double x : w.weights) total += x;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(thermal_weights(2.0, 10), DimensionError);
  const ThermalWeights vac = thermal_weights(0.0, 5);
  CHECK(vac.weights[0] == 1.0);
}

TEST_CASE("partial trace of a product state") {
  const HilbertLayout layout = HilbertLayout::qubits(2, 3);
  Vector spin(4);
  spin << 0.5, 0.5 * kImag, -0.5, 0.5;
  Vector cav = Vector::Zero(4);
  cav(1) = 0.6;
  cav(2) = 0.8 * kImag;
  const Vector psi = oracle::kron(spin, cav);
  const Matrix rho = trace_out_cavity(layout, psi);
  CHECK(max_abs(rho - spin * spin.adjoint()) < 1e-15);
}

TEST_CASE("phase-aligned distance ignores a global phase") {
  const Matrix u = oracle::expm_i(spin_jx(2) * spin_jx(2), 0.4);
  CHECK(phase_aligned_distance(u, std::exp(kImag * 2.1) * u) < 1e-14);
  CHECK(phase_aligned_distance(u, u * 1.001) > 1e-4);
}
