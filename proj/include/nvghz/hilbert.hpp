#pragma once

// Dense operators on the composite space  site_1 (x) ... (x) site_N (x) cavity.
//
// Sites are two-level (qubit) or three-level (Lambda) systems; the cavity is a single
// bosonic mode truncated at n_max (hard cutoff, a^dagger |n_max> = 0).  Basis index of
// |s_1 ... s_N, n> is ((s_1 * d + s_2) * d + ... + s_N) * fock_dim + n, i.e. site 1 is
// the most significant digit and the cavity the least significant.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "nvghz/error.hpp"

namespace nvghz {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kImag{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

class HilbertLayout {
 public:
  static constexpr int kMaxDim = 4096;

  HilbertLayout(int n_sites, int site_dim, int fock_dim);

  static HilbertLayout qubits(int n_sites, int n_max) { return {n_sites, 2, n_max + 1}; }
  static HilbertLayout lambda_sites(int n_sites, int n_max) { return {n_sites, 3, n_max + 1}; }

  int n_sites() const noexcept { return n_sites_; }
  int site_dim() const noexcept { return site_dim_; }
  int fock_dim() const noexcept { return fock_dim_; }
  int n_max() const noexcept { return fock_dim_ - 1; }
  int spin_dim() const noexcept { return spin_dim_; }
  int dim() const noexcept { return spin_dim_ * fock_dim_; }

  int index(int spin_index, int fock_n) const noexcept { return spin_index * fock_dim_ + fock_n; }
  int fock_of(int index) const noexcept { return index % fock_dim_; }
  int spin_of(int index) const noexcept { return index / fock_dim_; }

  // Level of `site` (0-based) within a spin-register index.
  int site_level(int spin_index, int site) const;

  bool operator==(const HilbertLayout&) const = default;

 private:
  int n_sites_;
  int site_dim_;
  int fock_dim_;
  int spin_dim_;
};

class OperatorMatrix {
 public:
  OperatorMatrix(HilbertLayout layout, Matrix entries);

  static OperatorMatrix identity(const HilbertLayout& layout);
  static OperatorMatrix zero(const HilbertLayout& layout);

  const HilbertLayout& layout() const noexcept { return layout_; }
  const Matrix& matrix() const noexcept { return entries_; }
  int dim() const noexcept { return static_cast<int>(entries_.rows()); }

  OperatorMatrix adjoint() const;

  // max |M - M^dagger|
  double hermiticity_defect() const;
  // Throws DimensionError when the defect exceeds `tol`.
  void require_hermitian(double tol = 1e-12) const;

  friend OperatorMatrix operator+(const OperatorMatrix& lhs, const OperatorMatrix& rhs);
  friend OperatorMatrix operator-(const OperatorMatrix& lhs, const OperatorMatrix& rhs);
  friend OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs);
  friend OperatorMatrix operator*(Complex scale, const OperatorMatrix& op);

 private:
  HilbertLayout layout_;
  Matrix entries_;
};

class StateVector {
 public:
  // Throws DimensionError on size mismatch, PhysicsError when | |psi| - 1 | > 1e-10.
  StateVector(HilbertLayout layout, Vector amplitudes);

  // |spin_index> (x) |fock_n>
  static StateVector basis(const HilbertLayout& layout, int spin_index, int fock_n);

  const HilbertLayout& layout() const noexcept { return layout_; }
  const Vector& amplitudes() const noexcept { return amplitudes_; }

 private:
  HilbertLayout layout_;
  Vector amplitudes_;
};

class DensityMatrix {
 public:
  // Validates Hermiticity, unit trace (1e-10) and eigenvalues >= -1e-10.
  DensityMatrix(HilbertLayout layout, Matrix entries);

  static DensityMatrix pure(const StateVector& state);
  // |spin_index><spin_index| (x) thermal cavity state with mean occupation n_bar.
  static DensityMatrix thermal_cavity(const HilbertLayout& layout, int spin_index, double n_bar);

  const HilbertLayout& layout() const noexcept { return layout_; }
  const Matrix& matrix() const noexcept { return entries_; }

 private:
  HilbertLayout layout_;
  Matrix entries_;
};

Matrix kron(const Matrix& lhs, const Matrix& rhs);

namespace pauli {
Matrix x();
Matrix y();
Matrix z();
Matrix raising();   // |1><0|
Matrix lowering();  // |0><1|
Matrix plus_minus();  // |+><-|, with sigma_x |+-> = +-|+->
}  // namespace pauli

// Identity-padded embedding of a site_dim x site_dim operator at `site` (0-based).
OperatorMatrix embed_site_op(const HilbertLayout& layout, int site, const Matrix& local);
// Identity-padded embedding of a fock_dim x fock_dim operator on the cavity factor.
OperatorMatrix embed_cavity_op(const HilbertLayout& layout, const Matrix& local);

// Truncated annihilation operator on a fock_dim ladder: a(n-1, n) = sqrt(n).
Matrix ladder_lowering(int fock_dim);

struct FockOperators {
  OperatorMatrix a;
  OperatorMatrix a_dag;
};
FockOperators fock_ops(const HilbertLayout& layout);

// J_x = sum_j sigma_x^j / 2, summed in ascending site order. Qubit layouts only.
OperatorMatrix collective_jx(const HilbertLayout& layout);

// J_x on the bare 2^N spin register (no cavity factor).
Matrix spin_jx(int n_sites);

struct ThermalWeights {
  std::vector<double> weights;  // renormalized over the truncated ladder
  double tail_mass = 0.0;       // Bose-Einstein mass above n_max before renormalization
};
// Throws DimensionError when the discarded tail exceeds 1e-6.
ThermalWeights thermal_weights(double n_bar, int fock_dim);

// exp(-i s H) for Hermitian H, by spectral decomposition.
Matrix unitary_exp(const Matrix& hermitian, double s);

double max_abs(const Matrix& m);

// min over theta of max |u - e^{i theta} v|.  theta starts at arg tr(v^dagger u) and is
// refined by a golden-section search; the result is an upper bound on the true minimum
// that is tight when u and v are close.
double phase_aligned_distance(const Matrix& u, const Matrix& v);

// Reduced spin-register density matrix  Tr_cavity( sum_k |y_k><y_k| )  for a block of
// kets given as the columns of `kets`.
Matrix trace_out_cavity(const HilbertLayout& layout, const Matrix& kets);

}  // namespace nvghz
