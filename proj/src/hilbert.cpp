#include "nvghz/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace nvghz {

namespace {

void require_same_layout(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
  if (!(lhs.layout() == rhs.layout())) {
    throw DimensionError("operators act on different Hilbert layouts");
  }
}

}  // namespace

HilbertLayout::HilbertLayout(int n_sites, int site_dim, int fock_dim)
    : n_sites_(n_sites), site_dim_(site_dim), fock_dim_(fock_dim), spin_dim_(1) {
  if (n_sites < 1) throw DimensionError("n_sites must be >= 1");
  if (site_dim != 2 && site_dim != 3) throw DimensionError("site_dim must be 2 or 3");
  if (fock_dim < 2) throw DimensionError("fock_dim must be >= 2");
  long long total = fock_dim;
  for (int i = 0; i < n_sites; ++i) {
    spin_dim_ *= site_dim;
    total *= site_dim;
    if (total > kMaxDim) {
      throw DimensionError("total dimension exceeds the dense cap of " + std::to_string(kMaxDim));
    }
  }
}

int HilbertLayout::site_level(int spin_index, int site) const {
  if (site < 0 || site >= n_sites_) throw DimensionError("site index out of range");
  int stride = 1;
  for (int i = n_sites_ - 1; i > site; --i) stride *= site_dim_;
  return (spin_index / stride) % site_dim_;
}

OperatorMatrix::OperatorMatrix(HilbertLayout layout, Matrix entries)
    : layout_(layout), entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) throw DimensionError("operator matrix is not square");
  if (entries_.rows() != layout_.dim()) {
    throw DimensionError("operator dimension " + std::to_string(entries_.rows()) +
                         " does not match layout dimension " + std::to_string(layout_.dim()));
  }
}

OperatorMatrix OperatorMatrix::identity(const HilbertLayout& layout) {
  return {layout, Matrix::Identity(layout.dim(), layout.dim())};
}

OperatorMatrix OperatorMatrix::zero(const HilbertLayout& layout) {
  return {layout, Matrix::Zero(layout.dim(), layout.dim())};
}

OperatorMatrix OperatorMatrix::adjoint() const { return {layout_, entries_.adjoint()}; }

double OperatorMatrix::hermiticity_defect() const {
  return max_abs(entries_ - entries_.adjoint());
}

void OperatorMatrix::require_hermitian(double tol) const {
  const double defect = hermiticity_defect();
  if (defect > tol) {
    throw DimensionError("operator is not Hermitian: max|M - M^dagger| = " + std::to_string(defect));
  }
}

OperatorMatrix operator+(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
  require_same_layout(lhs, rhs);
  return {lhs.layout_, lhs.entries_ + rhs.entries_};
}

OperatorMatrix operator-(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
  require_same_layout(lhs, rhs);
  return {lhs.layout_, lhs.entries_ - rhs.entries_};
}

OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
  require_same_layout(lhs, rhs);
  return {lhs.layout_, lhs.entries_ * rhs.entries_};
}

OperatorMatrix operator*(Complex scale, const OperatorMatrix& op) {
  return {op.layout_, scale * op.entries_};
}

StateVector::StateVector(HilbertLayout layout, Vector amplitudes)
    : layout_(layout), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != layout_.dim()) throw DimensionError("state size does not match layout");
  const double deviation = std::abs(amplitudes_.norm() - 1.0);
  if (deviation > 1e-10) {
    throw PhysicsError("state vector is not normalized (| |psi| - 1 | = " + std::to_string(deviation) + ")");
  }
}

StateVector StateVector::basis(const HilbertLayout& layout, int spin_index, int fock_n) {
  if (spin_index < 0 || spin_index >= layout.spin_dim() || fock_n < 0 || fock_n >= layout.fock_dim()) {
    throw DimensionError("basis state out of range");
  }
  Vector v = Vector::Zero(layout.dim());
  v(layout.index(spin_index, fock_n)) = 1.0;
  return {layout, std::move(v)};
}

DensityMatrix::DensityMatrix(HilbertLayout layout, Matrix entries)
    : layout_(layout), entries_(std::move(entries)) {
  if (entries_.rows() != layout_.dim() || entries_.cols() != layout_.dim()) {
    throw DimensionError("density matrix size does not match layout");
  }
  if (max_abs(entries_ - entries_.adjoint()) > 1e-10) throw PhysicsError("density matrix is not Hermitian");
  if (std::abs(entries_.trace() - 1.0) > 1e-10) throw PhysicsError("density matrix trace differs from 1");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-10) throw PhysicsError("density matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::pure(const StateVector& state) {
  return {state.layout(), state.amplitudes() * state.amplitudes().adjoint()};
}

DensityMatrix DensityMatrix::thermal_cavity(const HilbertLayout& layout, int spin_index, double n_bar) {
  const ThermalWeights w = thermal_weights(n_bar, layout.fock_dim());
  Matrix rho = Matrix::Zero(layout.dim(), layout.dim());
  for (int n = 0; n < layout.fock_dim(); ++n) {
    const int i = layout.index(spin_index, n);
    rho(i, i) = w.weights[static_cast<std::size_t>(n)];
  }
  return {layout, std::move(rho)};
}

Matrix kron(const Matrix& lhs, const Matrix& rhs) {
  Matrix out(lhs.rows() * rhs.rows(), lhs.cols() * rhs.cols());
  for (Eigen::Index i = 0; i < lhs.rows(); ++i) {
    for (Eigen::Index j = 0; j < lhs.cols(); ++j) {
      out.block(i * rhs.rows(), j * rhs.cols(), rhs.rows(), rhs.cols()) = lhs(i, j) * rhs;
    }
  }
  return out;
}

namespace pauli {

Matrix x() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

Matrix y() {
  Matrix m(2, 2);
  m << 0.0, -kImag, kImag, 0.0;
  return m;
}

Matrix z() {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

Matrix raising() {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}

Matrix lowering() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

Matrix plus_minus() {
  // |+><-| = (|0> + |1>)(<0| - <1|) / 2
  Matrix m(2, 2);
  m << 0.5, -0.5, 0.5, -0.5;
  return m;
}

}  // namespace pauli

OperatorMatrix embed_site_op(const HilbertLayout& layout, int site, const Matrix& local) {
  if (site < 0 || site >= layout.n_sites()) {
    throw DimensionError("site " + std::to_string(site) + " out of range for " +
                         std::to_string(layout.n_sites()) + " sites");
  }
  const int d = layout.site_dim();
  if (local.rows() != d || local.cols() != d) throw DimensionError("local operator does not match site_dim");

  int stride = layout.fock_dim();
  for (int i = layout.n_sites() - 1; i > site; --i) stride *= d;

  const int dim = layout.dim();
  Matrix out = Matrix::Zero(dim, dim);
  for (int col = 0; col < dim; ++col) {
    const int level = (col / stride) % d;
    const int base = col - level * stride;
    for (int row_level = 0; row_level < d; ++row_level) {
      out(base + row_level * stride, col) = local(row_level, level);
    }
  }
  return {layout, std::move(out)};
}

OperatorMatrix embed_cavity_op(const HilbertLayout& layout, const Matrix& local) {
  const int f = layout.fock_dim();
  if (local.rows() != f || local.cols() != f) throw DimensionError("local operator does not match fock_dim");
  Matrix out = Matrix::Zero(layout.dim(), layout.dim());
  for (int s = 0; s < layout.spin_dim(); ++s) out.block(s * f, s * f, f, f) = local;
  return {layout, std::move(out)};
}

Matrix ladder_lowering(int fock_dim) {
  Matrix a = Matrix::Zero(fock_dim, fock_dim);
  for (int n = 1; n < fock_dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

FockOperators fock_ops(const HilbertLayout& layout) {
  OperatorMatrix a = embed_cavity_op(layout, ladder_lowering(layout.fock_dim()));
  OperatorMatrix a_dag = a.adjoint();
  return {std::move(a), std::move(a_dag)};
}

OperatorMatrix collective_jx(const HilbertLayout& layout) {
  if (layout.site_dim() != 2) throw DimensionError("collective_jx requires a qubit layout");
  const Matrix half_x = 0.5 * pauli::x();
  OperatorMatrix jx = OperatorMatrix::zero(layout);
  for (int site = 0; site < layout.n_sites(); ++site) jx = jx + embed_site_op(layout, site, half_x);
  return jx;
}

Matrix spin_jx(int n_sites) {
  // Embed on a minimal cavity and keep the n = 0 block; the cavity factor is the
  // least significant digit so the block is exactly the spin-register operator.
  const HilbertLayout layout = HilbertLayout::qubits(n_sites, 1);
  const Matrix full = collective_jx(layout).matrix();
  const int sd = layout.spin_dim();
  Matrix out(sd, sd);
  for (int r = 0; r < sd; ++r) {
    for (int c = 0; c < sd; ++c) out(r, c) = full(layout.index(r, 0), layout.index(c, 0));
  }
  return out;
}

ThermalWeights thermal_weights(double n_bar, int fock_dim) {
  if (!(n_bar >= 0.0)) throw PhysicsError("n_bar must be >= 0");
  if (fock_dim < 1) throw DimensionError("fock_dim must be >= 1");
  ThermalWeights out;
  out.weights.resize(static_cast<std::size_t>(fock_dim), 0.0);
  if (n_bar == 0.0) {
    out.weights[0] = 1.0;
    return out;
  }
  const double ratio = n_bar / (n_bar + 1.0);
  double w = 1.0 / (n_bar + 1.0);
  double sum = 0.0;
  for (int n = 0; n < fock_dim; ++n) {
    out.weights[static_cast<std::size_t>(n)] = w;
    sum += w;
    w *= ratio;
  }
  out.tail_mass = std::pow(ratio, fock_dim);
  if (out.tail_mass > 1e-6) {
    throw DimensionError("thermal tail above n_max carries " + std::to_string(out.tail_mass) +
                         " of the population; increase fock_dim (n_max)");
  }
  for (double& x : out.weights) x /= sum;
  return out;
}

Matrix unitary_exp(const Matrix& hermitian, double s) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian);
  const Eigen::VectorXd& evals = solver.eigenvalues();
  const Matrix& vecs = solver.eigenvectors();
  Vector phases(evals.size());
  for (Eigen::Index i = 0; i < evals.size(); ++i) phases(i) = std::exp(-kImag * (s * evals(i)));
  return vecs * phases.asDiagonal() * vecs.adjoint();
}

double max_abs(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

double phase_aligned_distance(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) throw DimensionError("matrices differ in shape");
  const auto dist = [&](double theta) { return max_abs(u - std::exp(kImag * theta) * v); };

  const Complex overlap = (v.adjoint() * u).trace();
  const double theta0 = std::abs(overlap) > 0.0 ? std::arg(overlap) : 0.0;
  double best = dist(theta0);

  // golden-section refinement in a window around theta0
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = theta0 - 0.25;
  double hi = theta0 + 0.25;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = dist(x1);
  double f2 = dist(x2);
  for (int iter = 0; iter < 80; ++iter) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = dist(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = dist(x2);
    }
  }
  return std::min({best, f1, f2});
}

Matrix trace_out_cavity(const HilbertLayout& layout, const Matrix& kets) {
  if (kets.rows() != layout.dim()) throw DimensionError("ket block does not match layout");
  const int f = layout.fock_dim();
  const int sd = layout.spin_dim();
  Matrix rho = Matrix::Zero(sd, sd);
  for (Eigen::Index k = 0; k < kets.cols(); ++k) {
    // column-major view: element (n, s) is amplitude of |s, n>
    Eigen::Map<const Matrix> amp(kets.col(k).data(), f, sd);
    rho.noalias() += amp.transpose() * amp.conjugate();
  }
  return rho;
}

}  // namespace nvghz
