#include "nvghz/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

namespace nvghz {

namespace {

using SparseOp = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using RowMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// -i H(t) y with every term folded into one sparse matrix sharing the union pattern;
// only the values are refreshed per evaluation.
class Derivative {
 public:
  explicit Derivative(const HamiltonianRecipe& recipe) {
    std::vector<SparseOp> ops;
    for (const RecipeTerm& term : recipe.terms()) {
      SparseOp op = term.op.matrix().sparseView(Complex(0.0), 0.0);
      op.makeCompressed();
      if (op.nonZeros() == 0) continue;
      ops.push_back(std::move(op));
      envelopes_.push_back(&term.envelope);
    }
    const Eigen::Index dim = recipe.layout().dim();
    std::vector<Eigen::Triplet<Complex>> pattern;
    for (const SparseOp& op : ops) {
      for (Eigen::Index r = 0; r < op.outerSize(); ++r) {
        for (SparseOp::InnerIterator it(op, r); it; ++it) pattern.emplace_back(it.row(), it.col(), Complex(1.0));
      }
    }
    combined_.resize(dim, dim);
    combined_.setFromTriplets(pattern.begin(), pattern.end());
    combined_.makeCompressed();

    const Eigen::Index nnz = combined_.nonZeros();
    values_.assign(ops.size(), std::vector<Complex>(static_cast<std::size_t>(nnz), Complex(0.0)));
    for (std::size_t i = 0; i < ops.size(); ++i) {
      Eigen::Index k = 0;
      for (Eigen::Index r = 0; r < combined_.outerSize(); ++r) {
        SparseOp::InnerIterator src(ops[i], r);
        for (SparseOp::InnerIterator it(combined_, r); it; ++it, ++k) {
          while (src && src.col() < it.col()) ++src;
          if (src && src.col() == it.col()) values_[i][static_cast<std::size_t>(k)] = src.value();
        }
      }
    }
  }

  void operator()(double t, const Matrix& y, Matrix& out) {
    Complex* v = combined_.valuePtr();
    const std::size_t nnz = static_cast<std::size_t>(combined_.nonZeros());
    std::fill(v, v + nnz, Complex(0.0));
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const Complex c = -kImag * (*envelopes_[i])(t);
      if (c == Complex(0.0)) continue;
      const std::vector<Complex>& vals = values_[i];
      for (std::size_t k = 0; k < nnz; ++k) v[k] += c * vals[k];
    }
    // row-major copies keep the inner loop contiguous over the ket columns
    rows_in_ = y;
    rows_out_.resize(y.rows(), y.cols());
    for (Eigen::Index r = 0; r < combined_.outerSize(); ++r) {
      auto dst = rows_out_.row(r);
      dst.setZero();
      for (SparseOp::InnerIterator it(combined_, r); it; ++it) dst += it.value() * rows_in_.row(it.col());
    }
    out = rows_out_;
  }

 private:
  SparseOp combined_;
  RowMatrix rows_in_, rows_out_;
  std::vector<std::vector<Complex>> values_;
  std::vector<const Envelope*> envelopes_;
};

// One RK4 step from (t, y) whose first stage k[0] = f(t, y) is already evaluated.
void rk4_step(Derivative& f, double t, const Matrix& y, double h, const Matrix& k0, Matrix& out, Matrix* k) {
  k[3].noalias() = y + (0.5 * h) * k0;
  f(t + 0.5 * h, k[3], k[1]);
  k[3].noalias() = y + (0.5 * h) * k[1];
  f(t + 0.5 * h, k[3], k[2]);
  out.noalias() = y + h * k[2];
  f(t + h, out, k[3]);
  out.noalias() = y + (h / 6.0) * (k0 + 2.0 * k[1] + 2.0 * k[2] + k[3]);
}

double largest_frequency(const HamiltonianRecipe& recipe, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(recipe.at(t), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double top_fock_weight(const HilbertLayout& layout, const Matrix& y) {
  const double total = y.squaredNorm();
  if (total == 0.0) return 0.0;
  double top = 0.0;
  const int f = layout.fock_dim();
  for (int s = 0; s < layout.spin_dim(); ++s) top += y.row(s * f + f - 1).squaredNorm();
  return top / total;
}

std::string format_double(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, value);
  return buf;
}

// Upper-triangular matrix of exp(x a) on a ladder of size dim:
// <i| e^{x a} |k> = x^{k-i} / (k-i)! * sqrt(k!/i!)
Matrix lowering_exponential(Complex x, int dim) {
  Matrix e = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    Complex value = 1.0;
    e(i, i) = value;
    for (int k = i + 1; k < dim; ++k) {
      value *= x * std::sqrt(static_cast<double>(k)) / static_cast<double>(k - i);
      e(i, k) = value;
    }
  }
  return e;
}

}  // namespace

PropagationSettings PropagationSettings::defaults_for(const SimParams& params) {
  PropagationSettings s;
  if (params.Omega > 0.0) {
    s.max_step = (kTwoPi / params.Omega) / 40.0;
  } else {
    s.max_step = (kTwoPi / std::abs(params.delta)) / 40.0;
  }
  return s;
}

void PropagationSettings::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw PropagationError("tolerances must be > 0");
  if (!(max_step > 0.0)) throw PropagationError("max_step must be > 0");
  if (!(min_step > 0.0) || min_step > max_step) throw PropagationError("min_step must be in (0, max_step]");
}

InitialCondition InitialCondition::state(const StateVector& psi) {
  return {Kind::State, psi.layout(), psi.amplitudes()};
}

InitialCondition InitialCondition::density(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix());
  const Eigen::VectorXd& p = solver.eigenvalues();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 1e-14) keep.push_back(i);
  }
  Matrix cols(rho.layout().dim(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    cols.col(static_cast<Eigen::Index>(c)) = std::sqrt(p(keep[c])) * solver.eigenvectors().col(keep[c]);
  }
  return {Kind::Density, rho.layout(), std::move(cols)};
}

InitialCondition InitialCondition::identity(const HilbertLayout& layout) {
  return {Kind::Identity, layout, Matrix::Identity(layout.dim(), layout.dim())};
}

InitialCondition InitialCondition::kets(const HilbertLayout& layout, Matrix columns) {
  if (columns.rows() != layout.dim()) throw DimensionError("ket block does not match layout");
  return {Kind::Kets, layout, std::move(columns)};
}

double TrajectoryResult::max_norm_defect() const {
  return norm_defect.empty() ? 0.0 : *std::max_element(norm_defect.begin(), norm_defect.end());
}

double TrajectoryResult::max_top_fock_population() const {
  return top_fock_population.empty() ? 0.0
                                     : *std::max_element(top_fock_population.begin(), top_fock_population.end());
}

TrajectoryResult propagate(const HamiltonianRecipe& recipe, const InitialCondition& initial, double t0,
                           double t1, const PropagationSettings& settings,
                           const std::vector<double>& record_times) {
  settings.validate();
  if (!(t1 > t0)) throw PropagationError("propagation requires t1 > t0");
  if (!(recipe.layout() == initial.layout())) {
    throw DimensionError("recipe and initial condition act on different layouts");
  }

  std::vector<double> targets;
  for (double t : record_times) {
    if (t < t0 || t > t1) throw PropagationError("record time outside [t0, t1]");
    if (!targets.empty() && t < targets.back()) throw PropagationError("record times must be ascending");
    if (targets.empty() || t != targets.back()) targets.push_back(t);
  }
  if (targets.empty() || targets.back() != t1) targets.push_back(t1);

  const HilbertLayout& layout = recipe.layout();
  Derivative f(recipe);
  const Matrix gram0 = initial.columns().adjoint() * initial.columns();
  const bool identity_run = initial.kind() == InitialCondition::Kind::Identity;

  TrajectoryResult result;
  result.has_propagator = identity_run;

  Matrix y = initial.columns();
  const double span = t1 - t0;
  double t = t0;
  double h = settings.max_step;
  Matrix full, half, half2, k0, k_mid;
  Matrix k[4];
  bool k0_valid = false;
  bool warned_fock = false;

  const auto record = [&](double when) {
    result.times.push_back(when);
    const double defect = max_abs(y.adjoint() * y - gram0);
    result.norm_defect.push_back(defect);
    const double top = top_fock_weight(layout, y);
    result.top_fock_population.push_back(top);
    result.snapshots.push_back(y);
    if (defect > settings.norm_tolerance && !result.failed) {
      result.failed = true;
      result.warnings.push_back("norm deviation " + format_double("%.3e", defect) + " exceeds " +
                                format_double("%.1e", settings.norm_tolerance) + " at t = " +
                                format_double("%.6g", when) + " ns");
    }
    if (!identity_run && top > settings.top_fock_alarm && !warned_fock) {
      warned_fock = true;
      result.warnings.push_back("truncation alarm: population of |n_max> reached " + format_double("%.3e", top) +
                                " at t = " + format_double("%.6g", when) + " ns; increase n_max");
    }
  };

  std::size_t next = 0;
  if (targets.front() == t0) {
    record(t0);
    ++next;
  }

  while (next < targets.size()) {
    const double target = targets[next];
    const double remaining = target - t;
    const bool clipped = h >= remaining;
    const double step = clipped ? remaining : h;

    if (!k0_valid) {
      f(t, y, k0);
      k0_valid = true;
    }
    rk4_step(f, t, y, step, k0, full, k);
    rk4_step(f, t, y, 0.5 * step, k0, half, k);
    f(t + 0.5 * step, half, k_mid);
    rk4_step(f, t + 0.5 * step, half, 0.5 * step, k_mid, half2, k);

    const double err = max_abs(half2 - full) / 15.0;
    // per-step share of the global tolerance, proportional to the step length
    const double tol = settings.abs_tol + settings.rel_tol * std::max(1.0, max_abs(y)) * step / span;

    if (err <= tol) {
      y = half2 + (half2 - full) / 15.0;
      k0_valid = false;
      t = clipped ? target : t + step;
      ++result.steps_accepted;
      if (clipped) {
        record(target);
        ++next;
      }
      // fifth-power error scaling of the local extrapolated step, capped at doubling
      if (!clipped) {
        const double grow = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 2.0;
        h = std::min(step * std::clamp(grow, 1.0, 2.0), settings.max_step);
      }
    } else {
      ++result.steps_rejected;
      h = 0.5 * step;
      if (h < settings.min_step) {
        throw PropagationError("step size underflow at t = " + format_double("%.9g", t) +
                               " ns; largest Hamiltonian eigenfrequency there is " +
                               format_double("%.6g", largest_frequency(recipe, t)) + " rad/ns");
      }
    }
  }
  return result;
}

Complex analytic_A(double t, double eta, double delta) {
  if (delta == 0.0) throw PhysicsError("analytic_A requires delta != 0");
  const Complex osc = (std::exp(kImag * (delta * t)) - 1.0) / (kImag * delta);
  return (eta * eta / delta) * (osc - t);
}

Complex analytic_B(double t, double eta, double delta) {
  if (delta == 0.0) throw PhysicsError("analytic_B requires delta != 0");
  return kImag * (eta / delta) * (std::exp(-kImag * (delta * t)) - 1.0);
}

OperatorMatrix analytic_propagator(const HilbertLayout& layout, double eta, double delta, double t) {
  if (layout.site_dim() != 2) throw DimensionError("analytic_propagator requires a qubit layout");
  if (delta == 0.0) throw PhysicsError("analytic_propagator requires delta != 0");

  const int n = layout.n_sites();
  const int sd = layout.spin_dim();
  const int f = layout.fock_dim();
  const Complex a_coef = analytic_A(t, eta, delta);
  const Complex b_coef = analytic_B(t, eta, delta);

  // Hadamard basis diagonalizes J_x: bit 0 on a site is |+>, eigenvalue +1/2.
  Matrix hadamard(2, 2);
  hadamard << 1.0, 1.0, 1.0, -1.0;
  hadamard /= std::sqrt(2.0);
  Matrix v = hadamard;
  for (int j = 1; j < n; ++j) v = kron(v, hadamard);

  const double m_max = 0.5 * n;
  const double reach = std::ceil(std::abs(b_coef) * m_max);
  const int padded = f + 40 + 4 * static_cast<int>(reach * reach);

  // one cavity block per distinct eigenvalue m = n/2 - (number of |-> sites)
  std::vector<Matrix> blocks(static_cast<std::size_t>(n + 1));
  for (int minus = 0; minus <= n; ++minus) {
    const double m = 0.5 * n - minus;
    const Matrix lower = lowering_exponential(-kImag * b_coef * m, padded);
    const Matrix raise = lowering_exponential(-kImag * std::conj(b_coef) * m, padded).transpose();
    const Matrix product = lower * raise;
    blocks[static_cast<std::size_t>(minus)] = std::exp(-kImag * a_coef * (m * m)) * product.topLeftCorner(f, f);
  }

  Matrix w = Matrix::Zero(layout.dim(), layout.dim());
  for (int b = 0; b < sd; ++b) {
    const int minus = __builtin_popcount(static_cast<unsigned>(b));
    w.block(b * f, b * f, f, f) = blocks[static_cast<std::size_t>(minus)];
  }
  const Matrix vk = kron(v, Matrix::Identity(f, f));
  return {layout, vk * w * vk.adjoint()};
}

std::vector<double> closure_times(double delta, int k_max) {
  if (!(delta > 0.0)) throw PhysicsError("closure_times requires delta > 0");
  std::vector<double> out;
  for (int k = 1; k <= k_max; ++k) out.push_back(kTwoPi * k / delta);
  return out;
}

double fock_leakage(const HilbertLayout& layout, const Matrix& u) {
  double leak = 0.0;
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    const int nc = layout.fock_of(static_cast<int>(c));
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      if (layout.fock_of(static_cast<int>(r)) != nc) leak = std::max(leak, std::abs(u(r, c)));
    }
  }
  return leak;
}

Matrix reduced_qubit_propagator(const OperatorMatrix& u, int fock_n, double tol) {
  const HilbertLayout& layout = u.layout();
  if (fock_n < 0 || fock_n >= layout.fock_dim()) throw DimensionError("fock index out of range");
  const double leak = fock_leakage(layout, u.matrix());
  if (leak > tol) {
    throw PhysicsError("propagator couples Fock sectors (max off-block entry " + format_double("%.3e", leak) +
                       "); qubit blocks are defined only at closure times");
  }
  const int sd = layout.spin_dim();
  Matrix out(sd, sd);
  for (int r = 0; r < sd; ++r) {
    for (int c = 0; c < sd; ++c) out(r, c) = u.matrix()(layout.index(r, fock_n), layout.index(c, fock_n));
  }
  return out;
}

}  // namespace nvghz
