#pragma once

// Time-ordered propagation of HamiltonianRecipes and the closed-form propagator of the
// effective collective-spin coupling.

#include <string>
#include <vector>

#include "nvghz/hilbert.hpp"
#include "nvghz/model.hpp"

namespace nvghz {

struct PropagationSettings {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step = 0.1;       // ns
  double min_step = 1e-12;     // ns; below this the run aborts
  double norm_tolerance = 1e-8;
  double top_fock_alarm = 1e-6;

  // max_step = (2 pi / Omega) / 40 with a drive, else (2 pi / delta) / 40.
  static PropagationSettings defaults_for(const SimParams& params);
  void validate() const;
};

// Initial data for propagate(): a block of columns evolved together.  A density matrix
// is carried as sqrt(p_k) v_k columns of its eigendecomposition, so Y Y^dagger = rho.
class InitialCondition {
 public:
  enum class Kind { State, Density, Identity, Kets };

  static InitialCondition state(const StateVector& psi);
  static InitialCondition density(const DensityMatrix& rho);
  static InitialCondition identity(const HilbertLayout& layout);
  // Columns are evolved as given (no normalization check).
  static InitialCondition kets(const HilbertLayout& layout, Matrix columns);

  Kind kind() const noexcept { return kind_; }
  const HilbertLayout& layout() const noexcept { return layout_; }
  const Matrix& columns() const noexcept { return columns_; }

 private:
  InitialCondition(Kind kind, HilbertLayout layout, Matrix columns)
      : kind_(kind), layout_(layout), columns_(std::move(columns)) {}

  Kind kind_;
  HilbertLayout layout_;
  Matrix columns_;
};

struct TrajectoryResult {
  std::vector<double> times;
  std::vector<Matrix> snapshots;              // evolved columns at each recorded time
  std::vector<double> norm_defect;            // max |Y^dagger Y - Y0^dagger Y0|
  std::vector<double> top_fock_population;    // weight of |n_max> in Y Y^dagger / tr
  bool has_propagator = false;                // identity initial condition: snapshots are U(t, t0)
  bool failed = false;
  std::vector<std::string> warnings;
  long steps_accepted = 0;
  long steps_rejected = 0;

  const Matrix& final_columns() const { return snapshots.back(); }
  double max_norm_defect() const;
  double max_top_fock_population() const;
};

// Solves i dY/dt = H(t) Y from t0 to t1 with classical RK4 under step doubling.
// `record_times` (each in [t0, t1], ascending) are hit exactly; t1 is always recorded.
// Throws PropagationError on step underflow, naming the largest eigenfrequency of H(t).
TrajectoryResult propagate(const HamiltonianRecipe& recipe, const InitialCondition& initial, double t0,
                           double t1, const PropagationSettings& settings,
                           const std::vector<double>& record_times = {});

// A(t) = (eta^2/delta) [ (e^{i delta t} - 1)/(i delta) - t ]
Complex analytic_A(double t, double eta, double delta);
// B(t) = i (eta/delta) (e^{-i delta t} - 1)
Complex analytic_B(double t, double eta, double delta);

// exp(-i A J_x^2) exp(-i B a J_x) exp(-i B* a^dagger J_x) restricted to the layout's Fock
// block.  Each J_x eigensector is evaluated in a padded ladder and cropped, so the result
// is the block of the untruncated operator, not the exponential of truncated matrices.
OperatorMatrix analytic_propagator(const HilbertLayout& layout, double eta, double delta, double t);

// T_k = 2 k pi / delta, k = 1..k_max
std::vector<double> closure_times(double delta, int k_max);

// Spin-register block of U on cavity sector |fock_n>.  Throws PhysicsError when U couples
// different Fock sectors by more than `tol`.
Matrix reduced_qubit_propagator(const OperatorMatrix& u, int fock_n, double tol = 1e-6);

// Largest matrix entry coupling different Fock sectors.
double fock_leakage(const HilbertLayout& layout, const Matrix& u);

}  // namespace nvghz
