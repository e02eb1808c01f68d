#pragma once

// Hamiltonian recipes for every level of the qubit-cavity model, from the three-level
// sites down to the effective collective-spin coupling.  Frequencies in rad/ns, time in ns.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nvghz/hilbert.hpp"

namespace nvghz {

// Level energies and couplings of one three-level site. Levels are ordered |0>, |1>, |e>.
struct LambdaSite {
  double G = 0.0;         // cavity coupling on |e><0|
  double Omega_L = 0.0;   // laser coupling on |e><1|
  double omega_10 = 0.0;  // |1> energy (|0> is the zero of energy)
  double omega_e0 = 0.0;  // |e> energy
  double omega_L = 0.0;   // laser frequency
};

struct LambdaParams {
  double omega_c = 0.0;
  // One entry per qubit, or a single entry shared by all qubits.
  std::vector<LambdaSite> sites;

  const LambdaSite& site(int j) const;
  // Delta_j = omega_e0 - omega_c
  double Delta(int j) const { return site(j).omega_e0 - omega_c; }
  // delta_j = omega_c - omega_10 - omega_L
  double delta(int j) const { return omega_c - site(j).omega_10 - site(j).omega_L; }

  // Single shared site with the requested detunings; energies are placed relative to
  // the cavity frequency `omega_c` with omega_10 = 0.
  static LambdaParams from_detunings(double G, double Omega_L, double Delta, double delta,
                                     double omega_c = 0.0);
};

struct SimParams {
  int n_qubits = 2;
  double eta = 0.0;
  std::vector<double> eta_per_qubit;  // empty: every qubit uses `eta`
  double delta = 0.0;
  double Omega = 0.0;
  double phi = 0.0;
  int n_max = 12;
  double n_bar = 0.0;

  std::optional<LambdaParams> lambda;
  // decoherence budget inputs
  std::optional<double> gamma0;
  std::optional<double> quality_factor;
  std::optional<double> wavelength_nm;

  double eta_of(int j) const;
  bool uniform_eta() const;
  HilbertLayout layout() const { return HilbertLayout::qubits(n_qubits, n_max); }

  // Throws PhysicsError for eta <= 0, delta <= 0, Omega < 0, n_bar < 0, N < 1, n_max < 1,
  // or an eta_per_qubit list whose length differs from N.
  void validate() const;
};

using Envelope = std::function<Complex(double)>;

struct RecipeTerm {
  OperatorMatrix op;
  Envelope envelope;
};

// H(t) = sum_k envelope_k(t) * op_k
class HamiltonianRecipe {
 public:
  HamiltonianRecipe(HilbertLayout layout, std::string label, std::vector<RecipeTerm> terms);

  const HilbertLayout& layout() const noexcept { return layout_; }
  const std::string& label() const noexcept { return label_; }
  const std::vector<RecipeTerm>& terms() const noexcept { return terms_; }

  Matrix at(double t) const;
  // max|H - H^dagger| / max(1, max|H|) at time t
  double hermiticity_defect(double t) const;
  // Throws PhysicsError if the relative defect exceeds 1e-12.
  void require_hermitian(double t) const;

  // Concatenated term lists; layouts must match.
  static HamiltonianRecipe sum(const HamiltonianRecipe& lhs, const HamiltonianRecipe& rhs,
                               std::string label);

 private:
  HilbertLayout layout_;
  std::string label_;
  std::vector<RecipeTerm> terms_;
};

// eta_j = G_j Omega_Lj (1/(Delta_j + delta_j) + 1/Delta_j); requires params.lambda.
std::vector<double> effective_eta(const SimParams& params);

// Three-level sites coupled to the cavity, in the interaction picture of the bare level
// and cavity energies.  Uses params.lambda, params.n_qubits, params.n_max, params.phi.
HamiltonianRecipe build_lambda_hamiltonian(const SimParams& params);

// sum_j eta_j (a s+_j e^{-i(delta t - phi)} + h.c.)
HamiltonianRecipe build_raman_hamiltonian(const SimParams& params, double phi);

// Raman coupling plus the static microwave drive Omega * J_x.
HamiltonianRecipe build_driven_hamiltonian(const SimParams& params, double phi);

// Driven model in the frame rotating with Omega * J_x (drive term removed).
HamiltonianRecipe build_rotated_hamiltonian(const SimParams& params, double phi);

// eta (a e^{-i(delta t - phi)} + h.c.) J_x
HamiltonianRecipe build_effective_hamiltonian(const SimParams& params, double phi);

// Rotated-frame terms dropped by the effective model: oscillating at delta +- Omega.
// build_rotated_hamiltonian == build_effective_hamiltonian + build_neglected_terms.
HamiltonianRecipe build_neglected_terms(const SimParams& params, double phi);

}  // namespace nvghz
