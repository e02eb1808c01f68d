#pragma once

// GHZ preparation: echo-composed gate schedules, targets, fidelity metrics, the
// drive-induced infidelity model and the decoherence budget.

#include <optional>
#include <string>
#include <vector>

#include "nvghz/engine.hpp"
#include "nvghz/model.hpp"

namespace nvghz {

enum class SourceModel { FullDriven, Effective };
enum class CavityDisposal { Trace, Project };

const char* to_string(SourceModel source);
const char* to_string(CavityDisposal disposal);

struct PulseSegment {
  SourceModel source = SourceModel::Effective;
  double phi = 0.0;
  double duration = 0.0;  // ns
};

// Segments run back to back.  Each segment's Hamiltonian is evaluated on its own clock,
// starting at zero when the segment starts.
struct PulseSchedule {
  std::vector<PulseSegment> segments;

  double total_duration() const;
  bool is_echo() const;
  void validate() const;
};

// (phi = 0, t/2) then (phi = pi, t/2)
PulseSchedule echo_schedule(double total_t, SourceModel source);
PulseSchedule single_phase_schedule(double total_t, SourceModel source, double phi = 0.0);

// Builds the recipe a segment runs with.
HamiltonianRecipe segment_recipe(const SimParams& params, const PulseSegment& segment);

// Propagates `initial` through every segment.  Recorded times are absolute; the result's
// norm defects are measured against the initial Gram matrix.
TrajectoryResult run_schedule(const SimParams& params, const PulseSchedule& schedule,
                              const InitialCondition& initial, const PropagationSettings& settings,
                              const std::vector<double>& record_times = {});

// (eta^2/delta) (2/delta sin(delta t / 2) - t)
double gamma_of(double t, double eta, double delta);
// J_x^2 angle of the uninterrupted gate: (eta^2/delta) (t - sin(delta t)/delta)
double single_phase_angle(double t, double eta, double delta);

// Spin-register target (2^N amplitudes, site 1 most significant).  Even N: the closed
// form (e^{-i pi/4}|0...0> + e^{i pi (1/4 + N/2)}|1...1>)/sqrt 2; odd N:
// exp(-i pi/2 J_x) exp(i pi/2 J_x^2) |0...0>.
// For even N the closed form equals exp(-i pi/2 J_x^2)|0...0>, the complex conjugate of
// what the gate produces; see gate_ghz_state.
Vector ghz_target(int n_qubits);

// exp(i pi/2 J_x^2) |0...0>, followed by exp(-i pi/2 J_x) for odd N when requested.
// This is the state the pi/2 gate actually prepares.
Vector gate_ghz_state(int n_qubits, bool odd_correction = true);

// |<target|state>|^2 for spin-register vectors.
double fidelity(const Vector& state, const Vector& target);

// Fidelity of an ensemble of kets (columns, Y Y^dagger = rho) on a qubit+cavity layout.
// Trace: <t| Tr_cav(rho) |t>.  Project: sum_k |<t, n_k | y_k>|^2 with n_k the initial
// Fock level of column k (`column_fock`).
double fidelity(const HilbertLayout& layout, const Matrix& kets, const Vector& target,
                CavityDisposal disposal, const std::vector<int>& column_fock = {});

// xi = N(N-1) eta^2 / (8 Omega^2)
double infidelity_xi(int n_qubits, double eta, double Omega);
// xi (1 - cos(2 Omega t))
double infidelity_model(int n_qubits, double eta, double Omega, double t);
// overlap * (1 - f_in), clamped to [0, 1]
double composite_fidelity(double overlap, double f_in);

struct CommensurabilityResult {
  double delta_residual = 0.0;  // delta t wrapped to [-pi, pi)
  double omega_residual = 0.0;  // Omega t wrapped to [-2pi, 2pi)
  bool delta_ok = true;
  bool omega_ok = true;
  bool satisfied() const { return delta_ok && omega_ok; }
};
CommensurabilityResult commensurability_check(double delta, double Omega, double t);

// theta maximizing |tr(exp(i theta J_x^2)^dagger Q)| for a spin-register matrix Q.
// Returned in (-pi, pi]; for odd N the angle is only defined modulo pi and is reported
// in (-pi/2, pi/2].
double fit_jx2_angle(const Matrix& q, int n_qubits);

// Tr(rho_j^2) for every qubit of a spin-register density matrix.
std::vector<double> single_qubit_purities(const Matrix& rho_spin, int n_qubits);

// Apply a spin-register operator to every column of a qubit+cavity ket block.
Matrix apply_spin_operator(const HilbertLayout& layout, const Matrix& spin_op, const Matrix& kets);

struct ProtocolOptions {
  int k = 1;                    // closure index: T = 2 k pi / delta
  bool echo = true;
  CavityDisposal disposal = CavityDisposal::Trace;
  int initial_fock = 0;         // used when n_bar == 0
  int samples = 201;            // recorded times, including 0 and T
  bool fit_angle = true;        // propagate the spin block on |initial_fock> to fit theta
};

struct GateReport {
  int n_qubits = 0;
  SourceModel source = SourceModel::Effective;
  CavityDisposal disposal = CavityDisposal::Trace;
  bool echo = true;
  int k = 1;
  double total_time = 0.0;
  double n_bar = 0.0;

  std::vector<double> times;
  std::vector<double> fidelity;            // vs gate_ghz_state (N >= 2) or |0> return probability (N = 1)
  std::vector<double> infidelity_model;
  std::vector<double> norm_defect;
  std::vector<double> top_fock_population;

  std::optional<double> final_fidelity;    // absent for N = 1
  std::optional<double> final_fidelity_closed_form;  // vs ghz_target; absent for N = 1
  double final_overlap = 0.0;              // last entry of `fidelity`
  double xi = 0.0;
  double composite = 0.0;                  // composite_fidelity(final_overlap, F_in(T))
  double gamma_formula = 0.0;
  std::optional<double> gamma_fit;
  std::vector<double> purities;
  CommensurabilityResult commensurability;

  bool failed = false;
  std::vector<std::string> warnings;
};

GateReport run_ghz_protocol(const SimParams& params, SourceModel source, const PropagationSettings& settings,
                            const ProtocolOptions& options = {});

struct BudgetReport {
  double eta = 0.0;               // effective_eta of site 0
  double eta_far_detuned = 0.0;   // 2 G Omega_L / Delta
  double gate_time = 0.0;         // pi / eta
  double gamma0 = 0.0;
  double gamma_eff = 0.0;         // Gamma0 Omega_L G / Delta^2
  double omega_c = 0.0;
  double quality_factor = 0.0;
  double kappa = 0.0;             // omega_c / Q
  double gamma_time_n = 0.0;      // T Gamma_eff N
  double kappa_time = 0.0;        // T kappa (n_bar + 1)
};

// Needs params.lambda, gamma0, quality_factor and either wavelength_nm or lambda.omega_c > 0.
// Missing inputs throw ConfigError naming the field; Q <= 0 throws PhysicsError.
BudgetReport decoherence_budget(const SimParams& params);

// Angular frequency (rad/ns) of light with vacuum wavelength `nm`.
double optical_angular_frequency(double wavelength_nm);

// Second-order Dyson estimate of the infidelity caused by the neglected terms:
// Var(int_0^t H_n) in the reference state gate_ghz_state (x) |0> (|0> (x) |0> for N = 1),
// i.e. -2 Re<U2> - |<U1>|^2.  H_n keeps its full time dependence (both the delta and the
// Omega phases); only the reference state is held fixed.  Requires delta t = 2 n pi to
// 1e-9.  `steps_per_period` sets the fixed quadrature grid against delta + Omega.
double dyson_infidelity_oracle(const SimParams& params, double t, int steps_per_period = 200);

struct RamanFit {
  double frequency = 0.0;   // rad/ns
  double amplitude = 0.0;   // sqrt(b^2 + c^2) of a + b cos(wt) + c sin(wt)
  double offset = 0.0;
  double rms_residual = 0.0;
  std::vector<double> times;
  std::vector<double> population;  // |1> population
};

// Single three-level site started in |0> with one cavity photon, propagated under
// build_lambda_hamiltonian for `duration` ns; the |1> population is sampled at `samples`
// points and fitted with a sinusoid.  Uses params.lambda and params.phi only.
RamanFit raman_oscillation_fit(const SimParams& params, double duration, int samples = 801);

}  // namespace nvghz
