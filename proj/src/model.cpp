#include "nvghz/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace nvghz {

namespace {

// sum_j w_j * local_j embedded at site j.  Equal weights take the collective path so
// that uniform and per-qubit inputs with equal values build identical matrices.
OperatorMatrix weighted_site_sum(const HilbertLayout& layout, const Matrix& local,
                                 const std::vector<double>& weights) {
  const bool uniform = std::all_of(weights.begin(), weights.end(),
                                   [&](double w) { return w == weights.front(); });
  OperatorMatrix acc = OperatorMatrix::zero(layout);
  if (uniform) {
    for (int j = 0; j < layout.n_sites(); ++j) acc = acc + embed_site_op(layout, j, local);
    return Complex(weights.front()) * acc;
  }
  for (int j = 0; j < layout.n_sites(); ++j) {
    acc = acc + Complex(weights[static_cast<std::size_t>(j)]) * embed_site_op(layout, j, local);
  }
  return acc;
}

std::vector<double> eta_list(const SimParams& params) {
  std::vector<double> out(static_cast<std::size_t>(params.n_qubits));
  for (int j = 0; j < params.n_qubits; ++j) out[static_cast<std::size_t>(j)] = params.eta_of(j);
  return out;
}

// op * e^{-i(delta t - phi) + i w t} + h.c.
void add_rotating_pair(std::vector<RecipeTerm>& terms, const OperatorMatrix& op, Complex scale,
                       double delta, double phi, double extra_freq) {
  Envelope env = [=](double t) { return scale * std::exp(-kImag * (delta * t - phi - extra_freq * t)); };
  Envelope env_conj = [=](double t) { return std::conj(scale * std::exp(-kImag * (delta * t - phi - extra_freq * t))); };
  terms.push_back({op, std::move(env)});
  terms.push_back({op.adjoint(), std::move(env_conj)});
}

Complex constant_one(double) { return {1.0, 0.0}; }

void require_qubits(const SimParams& params) {
  if (params.n_qubits < 1) throw DimensionError("n_qubits must be >= 1");
  if (!params.eta_per_qubit.empty() &&
      static_cast<int>(params.eta_per_qubit.size()) != params.n_qubits) {
    throw DimensionError("eta_per_qubit must list one value per qubit");
  }
}

}  // namespace

const LambdaSite& LambdaParams::site(int j) const {
  if (sites.empty()) throw PhysicsError("lambda parameters list no sites");
  if (sites.size() == 1) return sites.front();
  if (j < 0 || j >= static_cast<int>(sites.size())) throw DimensionError("lambda site index out of range");
  return sites[static_cast<std::size_t>(j)];
}

LambdaParams LambdaParams::from_detunings(double G, double Omega_L, double Delta, double delta,
                                          double omega_c) {
  LambdaSite s;
  s.G = G;
  s.Omega_L = Omega_L;
  s.omega_10 = 0.0;
  s.omega_e0 = omega_c + Delta;
  s.omega_L = omega_c - delta;
  return {omega_c, {s}};
}

double SimParams::eta_of(int j) const {
  if (eta_per_qubit.empty()) return eta;
  return eta_per_qubit.at(static_cast<std::size_t>(j));
}

bool SimParams::uniform_eta() const {
  return std::all_of(eta_per_qubit.begin(), eta_per_qubit.end(), [&](double e) { return e == eta; });
}

void SimParams::validate() const {
  if (n_qubits < 1) throw PhysicsError("N must be >= 1");
  if (n_max < 1) throw PhysicsError("n_max must be >= 1");
  if (!(delta > 0.0)) {
    throw PhysicsError("delta must be > 0 (negative or zero Raman detuning is outside the supported "
                       "delta > 0 restriction); got " + std::to_string(delta));
  }
  if (!(eta > 0.0)) throw PhysicsError("eta must be > 0");
  if (!(Omega >= 0.0)) throw PhysicsError("Omega must be >= 0");
  if (!(n_bar >= 0.0)) throw PhysicsError("n_bar must be >= 0");
  if (!eta_per_qubit.empty()) {
    if (static_cast<int>(eta_per_qubit.size()) != n_qubits) {
      throw PhysicsError("eta_per_qubit must list one value per qubit");
    }
    for (double e : eta_per_qubit) {
      if (!(e > 0.0)) throw PhysicsError("every eta_j must be > 0");
    }
  }
}

HamiltonianRecipe::HamiltonianRecipe(HilbertLayout layout, std::string label, std::vector<RecipeTerm> terms)
    : layout_(layout), label_(std::move(label)), terms_(std::move(terms)) {
  for (const RecipeTerm& term : terms_) {
    if (!(term.op.layout() == layout_)) throw DimensionError("recipe term acts on a different layout");
    if (!term.envelope) throw PhysicsError("recipe term has no envelope");
  }
}

Matrix HamiltonianRecipe::at(double t) const {
  Matrix h = Matrix::Zero(layout_.dim(), layout_.dim());
  for (const RecipeTerm& term : terms_) h += term.envelope(t) * term.op.matrix();
  return h;
}

double HamiltonianRecipe::hermiticity_defect(double t) const {
  const Matrix h = at(t);
  return max_abs(h - h.adjoint()) / std::max(1.0, max_abs(h));
}

void HamiltonianRecipe::require_hermitian(double t) const {
  const double defect = hermiticity_defect(t);
  if (defect > 1e-12) {
    throw PhysicsError(label_ + " is not Hermitian at t = " + std::to_string(t) +
                       " (relative defect " + std::to_string(defect) + ")");
  }
}

HamiltonianRecipe HamiltonianRecipe::sum(const HamiltonianRecipe& lhs, const HamiltonianRecipe& rhs,
                                         std::string label) {
  if (!(lhs.layout_ == rhs.layout_)) throw DimensionError("recipes act on different layouts");
  std::vector<RecipeTerm> terms = lhs.terms_;
  terms.insert(terms.end(), rhs.terms_.begin(), rhs.terms_.end());
  return {lhs.layout_, std::move(label), std::move(terms)};
}

std::vector<double> effective_eta(const SimParams& params) {
  if (!params.lambda) throw PhysicsError("effective_eta requires lambda-level parameters");
  std::vector<double> out;
  for (int j = 0; j < params.n_qubits; ++j) {
    const LambdaSite& s = params.lambda->site(j);
    const double big = params.lambda->Delta(j);
    const double small = params.lambda->delta(j);
    if (big == 0.0 || big + small == 0.0) {
      throw PhysicsError("effective coupling is singular for site " + std::to_string(j) +
                         ": Delta = " + std::to_string(big) + ", Delta + delta = " + std::to_string(big + small));
    }
    out.push_back(s.G * s.Omega_L * (1.0 / (big + small) + 1.0 / big));
  }
  return out;
}

HamiltonianRecipe build_lambda_hamiltonian(const SimParams& params) {
  if (!params.lambda) throw PhysicsError("lambda-level parameters are missing");
  const HilbertLayout layout = HilbertLayout::lambda_sites(params.n_qubits, params.n_max);
  const FockOperators fock = fock_ops(layout);

  Matrix e0 = Matrix::Zero(3, 3);
  e0(2, 0) = 1.0;
  Matrix e1 = Matrix::Zero(3, 3);
  e1(2, 1) = 1.0;

  std::vector<RecipeTerm> terms;
  const double phi = params.phi;
  for (int j = 0; j < params.n_qubits; ++j) {
    const LambdaSite& s = params.lambda->site(j);
    const double big = params.lambda->Delta(j);
    const double small = params.lambda->delta(j);

    // G a |e><0|: cavity at omega_c, |e><0| at omega_e0
    const OperatorMatrix cav = fock.a * embed_site_op(layout, j, e0);
    const Complex g = s.G;
    terms.push_back({cav, [=](double t) { return g * std::exp(kImag * (big * t)); }});
    terms.push_back({cav.adjoint(), [=](double t) { return std::conj(g * std::exp(kImag * (big * t))); }});

    // Omega_L e^{-i(omega_L t + phi)} |e><1|: |e><1| at omega_e0 - omega_10
    const OperatorMatrix laser = embed_site_op(layout, j, e1);
    const Complex w = s.Omega_L;
    const double freq = big + small;
    terms.push_back({laser, [=](double t) { return w * std::exp(kImag * (freq * t - phi)); }});
    terms.push_back({laser.adjoint(), [=](double t) { return std::conj(w * std::exp(kImag * (freq * t - phi))); }});
  }
  return {layout, "lambda", std::move(terms)};
}

HamiltonianRecipe build_raman_hamiltonian(const SimParams& params, double phi) {
  require_qubits(params);
  const HilbertLayout layout = params.layout();
  const FockOperators fock = fock_ops(layout);
  const OperatorMatrix coupling = fock.a * weighted_site_sum(layout, pauli::raising(), eta_list(params));
  std::vector<RecipeTerm> terms;
  add_rotating_pair(terms, coupling, 1.0, params.delta, phi, 0.0);
  return {layout, "raman", std::move(terms)};
}

HamiltonianRecipe build_driven_hamiltonian(const SimParams& params, double phi) {
  HamiltonianRecipe raman = build_raman_hamiltonian(params, phi);
  if (params.Omega == 0.0) return {raman.layout(), "driven", raman.terms()};
  std::vector<RecipeTerm> terms = raman.terms();
  terms.push_back({Complex(params.Omega) * collective_jx(raman.layout()), constant_one});
  return {raman.layout(), "driven", std::move(terms)};
}

HamiltonianRecipe build_effective_hamiltonian(const SimParams& params, double phi) {
  require_qubits(params);
  const HilbertLayout layout = params.layout();
  const FockOperators fock = fock_ops(layout);
  const OperatorMatrix coupling = fock.a * weighted_site_sum(layout, 0.5 * pauli::x(), eta_list(params));
  std::vector<RecipeTerm> terms;
  add_rotating_pair(terms, coupling, 1.0, params.delta, phi, 0.0);
  return {layout, "effective", std::move(terms)};
}

HamiltonianRecipe build_neglected_terms(const SimParams& params, double phi) {
  require_qubits(params);
  const HilbertLayout layout = params.layout();
  const FockOperators fock = fock_ops(layout);
  const std::vector<double> etas = eta_list(params);
  // s+ = (sigma_x + |+><-| - |-><+|) / 2 in the sigma_x eigenbasis; the rotating frame
  // dresses |+><-| with e^{i Omega t} and |-><+| with e^{-i Omega t}.
  const Matrix pm = pauli::plus_minus();
  const OperatorMatrix up = fock.a * weighted_site_sum(layout, 0.5 * pm, etas);
  const OperatorMatrix down = fock.a * weighted_site_sum(layout, 0.5 * Matrix(pm.adjoint()), etas);
  std::vector<RecipeTerm> terms;
  add_rotating_pair(terms, up, 1.0, params.delta, phi, params.Omega);
  add_rotating_pair(terms, down, -1.0, params.delta, phi, -params.Omega);
  return {layout, "neglected", std::move(terms)};
}

HamiltonianRecipe build_rotated_hamiltonian(const SimParams& params, double phi) {
  require_qubits(params);
  const HilbertLayout layout = params.layout();
  const FockOperators fock = fock_ops(layout);
  const std::vector<double> etas = eta_list(params);
  // s+ = |1><0| = (sx - i sy) / 2, so
  // e^{i Omega t sx/2} s+ e^{-i Omega t sx/2} = (sx - i cos(Omega t) sy + i sin(Omega t) sz) / 2
  const OperatorMatrix ax = fock.a * weighted_site_sum(layout, 0.5 * pauli::x(), etas);
  const OperatorMatrix ay = fock.a * weighted_site_sum(layout, 0.5 * pauli::y(), etas);
  const OperatorMatrix az = fock.a * weighted_site_sum(layout, 0.5 * pauli::z(), etas);
  const double delta = params.delta;
  const double omega = params.Omega;
  const auto carrier = [=](double t) { return std::exp(-kImag * (delta * t - phi)); };

  std::vector<RecipeTerm> terms;
  const auto add = [&](const OperatorMatrix& op, std::function<Complex(double)> env) {
    terms.push_back({op, env});
    terms.push_back({op.adjoint(), [env](double t) { return std::conj(env(t)); }});
  };
  add(ax, [=](double t) { return carrier(t); });
  add(ay, [=](double t) { return -kImag * std::cos(omega * t) * carrier(t); });
  add(az, [=](double t) { return kImag * std::sin(omega * t) * carrier(t); });
  return {layout, "rotated", std::move(terms)};
}

}  // namespace nvghz
