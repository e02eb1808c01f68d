#include "nvghz/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/QR>
#include <Eigen/SparseCore>

namespace nvghz {

namespace {

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

// x wrapped into [-period/2, period/2)
double wrap(double x, double period) {
  return x - period * std::floor((x + 0.5 * period) / period);
}

// Squared J_x eigenvalue of each Hadamard-basis spin index (bit 0 = |+>).
std::vector<double> jx_squared_spectrum(int n_qubits) {
  std::vector<double> out;
  const int sd = 1 << n_qubits;
  for (int b = 0; b < sd; ++b) {
    const double m = 0.5 * n_qubits - __builtin_popcount(static_cast<unsigned>(b));
    out.push_back(m * m);
  }
  return out;
}

Matrix hadamard_transform(int n_qubits) {
  Matrix h(2, 2);
  h << 1.0, 1.0, 1.0, -1.0;
  h /= std::sqrt(2.0);
  Matrix v = h;
  for (int j = 1; j < n_qubits; ++j) v = kron(v, h);
  return v;
}

using SparseOp = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

// H(t) v with the recipe's constant operators held sparse.
class SparseHamiltonian {
 public:
  explicit SparseHamiltonian(const HamiltonianRecipe& recipe) {
    for (const RecipeTerm& term : recipe.terms()) {
      SparseOp op = term.op.matrix().sparseView(Complex(0.0), 0.0);
      op.makeCompressed();
      ops_.push_back(std::move(op));
      envelopes_.push_back(term.envelope);
    }
  }

  Vector apply(double t, const Vector& v) const {
    Vector out = Vector::Zero(v.size());
    for (std::size_t i = 0; i < ops_.size(); ++i) out.noalias() += envelopes_[i](t) * (ops_[i] * v);
    return out;
  }

 private:
  std::vector<SparseOp> ops_;
  std::vector<Envelope> envelopes_;
};

}  // namespace

const char* to_string(SourceModel source) {
  return source == SourceModel::FullDriven ? "full" : "effective";
}

const char* to_string(CavityDisposal disposal) {
  return disposal == CavityDisposal::Trace ? "trace" : "project";
}

double PulseSchedule::total_duration() const {
  double total = 0.0;
  for (const PulseSegment& s : segments) total += s.duration;
  return total;
}

bool PulseSchedule::is_echo() const {
  return segments.size() == 2 && segments[0].duration == segments[1].duration &&
         std::abs(wrap(segments[1].phi - segments[0].phi - kPi, kTwoPi)) < 1e-12;
}

void PulseSchedule::validate() const {
  if (segments.empty()) throw PhysicsError("pulse schedule has no segments");
  for (const PulseSegment& s : segments) {
    if (!(s.duration > 0.0)) throw PhysicsError("segment durations must be > 0");
  }
}

PulseSchedule echo_schedule(double total_t, SourceModel source) {
  if (!(total_t > 0.0)) throw PhysicsError("echo schedule requires total_t > 0");
  return {{{source, 0.0, 0.5 * total_t}, {source, kPi, 0.5 * total_t}}};
}

PulseSchedule single_phase_schedule(double total_t, SourceModel source, double phi) {
  if (!(total_t > 0.0)) throw PhysicsError("schedule requires total_t > 0");
  return {{{source, phi, total_t}}};
}

HamiltonianRecipe segment_recipe(const SimParams& params, const PulseSegment& segment) {
  return segment.source == SourceModel::FullDriven ? build_driven_hamiltonian(params, segment.phi)
                                                   : build_effective_hamiltonian(params, segment.phi);
}

TrajectoryResult run_schedule(const SimParams& params, const PulseSchedule& schedule,
                              const InitialCondition& initial, const PropagationSettings& settings,
                              const std::vector<double>& record_times) {
  schedule.validate();
  const Matrix gram0 = initial.columns().adjoint() * initial.columns();
  const double total = schedule.total_duration();

  TrajectoryResult out;
  out.has_propagator = initial.kind() == InitialCondition::Kind::Identity;
  std::vector<double> pending = record_times;
  std::sort(pending.begin(), pending.end());
  std::size_t next = 0;
  if (next < pending.size() && pending[next] <= 0.0) {
    out.times.push_back(0.0);
    out.snapshots.push_back(initial.columns());
    out.top_fock_population.push_back(0.0);
    while (next < pending.size() && pending[next] <= 0.0) ++next;
  }

  Matrix y = initial.columns();
  double start = 0.0;
  for (std::size_t seg = 0; seg < schedule.segments.size(); ++seg) {
    const PulseSegment& segment = schedule.segments[seg];
    const bool last = seg + 1 == schedule.segments.size();
    const double end = last ? total : start + segment.duration;

    std::vector<double> local;
    std::vector<double> absolute;
    while (next < pending.size() && (pending[next] <= end || last)) {
      const double when = std::min(pending[next], end);
      local.push_back(std::clamp(when - start, 0.0, end - start));
      absolute.push_back(when);
      ++next;
    }

    const HamiltonianRecipe recipe = segment_recipe(params, segment);
    const TrajectoryResult part =
        propagate(recipe, InitialCondition::kets(initial.layout(), y), 0.0, end - start, settings, local);

    // part records every (distinct) local time plus the segment end
    for (std::size_t i = 0; i < local.size(); ++i) {
      const auto it = std::lower_bound(part.times.begin(), part.times.end(), local[i]);
      const auto idx = static_cast<std::size_t>(it - part.times.begin());
      out.times.push_back(absolute[i]);
      out.snapshots.push_back(part.snapshots[idx]);
      out.top_fock_population.push_back(part.top_fock_population[idx]);
    }
    out.steps_accepted += part.steps_accepted;
    out.steps_rejected += part.steps_rejected;
    y = part.final_columns();
    start = end;
  }

  if (out.times.empty() || out.times.back() != total) {
    out.times.push_back(total);
    out.snapshots.push_back(y);
    const HilbertLayout& layout = initial.layout();
    double top = 0.0;
    const int f = layout.fock_dim();
    for (int s = 0; s < layout.spin_dim(); ++s) top += y.row(s * f + f - 1).squaredNorm();
    out.top_fock_population.push_back(y.squaredNorm() > 0.0 ? top / y.squaredNorm() : 0.0);
  }

  bool warned_fock = false;
  for (std::size_t i = 0; i < out.snapshots.size(); ++i) {
    const double defect = max_abs(out.snapshots[i].adjoint() * out.snapshots[i] - gram0);
    out.norm_defect.push_back(defect);
    if (defect > settings.norm_tolerance && !out.failed) {
      out.failed = true;
      out.warnings.push_back("norm deviation " + fmt("%.3e", defect) + " exceeds " +
                             fmt("%.1e", settings.norm_tolerance) + " at t = " + fmt("%.6g", out.times[i]) + " ns");
    }
    const double top = out.top_fock_population[i];
    if (!out.has_propagator && top > settings.top_fock_alarm && !warned_fock) {
      warned_fock = true;
      out.warnings.push_back("truncation alarm: population of |n_max> reached " + fmt("%.3e", top) +
                             " at t = " + fmt("%.6g", out.times[i]) + " ns; increase n_max");
    }
  }
  return out;
}

double gamma_of(double t, double eta, double delta) {
  if (delta == 0.0) throw PhysicsError("gamma_of requires delta != 0");
  return (eta * eta / delta) * (2.0 / delta * std::sin(0.5 * delta * t) - t);
}

double single_phase_angle(double t, double eta, double delta) {
  if (delta == 0.0) throw PhysicsError("single_phase_angle requires delta != 0");
  return (eta * eta / delta) * (t - std::sin(delta * t) / delta);
}

Vector gate_ghz_state(int n_qubits, bool odd_correction) {
  if (n_qubits < 1) throw DimensionError("gate_ghz_state requires N >= 1");
  const int sd = 1 << n_qubits;
  const Matrix jx = spin_jx(n_qubits);
  Vector zero = Vector::Zero(sd);
  zero(0) = 1.0;
  Vector out = unitary_exp(jx * jx, -kPi / 2.0) * zero;  // exp(i pi/2 J_x^2)
  if (odd_correction && n_qubits % 2 == 1) out = unitary_exp(jx, kPi / 2.0) * out;  // exp(-i pi/2 J_x)
  // the exact amplitudes are 0 or modulus 1/sqrt(2); drop eigensolver dust
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (std::abs(out(i)) < 1e-12) out(i) = 0.0;
  }
  return out / out.norm();
}

Vector ghz_target(int n_qubits) {
  if (n_qubits < 2) throw DimensionError("ghz_target requires N >= 2");
  if (n_qubits % 2 == 1) return gate_ghz_state(n_qubits, true);
  const int sd = 1 << n_qubits;
  Vector out = Vector::Zero(sd);
  out(0) = std::exp(-kImag * (kPi / 4.0)) / std::sqrt(2.0);
  out(sd - 1) = std::exp(kImag * (kPi * (0.25 + 0.5 * n_qubits))) / std::sqrt(2.0);
  return out;
}

double fidelity(const Vector& state, const Vector& target) {
  if (state.size() != target.size()) throw DimensionError("state and target differ in dimension");
  return std::norm(target.dot(state));
}

double fidelity(const HilbertLayout& layout, const Matrix& kets, const Vector& target, CavityDisposal disposal,
                const std::vector<int>& column_fock) {
  if (target.size() != layout.spin_dim()) throw DimensionError("target does not match the spin register");
  if (kets.rows() != layout.dim()) throw DimensionError("ket block does not match layout");
  if (disposal == CavityDisposal::Trace) {
    const Matrix rho = trace_out_cavity(layout, kets);
    return std::real(target.dot(rho * target));
  }
  if (static_cast<Eigen::Index>(column_fock.size()) != kets.cols()) {
    throw DimensionError("projection needs the initial Fock level of every column");
  }
  double total = 0.0;
  for (Eigen::Index c = 0; c < kets.cols(); ++c) {
    const int n = column_fock[static_cast<std::size_t>(c)];
    Complex overlap = 0.0;
    for (int s = 0; s < layout.spin_dim(); ++s) overlap += std::conj(target(s)) * kets(layout.index(s, n), c);
    total += std::norm(overlap);
  }
  return total;
}

double infidelity_xi(int n_qubits, double eta, double Omega) {
  if (!(Omega > 0.0)) throw PhysicsError("infidelity model requires Omega > 0");
  return n_qubits * (n_qubits - 1) * eta * eta / (8.0 * Omega * Omega);
}

double infidelity_model(int n_qubits, double eta, double Omega, double t) {
  return infidelity_xi(n_qubits, eta, Omega) * (1.0 - std::cos(2.0 * Omega * t));
}

double composite_fidelity(double overlap, double f_in) {
  return std::clamp(overlap * (1.0 - f_in), 0.0, 1.0);
}

CommensurabilityResult commensurability_check(double delta, double Omega, double t) {
  if (delta < 0.0 || Omega < 0.0) throw PhysicsError("commensurability check needs non-negative frequencies");
  CommensurabilityResult r;
  const double dphase = delta * t;
  const double ophase = Omega * t;
  r.delta_residual = wrap(dphase, kTwoPi);
  r.omega_residual = wrap(ophase, 2.0 * kTwoPi);
  r.delta_ok = std::abs(r.delta_residual) <= 1e-9 * std::max(1.0, dphase);
  r.omega_ok = std::abs(r.omega_residual) <= 1e-9 * std::max(1.0, ophase);
  return r;
}

double fit_jx2_angle(const Matrix& q, int n_qubits) {
  const int sd = 1 << n_qubits;
  if (q.rows() != sd || q.cols() != sd) throw DimensionError("fit needs a spin-register matrix");
  if (n_qubits < 2) return 0.0;  // J_x^2 is proportional to the identity

  const Matrix v = hadamard_transform(n_qubits);
  const Matrix qh = v.adjoint() * q * v;
  const std::vector<double> msq = jx_squared_spectrum(n_qubits);
  const auto score = [&](double theta) {
    Complex acc = 0.0;
    for (int b = 0; b < sd; ++b) acc += std::exp(-kImag * (theta * msq[static_cast<std::size_t>(b)])) * qh(b, b);
    return std::abs(acc);
  };

  constexpr int kGrid = 1440;
  double best_theta = 0.0;
  double best = -1.0;
  for (int i = 0; i < kGrid; ++i) {
    const double theta = -kPi + kTwoPi * (i + 1) / kGrid;
    const double s = score(theta);
    if (s > best) {
      best = s;
      best_theta = theta;
    }
  }
  // golden-section maximization on the bracketing grid cell pair
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = best_theta - kTwoPi / kGrid;
  double hi = best_theta + kTwoPi / kGrid;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = score(x1);
  double f2 = score(x2);
  for (int iter = 0; iter < 100; ++iter) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = score(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = score(x2);
    }
  }
  double theta = 0.5 * (lo + hi);
  // Newton polish on d|acc|^2/dtheta; golden section alone stalls near sqrt(eps)
  for (int iter = 0; iter < 4; ++iter) {
    Complex a0 = 0.0, a1 = 0.0, a2 = 0.0;
    for (int b = 0; b < sd; ++b) {
      const double m2 = msq[static_cast<std::size_t>(b)];
      const Complex term = std::exp(-kImag * (theta * m2)) * qh(b, b);
      a0 += term;
      a1 += -kImag * m2 * term;
      a2 += -m2 * m2 * term;
    }
    const double d1 = 2.0 * std::real(std::conj(a0) * a1);
    const double d2 = 2.0 * std::real(std::conj(a1) * a1 + std::conj(a0) * a2);
    if (d2 >= 0.0) break;
    const double step = -d1 / d2;
    if (std::abs(step) > kTwoPi / kGrid) break;
    theta += step;
  }
  if (n_qubits % 2 == 1) {
    theta = wrap(theta, kPi);
    if (theta <= -0.5 * kPi + 1e-12) theta = 0.5 * kPi;
  } else {
    theta = wrap(theta, kTwoPi);
    if (theta <= -kPi + 1e-12) theta = kPi;
  }
  return theta;
}

std::vector<double> single_qubit_purities(const Matrix& rho_spin, int n_qubits) {
  const int sd = 1 << n_qubits;
  if (rho_spin.rows() != sd || rho_spin.cols() != sd) throw DimensionError("purity needs a spin-register matrix");
  std::vector<double> out;
  for (int j = 0; j < n_qubits; ++j) {
    const int bit = 1 << (n_qubits - 1 - j);
    Matrix r = Matrix::Zero(2, 2);
    for (int row = 0; row < sd; ++row) {
      for (int col = 0; col < sd; ++col) {
        if ((row & ~bit) != (col & ~bit)) continue;
        r((row & bit) ? 1 : 0, (col & bit) ? 1 : 0) += rho_spin(row, col);
      }
    }
    out.push_back(std::real((r * r).trace()));
  }
  return out;
}

Matrix apply_spin_operator(const HilbertLayout& layout, const Matrix& spin_op, const Matrix& kets) {
  if (spin_op.rows() != layout.spin_dim() || spin_op.cols() != layout.spin_dim()) {
    throw DimensionError("spin operator does not match the spin register");
  }
  const int f = layout.fock_dim();
  const int sd = layout.spin_dim();
  Matrix out(kets.rows(), kets.cols());
  for (Eigen::Index c = 0; c < kets.cols(); ++c) {
    Eigen::Map<const Matrix> in(kets.col(c).data(), f, sd);
    Eigen::Map<Matrix> res(out.col(c).data(), f, sd);
    res.noalias() = in * spin_op.transpose();
  }
  return out;
}

GateReport run_ghz_protocol(const SimParams& params, SourceModel source, const PropagationSettings& settings,
                            const ProtocolOptions& options) {
  params.validate();
  if (options.k < 1) throw PhysicsError("closure index k must be >= 1");
  if (options.samples < 2) throw PhysicsError("protocol needs at least 2 samples");

  const int n = params.n_qubits;
  const HilbertLayout layout = params.layout();
  const double total = kTwoPi * options.k / params.delta;

  GateReport report;
  report.n_qubits = n;
  report.source = source;
  report.disposal = options.disposal;
  report.echo = options.echo;
  report.k = options.k;
  report.total_time = total;
  report.n_bar = params.n_bar;

  if (!params.uniform_eta()) report.warnings.push_back("non-uniform eta_j: phase compensation not applied");
  const double drive = source == SourceModel::FullDriven ? params.Omega : 0.0;
  report.commensurability = commensurability_check(params.delta, params.Omega, total);
  if (params.Omega > 0.0 && !report.commensurability.omega_ok) {
    report.warnings.push_back("commensurability: Omega t = " + fmt("%.12g", params.Omega * total) +
                              " is not a multiple of 4 pi (Omega/delta = " + fmt("%.12g", params.Omega / params.delta) +
                              " should be an even integer)");
  }
  report.gamma_formula = options.echo ? gamma_of(total, params.eta, params.delta)
                                      : single_phase_angle(total, params.eta, params.delta);
  if (std::abs(std::abs(report.gamma_formula) - 0.5 * kPi) > 1e-6) {
    report.warnings.push_back("gate angle |gamma| = " + fmt("%.12g", std::abs(report.gamma_formula)) +
                              " differs from pi/2; delta = 2 sqrt(k) eta is not satisfied");
  }

  // initial ensemble |0...0> (x) cavity
  Matrix columns;
  std::vector<int> column_fock;
  if (params.n_bar > 0.0) {
    const ThermalWeights tw = thermal_weights(params.n_bar, layout.fock_dim());
    std::vector<int> levels;
    for (int m = 0; m < layout.fock_dim(); ++m) {
      if (tw.weights[static_cast<std::size_t>(m)] > 0.0) levels.push_back(m);
    }
    columns = Matrix::Zero(layout.dim(), static_cast<Eigen::Index>(levels.size()));
    for (std::size_t c = 0; c < levels.size(); ++c) {
      columns(layout.index(0, levels[c]), static_cast<Eigen::Index>(c)) =
          std::sqrt(tw.weights[static_cast<std::size_t>(levels[c])]);
    }
    column_fock = levels;
  } else {
    if (options.initial_fock < 0 || options.initial_fock >= layout.fock_dim()) {
      throw DimensionError("initial Fock level outside the truncated ladder");
    }
    columns = Matrix::Zero(layout.dim(), 1);
    columns(layout.index(0, options.initial_fock), 0) = 1.0;
    column_fock = {options.initial_fock};
  }

  PulseSchedule schedule = options.echo ? echo_schedule(total, source) : single_phase_schedule(total, source);
  for (PulseSegment& s : schedule.segments) s.phi += params.phi;

  std::vector<double> record;
  for (int i = 0; i < options.samples; ++i) {
    record.push_back(i == options.samples - 1 ? total : total * i / (options.samples - 1));
  }
  const TrajectoryResult traj =
      run_schedule(params, schedule, InitialCondition::kets(layout, columns), settings, record);

  const Matrix jx = spin_jx(n);
  const bool odd = n >= 3 && n % 2 == 1;
  const Matrix fix = odd ? unitary_exp(jx, kPi / 2.0) : Matrix();
  Vector target;
  if (n >= 2) {
    target = gate_ghz_state(n, true);
  } else {
    target = Vector::Zero(2);
    target(0) = 1.0;
  }

  // lab -> frame rotating with Omega J_x, then the odd-N correction
  const auto to_readout = [&](double t, const Matrix& y) {
    Matrix out = drive > 0.0 ? apply_spin_operator(layout, unitary_exp(jx, -drive * t), y) : y;
    if (odd) out = apply_spin_operator(layout, fix, out);
    return out;
  };

  Matrix final_kets;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    const Matrix y = to_readout(t, traj.snapshots[i]);
    report.times.push_back(t);
    report.fidelity.push_back(fidelity(layout, y, target, options.disposal, column_fock));
    report.infidelity_model.push_back(params.Omega > 0.0 ? infidelity_model(n, params.eta, params.Omega, t) : 0.0);
    report.norm_defect.push_back(traj.norm_defect[i]);
    report.top_fock_population.push_back(traj.top_fock_population[i]);
    if (i + 1 == traj.times.size()) final_kets = y;
  }
  report.final_overlap = report.fidelity.back();
  if (n >= 2) {
    report.final_fidelity = report.final_overlap;
    report.final_fidelity_closed_form = fidelity(layout, final_kets, ghz_target(n), options.disposal, column_fock);
  }
  report.xi = params.Omega > 0.0 ? infidelity_xi(n, params.eta, params.Omega) : 0.0;
  report.composite = composite_fidelity(report.final_overlap, report.infidelity_model.back());
  report.purities = single_qubit_purities(trace_out_cavity(layout, final_kets), n);

  if (options.fit_angle && n >= 2) {
    const int sd = layout.spin_dim();
    const int n0 = options.initial_fock;
    Matrix block = Matrix::Zero(layout.dim(), sd);
    for (int s = 0; s < sd; ++s) block(layout.index(s, n0), s) = 1.0;
    const TrajectoryResult gate = run_schedule(params, schedule, InitialCondition::kets(layout, block), settings);
    Matrix y = gate.final_columns();
    if (drive > 0.0) y = apply_spin_operator(layout, unitary_exp(jx, -drive * total), y);
    Matrix q(sd, sd);
    for (int r = 0; r < sd; ++r) q.row(r) = y.row(layout.index(r, n0));
    report.gamma_fit = fit_jx2_angle(q, n);
  }

  report.failed = traj.failed;
  for (const std::string& w : traj.warnings) report.warnings.push_back(w);
  return report;
}

double optical_angular_frequency(double wavelength_nm) {
  if (!(wavelength_nm > 0.0)) throw PhysicsError("wavelength must be > 0");
  constexpr double kSpeedOfLight = 299792458.0;  // m/s
  // c / (lambda * 1e-9 m) in Hz, times 1e-9 s/ns
  return kTwoPi * kSpeedOfLight / wavelength_nm;
}

BudgetReport decoherence_budget(const SimParams& params) {
  if (!params.lambda) throw ConfigError("budget requires lambda-level parameters (G, Omega_L, Delta)");
  if (!params.gamma0) throw ConfigError("budget requires field 'gamma0'");
  if (!params.quality_factor) throw ConfigError("budget requires field 'quality_factor'");
  if (!(*params.quality_factor > 0.0)) throw PhysicsError("quality factor Q must be > 0");
  if (*params.gamma0 < 0.0) throw PhysicsError("gamma0 must be >= 0");

  BudgetReport b;
  if (params.wavelength_nm) {
    b.omega_c = optical_angular_frequency(*params.wavelength_nm);
  } else if (params.lambda->omega_c > 0.0) {
    b.omega_c = params.lambda->omega_c;
  } else {
    throw ConfigError("budget requires field 'wavelength_nm' or a positive 'omega_c'");
  }
  const LambdaSite& s = params.lambda->site(0);
  const double big = params.lambda->Delta(0);
  b.eta = effective_eta(params).front();
  b.eta_far_detuned = 2.0 * s.G * s.Omega_L / big;
  if (!(b.eta > 0.0)) throw PhysicsError("effective coupling must be > 0 for a gate time");
  b.gate_time = kPi / b.eta;
  b.gamma0 = *params.gamma0;
  b.gamma_eff = b.gamma0 * s.Omega_L * s.G / (big * big);
  b.quality_factor = *params.quality_factor;
  b.kappa = b.omega_c / b.quality_factor;
  b.gamma_time_n = b.gate_time * b.gamma_eff * params.n_qubits;
  b.kappa_time = b.gate_time * b.kappa * (params.n_bar + 1.0);
  return b;
}

double dyson_infidelity_oracle(const SimParams& params, double t, int steps_per_period) {
  if (!(params.delta > 0.0)) throw PhysicsError("Dyson oracle requires delta > 0");
  const CommensurabilityResult c = commensurability_check(params.delta, params.Omega, t);
  if (!(t > 0.0) || !c.delta_ok) {
    throw PhysicsError("Dyson oracle is defined only at closure times delta t = 2 n pi (residual " +
                       fmt("%.3e", c.delta_residual) + ")");
  }
  if (steps_per_period < 8) throw PhysicsError("steps_per_period must be >= 8");
  if (params.eta == 0.0) return 0.0;

  // Second order from the vacuum reaches at most two photons, so n_max = 2 is exact.
  SimParams small = params;
  small.n_max = 2;
  const HilbertLayout layout = small.layout();
  const SparseHamiltonian hn(build_neglected_terms(small, small.phi));

  // frozen reference: ideal gate output (x) vacuum
  Vector spin = Vector::Zero(layout.spin_dim());
  spin(0) = 1.0;
  if (small.n_qubits >= 2) spin = gate_ghz_state(small.n_qubits, false);
  Vector psi = Vector::Zero(layout.dim());
  for (int s = 0; s < layout.spin_dim(); ++s) psi(layout.index(s, 0)) = spin(s);

  const double fastest = std::max(small.delta, small.Omega + small.delta);
  const int steps = std::max(1, static_cast<int>(std::ceil(t * fastest / kTwoPi * steps_per_period)));
  const double h = t / steps;

  // first(t) = int_0^t H_n psi,  second(t) = -int_0^t H_n(s) first(s) ds
  Vector first = Vector::Zero(layout.dim());
  Vector second = Vector::Zero(layout.dim());
  for (int i = 0; i < steps; ++i) {
    const double t0 = h * i;
    const Vector f0 = hn.apply(t0, psi);
    const Vector fm = hn.apply(t0 + 0.5 * h, psi);
    const Vector f1 = hn.apply(t0 + h, psi);
    const Vector first_mid = first + (h / 24.0) * (5.0 * f0 + 8.0 * fm - f1);
    const Vector first_end = first + (h / 6.0) * (f0 + 4.0 * fm + f1);
    const Vector g0 = -hn.apply(t0, first);
    const Vector gm = -hn.apply(t0 + 0.5 * h, first_mid);
    const Vector g1 = -hn.apply(t0 + h, first_end);
    second += (h / 6.0) * (g0 + 4.0 * gm + g1);
    first = first_end;
  }
  const Complex u1 = -kImag * psi.dot(first);
  const Complex u2 = psi.dot(second);
  return -2.0 * std::real(u2) - std::norm(u1);
}

RamanFit raman_oscillation_fit(const SimParams& params, double duration, int samples) {
  if (!params.lambda) throw ConfigError("Raman fit requires lambda-level parameters (G, Omega_L, Delta)");
  if (!(duration > 0.0)) throw PhysicsError("Raman fit requires duration > 0");
  if (samples < 16) throw PhysicsError("Raman fit needs at least 16 samples");

  SimParams single = params;
  single.n_qubits = 1;
  single.n_max = 2;
  single.eta_per_qubit.clear();
  const HamiltonianRecipe recipe = build_lambda_hamiltonian(single);
  const HilbertLayout& layout = recipe.layout();

  const LambdaSite& s = params.lambda->site(0);
  const double fastest = std::abs(params.lambda->Delta(0)) + std::abs(params.lambda->delta(0)) +
                         std::sqrt(2.0) * std::abs(s.G) + std::abs(s.Omega_L);
  PropagationSettings settings;
  settings.max_step = kTwoPi / fastest / 20.0;

  Matrix start = Matrix::Zero(layout.dim(), 1);
  start(layout.index(0, 1), 0) = 1.0;
  std::vector<double> record;
  for (int i = 0; i < samples; ++i) record.push_back(duration * i / (samples - 1));
  const TrajectoryResult traj = propagate(recipe, InitialCondition::kets(layout, start), 0.0, duration, settings, record);

  RamanFit fit;
  fit.times = traj.times;
  for (const Matrix& y : traj.snapshots) {
    double p = 0.0;
    for (int n = 0; n < layout.fock_dim(); ++n) p += std::norm(y(layout.index(1, n), 0));
    fit.population.push_back(p);
  }

  const std::size_t m = fit.times.size();
  // least-squares residual of a + b cos(wt) + c sin(wt) at fixed w
  const auto solve = [&](double w, Eigen::Vector3d& coef) {
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(m), 3);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      basis(r, 0) = 1.0;
      basis(r, 1) = std::cos(w * fit.times[i]);
      basis(r, 2) = std::sin(w * fit.times[i]);
      rhs(r) = fit.population[i];
    }
    coef = basis.colPivHouseholderQr().solve(rhs);
    return (basis * coef - rhs).squaredNorm();
  };

  // scan up to a quarter of the sampling rate, then refine the best cell
  const double w_max = 0.25 * kPi * (samples - 1) / duration;
  const double w_min = kPi / duration;
  constexpr int kGrid = 2000;
  Eigen::Vector3d coef;
  double best_w = w_min;
  double best = solve(w_min, coef);
  for (int i = 1; i <= kGrid; ++i) {
    const double w = w_min + (w_max - w_min) * i / kGrid;
    const double r = solve(w, coef);
    if (r < best) {
      best = r;
      best_w = w;
    }
  }
  constexpr double kInvPhi = 0.6180339887498949;
  const double cell = (w_max - w_min) / kGrid;
  double lo = std::max(w_min, best_w - cell);
  double hi = best_w + cell;
  for (int iter = 0; iter < 80; ++iter) {
    const double x1 = hi - kInvPhi * (hi - lo);
    const double x2 = lo + kInvPhi * (hi - lo);
    if (solve(x1, coef) < solve(x2, coef)) {
      hi = x2;
    } else {
      lo = x1;
    }
  }
  fit.frequency = 0.5 * (lo + hi);
  fit.rms_residual = std::sqrt(solve(fit.frequency, coef) / static_cast<double>(m));
  fit.offset = coef(0);
  fit.amplitude = std::hypot(coef(1), coef(2));
  return fit;
}

}  // namespace nvghz
