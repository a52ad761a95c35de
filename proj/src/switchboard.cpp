#include "qswitch/switchboard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace qswitch {

std::string party_name(Party p) {
  switch (p) {
    case Party::Alice: return "Alice";
    case Party::Bob: return "Bob";
    case Party::Charlene: return "Charlene";
    case Party::Dick: return "Dick";
  }
  return "?";
}

std::optional<Party> parse_party(std::string_view name) {
  for (Party p : kAllParties) {
    if (party_name(p) == name) return p;
  }
  return std::nullopt;
}

std::string route_name(Route r) { return r == Route::ToBob ? "to_Bob" : "to_Charlene"; }

std::optional<Route> parse_route(std::string_view name) {
  if (name == "to_Bob" || name == "bob") return Route::ToBob;
  if (name == "to_Charlene" || name == "charlene") return Route::ToCharlene;
  return std::nullopt;
}

namespace switchboard {

namespace {

Vector kron_vec(const Vector& left, const Vector& right) {
  Vector out(left.size() * right.size());
  for (Eigen::Index i = 0; i < left.size(); ++i) {
    out.segment(i * right.size(), right.size()) = left[i] * right;
  }
  return out;
}

// Pairs of the 4-qubit state written as the product-slot permutation that
// sends tensor(bell, bell) slots 0..3 onto them.
std::array<int, 4> pair_permutation(const std::array<std::array<int, 2>, 2>& pairs) {
  return {pairs[0][0], pairs[0][1], pairs[1][0], pairs[1][1]};
}

Matrix singlet_projector() {
  const Vector s = bell_state(kSinglet).amplitudes();
  return s * s.adjoint();
}

std::array<StateVector, 3> correction_probes() {
  return {state_from_bloch(0.3, 0.7), state_from_bloch(1.9, 2.6), state_from_bloch(2.4, 5.1)};
}

BellMeasureMode to_bell_mode(const StepMode& mode) {
  return std::visit([](const auto& m) -> BellMeasureMode { return m; }, mode);
}

}  // namespace

int register_slot(Party p) {
  switch (p) {
    case Party::Alice: return 1;
    case Party::Bob: return 2;
    case Party::Dick: return 3;
    case Party::Charlene: return 4;
  }
  throw DomainError("register_slot: unknown party");
}

double Lambda::value(BellIndex kl) {
  static constexpr std::array<double, 4> values = {-1.0, 1.0, 1.0, 3.0};  // 00, 01, 10, 11
  return values[static_cast<std::size_t>(kl.ordinal())];
}

double Lambda::normalizer() { return 1.0 / (2.0 * std::sqrt(3.0)); }

SwitchboardState::SwitchboardState(StateVector state) : state_(std::move(state)) {
  if (state_.n_qubits() != 4) throw ContractError("SwitchboardState: expects four qubits");
}

SwitchboardState build_switchboard() {
  const StateVector singlet = bell_state(kSinglet);
  const StateVector pairs_12_34 = tensor(singlet, singlet);
  // Qubits 1..4 are slots 0..3; singlets on (1,4) and (2,3).
  constexpr std::array<int, 4> to_14_23 = {0, 3, 1, 2};
  const StateVector pairs_14_23 = permute_qubits(pairs_12_34, to_14_23);
  Vector psi = (pairs_12_34.amplitudes() - pairs_14_23.amplitudes()) / std::sqrt(3.0);
  return SwitchboardState(StateVector(4, std::move(psi)));
}

std::string pairing_name(Pairing p) { return p == Pairing::AliceBob ? "12|34" : "13|24"; }

std::array<std::array<int, 2>, 2> pairing_slots(Pairing p) {
  if (p == Pairing::AliceBob) return {{{0, 1}, {2, 3}}};
  return {{{0, 3}, {2, 1}}};
}

Vector decomposition_expansion(Pairing p, const std::array<Complex, 4>& coefficients) {
  const auto perm = pair_permutation(pairing_slots(p));
  Vector out = Vector::Zero(16);
  for (BellIndex kl : kAllBellIndices) {
    const StateVector term = permute_qubits(tensor(bell_state(kl), bell_state(kl)), perm);
    out += coefficients[static_cast<std::size_t>(kl.ordinal())] * term.amplitudes();
  }
  return out;
}

std::array<Complex, 4> lambda_coefficients(std::optional<BellIndex> flipped) {
  std::array<Complex, 4> c{};
  for (BellIndex kl : kAllBellIndices) {
    double v = Lambda::value(kl) * Lambda::normalizer();
    if (flipped && *flipped == kl) v = -v;
    c[static_cast<std::size_t>(kl.ordinal())] = v;
  }
  return c;
}

double verify_decomposition(Pairing p, std::optional<BellIndex> flipped) {
  const Vector expansion = decomposition_expansion(p, lambda_coefficients(flipped));
  return (build_switchboard().state().amplitudes() - expansion).norm();
}

WernerParams reduced_channel(Party party) {
  if (party == Party::Alice) throw DomainError("reduced_channel: party must not be Alice");
  const std::array<int, 2> keep = {state_slot(Party::Alice), state_slot(party)};
  const DensityMatrix rho = reduced_state(build_switchboard().state(), keep);
  const Matrix singlet = singlet_projector();
  const double overlap = (rho.matrix() * singlet).trace().real();

  WernerParams params;
  params.singlet_weight = (4.0 * overlap - 1.0) / 3.0;
  params.noise_fraction = 1.0 - params.singlet_weight;
  const Matrix werner = params.singlet_weight * singlet +
                        (1.0 - params.singlet_weight) / 4.0 * Matrix::Identity(4, 4);
  params.fit_distance = (rho.matrix() - werner).cwiseAbs().maxCoeff();
  if (params.fit_distance > 1e-10) {
    throw StructuralError("reduced_channel: " + party_name(party) +
                          " marginal is not of Werner form");
  }
  return params;
}

QubitOperator CorrectionTable::Entry::unitary() const {
  return {1, phase * qswitch::pauli(this->pauli).matrix()};
}

CorrectionTable derive_corrections() {
  const auto probes = correction_probes();
  CorrectionTable table;
  for (BellIndex mn : kAllBellIndices) {
    for (BellIndex kl : kAllBellIndices) {
      std::optional<CorrectionTable::Entry> found;
      for (Pauli candidate : kAllPaulis) {
        const Matrix p = pauli(candidate).matrix();
        std::optional<Complex> phase;
        bool matches = true;
        for (const auto& alpha : probes) {
          // Bell projection carries amplitude 1/2 for every outcome.
          const Vector left = 2.0 * project_out_bell(tensor(alpha, bell_state(kl)), {0, 1}, mn);
          const Vector expected = p * alpha.amplitudes();
          const Complex c = expected.dot(left);
          if (!phase) phase = c;
          if ((left - *phase * expected).norm() > tol::kAlgebraic) {
            matches = false;
            break;
          }
        }
        if (matches) {
          found = CorrectionTable::Entry{candidate, *phase / std::abs(*phase)};
          break;
        }
      }
      if (!found) {
        throw StructuralError("derive_corrections: no Pauli matches (" + mn.label() + ", " +
                              kl.label() + ")");
      }
      table.entries_[static_cast<std::size_t>(mn.ordinal())][static_cast<std::size_t>(kl.ordinal())] =
          *found;
    }
  }
  for (const auto& alpha : probes) {
    if (reconstruction_residual(table, alpha) > tol::kAlgebraic) {
      throw StructuralError("derive_corrections: table does not reconstruct |alpha>|psi>");
    }
  }
  return table;
}

const CorrectionTable& corrections() {
  static const CorrectionTable table = derive_corrections();
  return table;
}

double reconstruction_residual(const CorrectionTable& table, const StateVector& alpha) {
  const double prefactor = 1.0 / (4.0 * std::sqrt(3.0));
  Vector sum = Vector::Zero(32);
  for (BellIndex mn : kAllBellIndices) {
    for (BellIndex kl : kAllBellIndices) {
      const Vector received = table.at(mn, kl).unitary().matrix() * alpha.amplitudes();
      sum += prefactor * Lambda::value(kl) *
             kron_vec(kron_vec(bell_state(mn).amplitudes(), received), bell_state(kl).amplitudes());
    }
  }
  return (protocol_register(alpha).amplitudes() - sum).norm();
}

StateVector protocol_register(const StateVector& alpha) {
  if (alpha.n_qubits() != 1) throw DomainError("protocol_register: alpha must be one qubit");
  return tensor(alpha, build_switchboard().state());
}

std::vector<MeasurementResult> alice_step(const StateVector& alpha, const BellMeasureMode& mode) {
  return measure_bell(protocol_register(alpha), {kAuxSlot, register_slot(Party::Alice)}, mode);
}

StateVector collapsed_state(BellIndex mn, const StateVector& alpha) {
  const auto& table = corrections();
  Vector out = Vector::Zero(8);
  for (BellIndex kl : kAllBellIndices) {
    const Vector received = table.at(mn, kl).unitary().matrix() * alpha.amplitudes();
    out += Lambda::value(kl) * Lambda::normalizer() * kron_vec(received, bell_state(kl).amplitudes());
  }
  return StateVector::normalized(3, std::move(out));
}

CloneReport clone_fidelity(Party party, const StateVector& alpha) {
  if (party == Party::Alice) throw DomainError("clone_fidelity: party must not be Alice");
  const auto& table = corrections();
  const StateVector reg = protocol_register(alpha);
  // After removing slots 0 and 1 the remainder holds register slots 2, 3, 4.
  const std::array<int, 1> keep = {register_slot(party) - 2};

  CloneReport report;
  report.party = party;
  for (BellIndex mn : kAllBellIndices) {
    const Vector rest = project_out_bell(reg, {kAuxSlot, register_slot(Party::Alice)}, mn);
    const auto k = static_cast<std::size_t>(mn.ordinal());
    report.outcome_probability[k] = rest.squaredNorm();
    const DensityMatrix rho = reduced_state(StateVector::normalized(3, rest), keep);
    const Matrix u = table.at(mn, kSinglet).unitary().adjoint().matrix();
    const DensityMatrix corrected(1, u * rho.matrix() * u.adjoint());
    report.per_outcome_fidelity[k] = fidelity_with_pure(corrected, alpha);
    report.average_fidelity += report.outcome_probability[k] * report.per_outcome_fidelity[k];
  }
  return report;
}

RouteGeometry route_geometry(Route route) {
  const int dick = register_slot(Party::Dick);
  if (route == Route::ToBob) {
    return {Party::Bob, Party::Charlene, {dick, register_slot(Party::Charlene)}};
  }
  return {Party::Charlene, Party::Bob, {dick, register_slot(Party::Bob)}};
}

DemuxResult demux_with_shared_state(const StateVector& shared, Route route,
                                    const StateVector& alpha, const StepMode& alice_mode,
                                    const StepMode& idle_mode) {
  if (shared.n_qubits() != 4) throw DomainError("demux: shared state must have four qubits");
  if (alpha.n_qubits() != 1) throw DomainError("demux: alpha must be one qubit");
  const auto geometry = route_geometry(route);
  const StateVector reg = tensor(alpha, shared);

  const std::array<int, 2> alice_pair = {kAuxSlot, register_slot(Party::Alice)};
  const auto alice = measure_bell(reg, alice_pair, to_bell_mode(alice_mode)).front();
  const StateVector after_alice =
      StateVector::normalized(3, project_out_bell(reg, alice_pair, alice.outcome));

  // Remainder slots are register slots 2, 3, 4.
  const std::array<int, 2> idle_pair = {geometry.idle_pair[0] - 2, geometry.idle_pair[1] - 2};
  const auto idle = measure_bell(after_alice, idle_pair, to_bell_mode(idle_mode)).front();
  const StateVector received =
      StateVector::normalized(1, project_out_bell(after_alice, idle_pair, idle.outcome));

  const auto& entry = corrections().at(alice.outcome, idle.outcome);
  const StateVector output = apply_on_qubits(received, entry.unitary().adjoint(), std::array{0});
  const double fidelity = std::norm(inner(alpha, output));
  return {route,        alice.outcome, idle.outcome, alice.probability, idle.probability,
          entry.pauli, output,        fidelity};
}

DemuxResult demux(Route route, const StateVector& alpha, const StepMode& alice_mode,
                  const StepMode& idle_mode) {
  return demux_with_shared_state(build_switchboard().state(), route, alpha, alice_mode, idle_mode);
}

double mean_demux_fidelity(const StateVector& shared, Route route, const StateVector& alpha) {
  double total = 0.0;
  for (BellIndex mn : kAllBellIndices) {
    for (BellIndex kl : kAllBellIndices) {
      try {
        const auto r = demux_with_shared_state(shared, route, alpha, ForcedMode{mn}, ForcedMode{kl});
        total += r.alice_probability * r.idle_probability * r.fidelity;
      } catch (const ImpossibleOutcomeError&) {
        // zero-weight branch
      }
    }
  }
  return total;
}

StateVector phase_altered_switchboard(BellIndex flipped) {
  return StateVector::normalized(
      4, decomposition_expansion(Pairing::AliceBob, lambda_coefficients(flipped)));
}

// --- GHZ baseline ----------------------------------------------------------------

StateVector ghz_state(int n_qubits) {
  if (n_qubits < 2) throw DomainError("ghz_state: need at least two qubits");
  Vector v = Vector::Zero(Eigen::Index{1} << n_qubits);
  v[0] = v[v.size() - 1] = std::numbers::sqrt2 / 2.0;
  return {n_qubits, std::move(v)};
}

namespace {

// Register: aux 0, Alice 1, Bob 2, Charlene 3. After Alice's projection the
// remainder is (Bob, Charlene).
constexpr std::array<int, 2> kGhzAlicePair = {0, 1};

int ghz_remainder_slot(Party p) { return p == Party::Bob ? 0 : 1; }

// Probability-weighted fidelity of one Alice branch with correction P.
double ghz_clone_branch(const StateVector& alpha, BellIndex mn, Party party, Pauli p) {
  const StateVector reg = tensor(alpha, ghz_state(3));
  const Vector rest = project_out_bell(reg, kGhzAlicePair, mn);
  const double prob = rest.squaredNorm();
  if (prob < tol::kImpossible) return 0.0;
  const std::array<int, 1> keep = {ghz_remainder_slot(party)};
  const DensityMatrix rho = reduced_state(StateVector::normalized(2, rest), keep);
  const Matrix u = pauli(p).matrix();
  return prob * fidelity_with_pure(DensityMatrix(1, u * rho.matrix() * u.adjoint()), alpha);
}

StateVector plus_minus(int sign) {
  Vector v(2);
  v << 1.0, static_cast<double>(sign);
  return StateVector::normalized(1, std::move(v));
}

// Branch (mn, s) of the conditional teleport: probability and received state.
std::optional<std::pair<double, StateVector>> ghz_teleport_branch(const StateVector& alpha,
                                                                  BellIndex mn, int s,
                                                                  Party target) {
  const StateVector reg = tensor(alpha, ghz_state(3));
  const Vector rest = project_out_bell(reg, kGhzAlicePair, mn);
  const double p_mn = rest.squaredNorm();
  if (p_mn < tol::kImpossible) return std::nullopt;
  const Party idle = target == Party::Bob ? Party::Charlene : Party::Bob;
  const auto outcomes = measure_qubit(StateVector::normalized(2, rest), ghz_remainder_slot(idle),
                                      {plus_minus(+1), plus_minus(-1)});
  const auto& branch = outcomes[static_cast<std::size_t>(s)];
  if (!branch.remainder) return std::nullopt;
  return std::make_pair(p_mn * branch.probability, *branch.remainder);
}

template <typename BranchFidelity>
Pauli best_pauli(BranchFidelity&& weighted_fidelity) {
  Pauli best = Pauli::I;
  double best_value = -std::numeric_limits<double>::infinity();
  for (Pauli p : kAllPaulis) {
    const double v = haar_average([&](const StateVector& a) { return weighted_fidelity(a, p); });
    if (v > best_value + 1e-12) {
      best_value = v;
      best = p;
    }
  }
  return best;
}

}  // namespace

GhzReport ghz_baseline(const StateVector& alpha) {
  if (alpha.n_qubits() != 1) throw DomainError("ghz_baseline: alpha must be one qubit");
  GhzReport report;

  for (Party party : {Party::Bob, Party::Charlene}) {
    std::array<Pauli, 4> choice{};
    for (BellIndex mn : kAllBellIndices) {
      choice[static_cast<std::size_t>(mn.ordinal())] = best_pauli(
          [&](const StateVector& a, Pauli p) { return ghz_clone_branch(a, mn, party, p); });
    }
    auto total = [&](const StateVector& a) {
      double f = 0.0;
      for (BellIndex mn : kAllBellIndices) {
        f += ghz_clone_branch(a, mn, party, choice[static_cast<std::size_t>(mn.ordinal())]);
      }
      return f;
    };
    const double given = total(alpha);
    const double average = haar_average(total);
    if (party == Party::Bob) {
      report.bob_clone_fidelity = given;
      report.bob_clone_haar_average = average;
    } else {
      report.charlene_clone_fidelity = given;
      report.charlene_clone_haar_average = average;
    }
  }

  for (Party target : {Party::Bob, Party::Charlene}) {
    double worst = 1.0;
    for (BellIndex mn : kAllBellIndices) {
      for (int s = 0; s < 2; ++s) {
        auto weighted = [&](const StateVector& a, Pauli p) {
          const auto branch = ghz_teleport_branch(a, mn, s, target);
          if (!branch) return 0.0;
          const StateVector out = apply_on_qubits(branch->second, pauli(p), std::array{0});
          return branch->first * std::norm(inner(a, out));
        };
        const Pauli p = best_pauli(weighted);
        const auto branch = ghz_teleport_branch(alpha, mn, s, target);
        if (!branch) continue;
        const StateVector out = apply_on_qubits(branch->second, pauli(p), std::array{0});
        worst = std::min(worst, std::norm(inner(alpha, out)));
      }
    }
    (target == Party::Bob ? report.teleport_to_bob : report.teleport_to_charlene) = worst;
  }
  return report;
}

// --- collective noise ---------------------------------------------------------------

NoiseReport collective_noise_fidelity(const QubitOperator& u) {
  const QubitOperator all4 = collective_unitary(u, 4);
  constexpr std::array<int, 4> slots = {0, 1, 2, 3};
  const StateVector psi = build_switchboard().state();
  const StateVector ghz = ghz_state(4);
  return {std::norm(inner(psi, apply_on_qubits(psi, all4, slots))),
          std::norm(inner(ghz, apply_on_qubits(ghz, all4, slots)))};
}

NoiseReport noise_robustness(NoiseChannel channel, int samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("noise_robustness: samples must be >= 1");
  NoiseReport mean;
  for (int i = 0; i < samples; ++i) {
    const std::uint64_t stream = derive_seed(seed, static_cast<std::uint64_t>(i));
    QubitOperator u = pauli(Pauli::I);
    if (channel == NoiseChannel::CollectiveZRotation) {
      std::mt19937_64 rng(stream);
      u = z_rotation(std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng));
    } else {
      u = random_unitary_qubit(stream);
    }
    const auto r = collective_noise_fidelity(u);
    mean.switchboard_fidelity += r.switchboard_fidelity / samples;
    mean.ghz_fidelity += r.ghz_fidelity / samples;
  }
  return mean;
}

}  // namespace switchboard
}  // namespace qswitch
