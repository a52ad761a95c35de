#include "qswitch/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace qswitch {

namespace {

constexpr Complex kI{0.0, 1.0};

Eigen::Index dim_of(int n_qubits) { return Eigen::Index{1} << n_qubits; }

int bit_of(std::uint64_t index, int slot, int n_qubits) {
  return static_cast<int>((index >> (n_qubits - 1 - slot)) & 1U);
}

void check_slots(std::span<const int> slots, int n_qubits, const char* what) {
  std::vector<bool> seen(static_cast<std::size_t>(n_qubits), false);
  for (int q : slots) {
    if (q < 0 || q >= n_qubits) {
      throw DomainError(std::string(what) + ": slot " + std::to_string(q) + " out of range");
    }
    if (seen[static_cast<std::size_t>(q)]) {
      throw DomainError(std::string(what) + ": slot " + std::to_string(q) + " repeated");
    }
    seen[static_cast<std::size_t>(q)] = true;
  }
}

// Splits basis indices into the bits of `kept` slots (in the given order) and
// the remaining slots (ascending). Returns, for every full index, the pair
// (kept label, rest label).
struct SlotSplit {
  std::vector<Eigen::Index> kept_label;
  std::vector<Eigen::Index> rest_label;
};

SlotSplit split_slots(int n_qubits, std::span<const int> kept) {
  std::vector<int> rest;
  for (int q = 0; q < n_qubits; ++q) {
    if (std::find(kept.begin(), kept.end(), q) == kept.end()) rest.push_back(q);
  }
  const auto dim = dim_of(n_qubits);
  SlotSplit split;
  split.kept_label.resize(static_cast<std::size_t>(dim));
  split.rest_label.resize(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) {
    Eigen::Index k = 0;
    for (int q : kept) k = (k << 1) | bit_of(static_cast<std::uint64_t>(i), q, n_qubits);
    Eigen::Index r = 0;
    for (int q : rest) r = (r << 1) | bit_of(static_cast<std::uint64_t>(i), q, n_qubits);
    split.kept_label[static_cast<std::size_t>(i)] = k;
    split.rest_label[static_cast<std::size_t>(i)] = r;
  }
  return split;
}

// Amplitudes arranged as a (kept label) x (rest label) matrix.
Matrix as_kept_by_rest(const StateVector& s, std::span<const int> kept) {
  const auto n = s.n_qubits();
  const auto split = split_slots(n, kept);
  const auto kept_dim = dim_of(static_cast<int>(kept.size()));
  const auto rest_dim = dim_of(n - static_cast<int>(kept.size()));
  Matrix m = Matrix::Zero(kept_dim, rest_dim);
  for (Eigen::Index i = 0; i < s.dimension(); ++i) {
    m(split.kept_label[static_cast<std::size_t>(i)], split.rest_label[static_cast<std::size_t>(i)]) =
        s[i];
  }
  return m;
}

}  // namespace

// --- StateVector / DensityMatrix / QubitOperator -----------------------------

StateVector::StateVector(int n_qubits, Vector amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
  if (n_qubits < 0 || n_qubits > 30) throw DomainError("StateVector: bad qubit count");
  if (amplitudes_.size() != dim_of(n_qubits)) {
    throw ContractError("StateVector: length is not 2^n_qubits");
  }
  if (std::abs(amplitudes_.norm() - 1.0) > tol::kAlgebraic) {
    throw ContractError("StateVector: amplitudes are not normalized");
  }
}

StateVector StateVector::normalized(int n_qubits, Vector raw) {
  const double norm = raw.norm();
  if (!(norm > 0.0)) throw DomainError("StateVector: cannot normalize a zero vector");
  raw /= norm;
  return {n_qubits, std::move(raw)};
}

DensityMatrix::DensityMatrix(int n_qubits, Matrix matrix)
    : n_qubits_(n_qubits), matrix_(std::move(matrix)) {
  const auto dim = dim_of(n_qubits);
  if (matrix_.rows() != dim || matrix_.cols() != dim) {
    throw ContractError("DensityMatrix: side is not 2^n_qubits");
  }
  if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > tol::kAlgebraic) {
    throw ContractError("DensityMatrix: not Hermitian");
  }
  if (std::abs(matrix_.trace() - Complex{1.0}) > tol::kAlgebraic) {
    throw ContractError("DensityMatrix: trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(matrix_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < tol::kEigenFloor) {
    throw ContractError("DensityMatrix: negative eigenvalue");
  }
}

double DensityMatrix::purity() const { return (matrix_ * matrix_).trace().real(); }

QubitOperator::QubitOperator(int n_qubits, Matrix matrix)
    : n_qubits_(n_qubits), matrix_(std::move(matrix)) {
  const auto dim = dim_of(n_qubits);
  if (n_qubits < 1 || matrix_.rows() != dim || matrix_.cols() != dim) {
    throw DomainError("QubitOperator: side is not 2^n_qubits");
  }
}

QubitOperator QubitOperator::adjoint() const { return {n_qubits_, matrix_.adjoint()}; }

bool QubitOperator::is_unitary(double tolerance) const {
  const auto dim = matrix_.rows();
  return (matrix_.adjoint() * matrix_ - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() <=
         tolerance;
}

bool QubitOperator::is_hermitian(double tolerance) const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() <= tolerance;
}

QubitOperator pauli(Pauli p) {
  Matrix m(2, 2);
  switch (p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, -kI, kI, 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return {1, std::move(m)};
}

char pauli_name(Pauli p) {
  constexpr std::array<char, 4> names = {'I', 'X', 'Y', 'Z'};
  return names[static_cast<std::size_t>(p)];
}

// --- construction -------------------------------------------------------------

StateVector basis_ket(int n_qubits, std::uint64_t index) {
  if (n_qubits < 0 || n_qubits > 30) throw DomainError("basis_ket: bad qubit count");
  const auto dim = dim_of(n_qubits);
  if (index >= static_cast<std::uint64_t>(dim)) {
    throw DomainError("basis_ket: index " + std::to_string(index) + " out of range");
  }
  Vector v = Vector::Zero(dim);
  v[static_cast<Eigen::Index>(index)] = 1.0;
  return {n_qubits, std::move(v)};
}

StateVector bell_state(BellIndex idx) {
  Vector v = Vector::Zero(4);
  const double h = std::numbers::sqrt2 / 2.0;
  for (int k = 0; k < 2; ++k) {
    const int second = k ^ idx.a;
    const double sign = (k * idx.b) % 2 == 0 ? 1.0 : -1.0;
    v[2 * k + second] += sign * h;
  }
  return {2, std::move(v)};
}

StateVector tensor(const StateVector& left, const StateVector& right) {
  const auto& l = left.amplitudes();
  const auto& r = right.amplitudes();
  Vector out(l.size() * r.size());
  for (Eigen::Index i = 0; i < l.size(); ++i) out.segment(i * r.size(), r.size()) = l[i] * r;
  return StateVector::normalized(left.n_qubits() + right.n_qubits(), std::move(out));
}

StateVector tensor(std::initializer_list<StateVector> factors) {
  if (factors.size() == 0) throw DomainError("tensor: no factors");
  auto it = factors.begin();
  StateVector acc = *it++;
  for (; it != factors.end(); ++it) acc = tensor(acc, *it);
  return acc;
}

StateVector permute_qubits(const StateVector& s, std::span<const int> perm) {
  const int n = s.n_qubits();
  if (static_cast<int>(perm.size()) != n) throw DomainError("permute_qubits: wrong length");
  check_slots(perm, n, "permute_qubits");
  Vector out = Vector::Zero(s.dimension());
  for (Eigen::Index i = 0; i < s.dimension(); ++i) {
    std::uint64_t j = 0;
    for (int q = 0; q < n; ++q) {
      if (bit_of(static_cast<std::uint64_t>(i), q, n)) j |= std::uint64_t{1} << (n - 1 - perm[q]);
    }
    out[static_cast<Eigen::Index>(j)] = s[i];
  }
  return {n, std::move(out)};
}

StateVector apply_on_qubits(const StateVector& s, const QubitOperator& op,
                            std::span<const int> targets) {
  const int n = s.n_qubits();
  const int k = op.n_qubits();
  if (static_cast<int>(targets.size()) != k) {
    throw DomainError("apply_on_qubits: operator arity does not match target count");
  }
  check_slots(targets, n, "apply_on_qubits");
  if (!op.is_unitary()) throw ContractError("apply_on_qubits: operator is not unitary");

  const auto sub_dim = dim_of(k);
  std::vector<std::uint64_t> offsets(static_cast<std::size_t>(sub_dim), 0);
  std::uint64_t target_mask = 0;
  for (Eigen::Index j = 0; j < sub_dim; ++j) {
    for (int t = 0; t < k; ++t) {
      if (bit_of(static_cast<std::uint64_t>(j), t, k)) {
        offsets[static_cast<std::size_t>(j)] |= std::uint64_t{1} << (n - 1 - targets[t]);
      }
    }
  }
  for (int t : targets) target_mask |= std::uint64_t{1} << (n - 1 - t);

  Vector out = s.amplitudes();
  Vector gathered(sub_dim);
  for (Eigen::Index base = 0; base < s.dimension(); ++base) {
    if (static_cast<std::uint64_t>(base) & target_mask) continue;
    for (Eigen::Index j = 0; j < sub_dim; ++j) {
      gathered[j] = s[base + static_cast<Eigen::Index>(offsets[static_cast<std::size_t>(j)])];
    }
    const Vector mapped = op.matrix() * gathered;
    for (Eigen::Index j = 0; j < sub_dim; ++j) {
      out[base + static_cast<Eigen::Index>(offsets[static_cast<std::size_t>(j)])] = mapped[j];
    }
  }
  // Renormalize away rounding; the op is unitary to 1e-12.
  return StateVector::normalized(n, std::move(out));
}

QubitOperator kron(const QubitOperator& left, const QubitOperator& right) {
  const auto& a = left.matrix();
  const auto& b = right.matrix();
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
  }
  return {left.n_qubits() + right.n_qubits(), std::move(out)};
}

QubitOperator collective_unitary(const QubitOperator& u, int n) {
  if (u.n_qubits() != 1) throw DomainError("collective_unitary: expects a single-qubit operator");
  if (n < 1) throw DomainError("collective_unitary: n must be positive");
  if (!u.is_unitary()) throw ContractError("collective_unitary: operator is not unitary");
  QubitOperator acc = u;
  for (int i = 1; i < n; ++i) acc = kron(acc, u);
  return acc;
}

// --- mixed states ---------------------------------------------------------------

DensityMatrix density_of(const StateVector& s) {
  return {s.n_qubits(), s.amplitudes() * s.amplitudes().adjoint()};
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  const int n = rho.n_qubits();
  if (keep.empty()) throw DomainError("partial_trace: keep set is empty");
  check_slots(keep, n, "partial_trace");
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  if (static_cast<int>(kept.size()) == n) return rho;

  const auto split = split_slots(n, kept);
  const auto out_dim = dim_of(static_cast<int>(kept.size()));
  const auto dim = dim_of(n);
  Matrix out = Matrix::Zero(out_dim, out_dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      if (split.rest_label[static_cast<std::size_t>(r)] != split.rest_label[static_cast<std::size_t>(c)]) {
        continue;
      }
      out(split.kept_label[static_cast<std::size_t>(r)], split.kept_label[static_cast<std::size_t>(c)]) +=
          rho(r, c);
    }
  }
  return {static_cast<int>(kept.size()), std::move(out)};
}

DensityMatrix reduced_state(const StateVector& s, std::span<const int> keep) {
  if (keep.empty()) throw DomainError("reduced_state: keep set is empty");
  check_slots(keep, s.n_qubits(), "reduced_state");
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  const Matrix m = as_kept_by_rest(s, kept);
  Matrix rho = m * m.adjoint();
  // Symmetrize rounding so the Hermiticity check never trips on 1e-17 noise.
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return {static_cast<int>(kept.size()), std::move(rho)};
}

double fidelity_with_pure(const DensityMatrix& rho, const StateVector& target) {
  if (rho.n_qubits() != target.n_qubits()) {
    throw DomainError("fidelity_with_pure: dimension mismatch");
  }
  const auto& t = target.amplitudes();
  const double f = t.dot(rho.matrix() * t).real();  // Eigen's dot conjugates the left side
  return std::clamp(f, 0.0, 1.0);
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.n_qubits() != sigma.n_qubits()) throw DomainError("trace_distance: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(rho.matrix() - sigma.matrix(), Eigen::EigenvaluesOnly);
  return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

// --- measurement -------------------------------------------------------------------

Vector project_out_bell(const StateVector& s, std::array<int, 2> pair, BellIndex outcome) {
  check_slots(pair, s.n_qubits(), "project_out_bell");
  if (s.n_qubits() < 2) throw DomainError("project_out_bell: need at least two qubits");
  const Matrix m = as_kept_by_rest(s, pair);
  return m.transpose() * bell_state(outcome).amplitudes().conjugate();
}

namespace {

// Rebuilds the full register with bell_state(outcome) on `pair` and the
// normalized remainder on the other slots.
StateVector embed_bell(int n, std::array<int, 2> pair, BellIndex outcome, const Vector& remainder) {
  const auto split = split_slots(n, pair);
  const Vector bell = bell_state(outcome).amplitudes();
  Vector out(dim_of(n));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = bell[split.kept_label[static_cast<std::size_t>(i)]] *
             remainder[split.rest_label[static_cast<std::size_t>(i)]];
  }
  return StateVector::normalized(n, std::move(out));
}

MeasurementResult bell_branch(const StateVector& s, std::array<int, 2> pair, BellIndex outcome) {
  const Vector rest = project_out_bell(s, pair, outcome);
  const double p = rest.squaredNorm();
  MeasurementResult result{outcome, p, std::nullopt};
  if (p >= tol::kImpossible) result.post_state = embed_bell(s.n_qubits(), pair, outcome, rest);
  return result;
}

}  // namespace

std::vector<MeasurementResult> measure_bell(const StateVector& s, std::array<int, 2> pair,
                                            const BellMeasureMode& mode) {
  check_slots(pair, s.n_qubits(), "measure_bell");
  if (s.n_qubits() < 2) throw DomainError("measure_bell: need at least two qubits");

  if (const auto* forced = std::get_if<ForcedMode>(&mode)) {
    auto branch = bell_branch(s, pair, forced->outcome);
    if (!branch.post_state) {
      throw ImpossibleOutcomeError("measure_bell: outcome (" + forced->outcome.label() +
                                   ") has zero probability");
    }
    return {std::move(branch)};
  }

  std::vector<MeasurementResult> all;
  all.reserve(4);
  for (BellIndex idx : kAllBellIndices) all.push_back(bell_branch(s, pair, idx));
  if (std::holds_alternative<EnumerateMode>(mode)) return all;

  std::mt19937_64 rng(std::get<SampleMode>(mode).seed);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  std::size_t chosen = all.size();
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (!all[k].post_state) continue;
    cumulative += all[k].probability;
    chosen = k;
    if (u < cumulative) break;
  }
  return {std::move(all[chosen])};
}

std::array<QubitOutcome, 2> measure_qubit(const StateVector& s, int slot,
                                          const std::array<StateVector, 2>& basis) {
  const std::array<int, 1> kept{slot};
  check_slots(kept, s.n_qubits(), "measure_qubit");
  if (s.n_qubits() < 2) throw DomainError("measure_qubit: need a remainder qubit");
  const Matrix m = as_kept_by_rest(s, kept);
  std::array<QubitOutcome, 2> out;
  for (int k = 0; k < 2; ++k) {
    if (basis[k].n_qubits() != 1) throw DomainError("measure_qubit: basis must be single-qubit");
    Vector rest = m.transpose() * basis[k].amplitudes().conjugate();
    out[k].outcome = k;
    out[k].probability = rest.squaredNorm();
    if (out[k].probability >= tol::kImpossible) {
      out[k].remainder = StateVector::normalized(s.n_qubits() - 1, std::move(rest));
    }
  }
  return out;
}

// --- comparison & sampling ----------------------------------------------------------

Complex inner(const StateVector& left, const StateVector& right) {
  if (left.dimension() != right.dimension()) throw DomainError("inner: dimension mismatch");
  return left.amplitudes().dot(right.amplitudes());
}

bool equal_up_to_phase(const StateVector& x, const StateVector& y, double tolerance) {
  if (x.dimension() != y.dimension()) return false;
  return std::abs(std::abs(inner(x, y)) - 1.0) <= tolerance;
}

std::array<double, 3> bloch_vector(const StateVector& qubit) {
  if (qubit.n_qubits() != 1) throw DomainError("bloch_vector: expects a single qubit");
  const Complex a = qubit[0];
  const Complex b = qubit[1];
  const Complex coherence = std::conj(a) * b;
  return {2.0 * coherence.real(), 2.0 * coherence.imag(), std::norm(a) - std::norm(b)};
}

StateVector state_from_bloch(double theta, double phi) {
  Vector v(2);
  v << std::cos(theta / 2.0), std::polar(std::sin(theta / 2.0), phi);
  return StateVector::normalized(1, std::move(v));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

StateVector random_pure_qubit(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(2);
  for (Eigen::Index i = 0; i < 2; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v[i] = {re, im};
  }
  return StateVector::normalized(1, std::move(v));
}

QubitOperator random_unitary_qubit(std::uint64_t seed) {
  // QR of a complex Ginibre matrix with the R-diagonal phases divided out.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(2, 2);
  for (Eigen::Index r = 0; r < 2; ++r) {
    for (Eigen::Index c = 0; c < 2; ++c) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(r, c) = {re, im};
    }
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < 2; ++c) {
    const double mag = std::abs(r(c, c));
    if (mag > 0.0) q.col(c) *= r(c, c) / mag;
  }
  return {1, std::move(q)};
}

QubitOperator z_rotation(double angle) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = std::polar(1.0, -angle / 2.0);
  m(1, 1) = std::polar(1.0, angle / 2.0);
  return {1, std::move(m)};
}

double haar_average(const std::function<double(const StateVector&)>& f) {
  using std::numbers::pi;
  const std::array<std::pair<double, double>, 6> points = {
      {{0.0, 0.0}, {pi, 0.0}, {pi / 2, 0.0}, {pi / 2, pi}, {pi / 2, pi / 2}, {pi / 2, 3 * pi / 2}}};
  double total = 0.0;
  for (auto [theta, phi] : points) total += f(state_from_bloch(theta, phi));
  return total / static_cast<double>(points.size());
}

}  // namespace qswitch
