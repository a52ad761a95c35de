#pragma once

// Dense state-vector primitives for small qubit registers.
//
// Basis labels are most-significant-bit first: slot 0 is the leftmost bit of
// the computational basis label, so |q0 q1 ... q(n-1)> sits at index
// q0*2^(n-1) + ... + q(n-1).

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qswitch/errors.hpp"

namespace qswitch {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

namespace tol {
inline constexpr double kAlgebraic = 1e-12;
inline constexpr double kPhaseEquality = 1e-9;
inline constexpr double kImpossible = 1e-14;
inline constexpr double kEigenFloor = -1e-10;
}  // namespace tol

class StateVector {
 public:
  /// Takes ownership of already-normalized amplitudes; throws ContractError
  /// if the norm is off by more than 1e-12 or the length is not 2^n.
  StateVector(int n_qubits, Vector amplitudes);

  /// Rescales `raw` to unit norm. A zero vector is a DomainError.
  static StateVector normalized(int n_qubits, Vector raw);

  int n_qubits() const noexcept { return n_qubits_; }
  Eigen::Index dimension() const noexcept { return amplitudes_.size(); }
  const Vector& amplitudes() const noexcept { return amplitudes_; }
  Complex operator[](Eigen::Index i) const { return amplitudes_[i]; }

 private:
  int n_qubits_ = 0;
  Vector amplitudes_;
};

class DensityMatrix {
 public:
  /// Validates Hermiticity and unit trace (1e-12) and eigenvalues >= -1e-10.
  DensityMatrix(int n_qubits, Matrix matrix);

  int n_qubits() const noexcept { return n_qubits_; }
  const Matrix& matrix() const noexcept { return matrix_; }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return matrix_(r, c); }
  double purity() const;

 private:
  int n_qubits_ = 0;
  Matrix matrix_;
};

/// Names the Bell state |(ab)> = 2^{-1/2} sum_k (-1)^{kb} |k, k xor a>.
/// `a` is the flip bit, `b` the phase bit; (1,1) is the singlet.
struct BellIndex {
  std::uint8_t a = 0;
  std::uint8_t b = 0;

  constexpr BellIndex() = default;
  constexpr BellIndex(int flip, int phase)
      : a(static_cast<std::uint8_t>(flip)), b(static_cast<std::uint8_t>(phase)) {
    if ((flip != 0 && flip != 1) || (phase != 0 && phase != 1)) {
      throw DomainError("BellIndex bits must be 0 or 1");
    }
  }

  constexpr int ordinal() const noexcept { return 2 * a + b; }
  static constexpr BellIndex from_ordinal(int k) { return {k >> 1, k & 1}; }
  std::string label() const { return {static_cast<char>('0' + a), static_cast<char>('0' + b)}; }

  friend constexpr bool operator==(BellIndex, BellIndex) = default;
  friend constexpr auto operator<=>(BellIndex, BellIndex) = default;
};

inline constexpr std::array<BellIndex, 4> kAllBellIndices = {
    BellIndex{0, 0}, BellIndex{0, 1}, BellIndex{1, 0}, BellIndex{1, 1}};
inline constexpr BellIndex kSinglet{1, 1};

/// Operator on `n_qubits` qubits; unitarity/Hermiticity are checked by the
/// operations that need them.
class QubitOperator {
 public:
  QubitOperator(int n_qubits, Matrix matrix);

  int n_qubits() const noexcept { return n_qubits_; }
  const Matrix& matrix() const noexcept { return matrix_; }
  QubitOperator adjoint() const;

  bool is_unitary(double tolerance = tol::kAlgebraic) const;
  bool is_hermitian(double tolerance = tol::kAlgebraic) const;

 private:
  int n_qubits_ = 0;
  Matrix matrix_;
};

enum class Pauli { I, X, Y, Z };
inline constexpr std::array<Pauli, 4> kAllPaulis = {Pauli::I, Pauli::X, Pauli::Y, Pauli::Z};
QubitOperator pauli(Pauli p);
char pauli_name(Pauli p);

struct MeasurementResult {
  BellIndex outcome;
  double probability = 0.0;
  /// Empty when the outcome has probability below 1e-14 (enumerate mode).
  std::optional<StateVector> post_state;
};

struct SampleMode {
  std::uint64_t seed = 0;
};
struct ForcedMode {
  BellIndex outcome;
};
struct EnumerateMode {};
using BellMeasureMode = std::variant<SampleMode, ForcedMode, EnumerateMode>;

// --- construction -----------------------------------------------------------

StateVector basis_ket(int n_qubits, std::uint64_t index);
StateVector bell_state(BellIndex idx);
StateVector tensor(const StateVector& left, const StateVector& right);
StateVector tensor(std::initializer_list<StateVector> factors);

/// The qubit that sits in slot q of `s` moves to slot perm[q].
StateVector permute_qubits(const StateVector& s, std::span<const int> perm);

/// Applies `op` with its qubit j (MSB first) acting on slot targets[j].
StateVector apply_on_qubits(const StateVector& s, const QubitOperator& op,
                            std::span<const int> targets);

QubitOperator collective_unitary(const QubitOperator& u, int n);
QubitOperator kron(const QubitOperator& left, const QubitOperator& right);

// --- mixed states -----------------------------------------------------------

DensityMatrix density_of(const StateVector& s);

/// Keeps the listed slots (any order, no duplicates); the result orders them
/// ascending.
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);

/// Same as partial_trace(density_of(s), keep) without forming the full matrix.
DensityMatrix reduced_state(const StateVector& s, std::span<const int> keep);

double fidelity_with_pure(const DensityMatrix& rho, const StateVector& target);
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

// --- measurement ------------------------------------------------------------

std::vector<MeasurementResult> measure_bell(const StateVector& s, std::array<int, 2> pair,
                                            const BellMeasureMode& mode);

/// Projects `pair` onto bell_state(outcome) and drops those two slots. The
/// remainder keeps the other slots in ascending order. Returns the
/// unnormalized remainder; its squared norm is the outcome probability.
Vector project_out_bell(const StateVector& s, std::array<int, 2> pair, BellIndex outcome);

/// Single-qubit projective measurement in an orthonormal basis {basis[0],
/// basis[1]}; every outcome is enumerated. post_state drops the measured slot.
struct QubitOutcome {
  int outcome = 0;
  double probability = 0.0;
  std::optional<StateVector> remainder;
};
std::array<QubitOutcome, 2> measure_qubit(const StateVector& s, int slot,
                                          const std::array<StateVector, 2>& basis);

// --- comparison & sampling --------------------------------------------------

Complex inner(const StateVector& left, const StateVector& right);
bool equal_up_to_phase(const StateVector& x, const StateVector& y,
                       double tolerance = tol::kPhaseEquality);

std::array<double, 3> bloch_vector(const StateVector& qubit);
StateVector state_from_bloch(double theta, double phi);

/// Mixes a base seed with a stream number (splitmix64 finalizer); used to
/// hand independent deterministic streams to sub-steps and shots.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

StateVector random_pure_qubit(std::uint64_t seed);
QubitOperator random_unitary_qubit(std::uint64_t seed);
QubitOperator z_rotation(double angle);

/// Exact Haar average of a single-qubit function of degree <= 3 in |a><a|,
/// evaluated on the six octahedron states.
double haar_average(const std::function<double(const StateVector&)>& f);

}  // namespace qswitch
