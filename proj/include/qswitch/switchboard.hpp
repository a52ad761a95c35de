#pragma once

// The four-qubit switchboard state, its Bell-pair expansions, the teleportation
// correction table and the fidelity analysis of telecloning, demultiplexing
// and the GHZ baseline.
//
// Protocol register layout (5 qubits): slot 0 is Alice's auxiliary qubit and
// slot k (k = 1..4) is qubit k of the switchboard state
//     |psi> = (|(11)_12>|(11)_34> - |(11)_14>|(11)_23>) / sqrt(3).
// Qubit 1 is Alice's and qubit 2 Bob's. |psi> is symmetric under exchanging
// qubits 2 and 4, so Charlene (Bob's mirror) holds qubit 4 and Dick holds
// qubit 3. The Alice-Bob and Alice-Charlene marginals are then identical
// Werner states.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "qswitch/qcore.hpp"

namespace qswitch {

enum class Party { Alice, Bob, Charlene, Dick };
inline constexpr std::array<Party, 4> kAllParties = {Party::Alice, Party::Bob, Party::Charlene,
                                                     Party::Dick};
std::string party_name(Party p);
std::optional<Party> parse_party(std::string_view name);

enum class Route { ToBob, ToCharlene };
std::string route_name(Route r);
std::optional<Route> parse_route(std::string_view name);

namespace switchboard {

inline constexpr int kAuxSlot = 0;
inline constexpr int kRegisterQubits = 5;

/// Slot of the party's qubit in the 5-qubit protocol register.
int register_slot(Party p);
/// Slot of the party's qubit in the bare 4-qubit switchboard state.
inline int state_slot(Party p) { return register_slot(p) - 1; }

/// Bell-expansion coefficients lambda_kl and their common normalizer.
struct Lambda {
  static double value(BellIndex kl);
  static double normalizer();  // 1 / (2 sqrt 3)
};

class SwitchboardState {
 public:
  explicit SwitchboardState(StateVector state);
  const StateVector& state() const noexcept { return state_; }

 private:
  StateVector state_;
};

SwitchboardState build_switchboard();

/// The two pair-expansions of |psi>:
///   AliceBob:      Bell pairs on qubits (1,2) and (3,4)
///   AliceCharlene: Bell pairs on qubits (1,4) and (3,2), the Bob<->Charlene
///                  mirror of the first
/// Each pair is listed in the order its Bell label refers to.
enum class Pairing { AliceBob, AliceCharlene };
std::string pairing_name(Pairing p);  // "12|34" / "13|24" (party numbering)
std::array<std::array<int, 2>, 2> pairing_slots(Pairing p);  // 4-qubit state slots

/// sum_kl coefficient[kl] |(kl)>|(kl)> over the pairing, unnormalized.
Vector decomposition_expansion(Pairing p, const std::array<Complex, 4>& coefficients);

/// lambda_kl / (2 sqrt 3), optionally with the sign of one term flipped.
std::array<Complex, 4> lambda_coefficients(std::optional<BellIndex> flipped = std::nullopt);

/// || psi - expansion || with the lambda coefficients.
double verify_decomposition(Pairing p, std::optional<BellIndex> flipped = std::nullopt);

struct WernerParams {
  double singlet_weight = 0.0;  // p in p P_singlet + (1 - p) I/4
  double noise_fraction = 0.0;  // 1 - p
  double fit_distance = 0.0;    // max-abs distance to the fitted Werner state
  double predicted_fidelity() const { return (singlet_weight + 1.0) / 2.0; }
};

/// Werner parameters of the Alice-party marginal; StructuralError when the
/// marginal is further than 1e-10 from Werner form.
WernerParams reduced_channel(Party party);

/// U_{mn,kl}: the single-qubit operator left on the receiver when Alice
/// Bell-measures (aux, her qubit) with outcome mn and the channel pair is in
/// |(kl)>. Entries are Paulis times a phase.
class CorrectionTable {
 public:
  struct Entry {
    Pauli pauli = Pauli::I;
    Complex phase{1.0, 0.0};
    QubitOperator unitary() const;
  };

  const Entry& at(BellIndex mn, BellIndex kl) const {
    return entries_[static_cast<std::size_t>(mn.ordinal())][static_cast<std::size_t>(kl.ordinal())];
  }

 private:
  friend CorrectionTable derive_corrections();
  std::array<std::array<Entry, 4>, 4> entries_{};
};

/// Searches the Pauli group for every (mn, kl) and validates the table by
/// reconstructing |alpha>|psi> for probe states; throws StructuralError on
/// failure.
CorrectionTable derive_corrections();

/// Cached result of derive_corrections().
const CorrectionTable& corrections();

/// || |alpha>|psi> - sum lambda_kl/(4 sqrt 3) |(mn)_01> U_{mn,kl}|alpha> |(kl)_34> ||
double reconstruction_residual(const CorrectionTable& table, const StateVector& alpha);

/// |alpha> (x) |psi>, slots as documented above.
StateVector protocol_register(const StateVector& alpha);

std::vector<MeasurementResult> alice_step(const StateVector& alpha, const BellMeasureMode& mode);

/// sum_kl lambda_kl/(2 sqrt 3) U_{mn,kl}|alpha> |(kl)_34> on qubits (2, 3, 4).
StateVector collapsed_state(BellIndex mn, const StateVector& alpha);

struct CloneReport {
  Party party = Party::Bob;
  std::array<double, 4> per_outcome_fidelity{};  // indexed by BellIndex::ordinal
  std::array<double, 4> outcome_probability{};
  double average_fidelity = 0.0;
};

/// The party applies U_{mn,11}^dagger (the singlet-channel correction) after
/// Alice's outcome mn.
CloneReport clone_fidelity(Party party, const StateVector& alpha);

using StepMode = std::variant<SampleMode, ForcedMode>;

struct DemuxResult {
  Route route = Route::ToBob;
  BellIndex mn;
  BellIndex kl;
  double alice_probability = 0.0;
  double idle_probability = 0.0;  // conditional on mn
  Pauli correction = Pauli::I;
  StateVector output;
  double fidelity = 0.0;
};

struct RouteGeometry {
  Party target;
  Party idle;
  std::array<int, 2> idle_pair;  // register slots: (Dick's qubit, idle party's own)
};
RouteGeometry route_geometry(Route route);

DemuxResult demux(Route route, const StateVector& alpha, const StepMode& alice_mode,
                  const StepMode& idle_mode);

/// demux with an arbitrary 4-qubit shared state in place of |psi>.
DemuxResult demux_with_shared_state(const StateVector& shared, Route route,
                                    const StateVector& alpha, const StepMode& alice_mode,
                                    const StepMode& idle_mode);

/// Probability-weighted mean demux fidelity over all 16 branches.
double mean_demux_fidelity(const StateVector& shared, Route route, const StateVector& alpha);

/// The Eq.-2-style expansion with one term's sign flipped, normalized.
StateVector phase_altered_switchboard(BellIndex flipped);

struct GhzReport {
  double bob_clone_fidelity = 0.0;       // for the given alpha
  double charlene_clone_fidelity = 0.0;  // for the given alpha
  double bob_clone_haar_average = 0.0;
  double charlene_clone_haar_average = 0.0;
  double teleport_to_bob = 0.0;  // worst branch after the idle party's +/- measurement
  double teleport_to_charlene = 0.0;
};

/// GHZ (|000>+|111>)/sqrt2 on Alice, Bob, Charlene. Corrections are the
/// Paulis maximizing the Haar-averaged fidelity of each branch.
GhzReport ghz_baseline(const StateVector& alpha);

enum class NoiseChannel { CollectiveZRotation, CollectiveUnitary };

struct NoiseReport {
  double switchboard_fidelity = 0.0;
  double ghz_fidelity = 0.0;
};

StateVector ghz_state(int n_qubits);

/// |<orig| U^{(x)4} |orig>|^2 for the switchboard and the 4-qubit GHZ state.
NoiseReport collective_noise_fidelity(const QubitOperator& u);

/// Means over `samples` collective unitaries drawn from derived seed streams.
NoiseReport noise_robustness(NoiseChannel channel, int samples, std::uint64_t seed);

}  // namespace switchboard
}  // namespace qswitch
