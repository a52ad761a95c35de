#pragma once

// Sequential, logically-clocked protocol harness. The quantum register is
// owned by the session; parties own slot indices and exchange classical
// messages and qubit hand-overs through a FIFO channel. Every action is
// logged as a ProtocolEvent.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qswitch/qcore.hpp"
#include "qswitch/switchboard.hpp"

namespace qswitch::parties {

enum class EventKind {
  BellMeasure,
  ClassicalBroadcast,
  ClassicalSend,
  QubitTransfer,
  Correction,
  RouteDecision,
  Idle,
};
std::string kind_name(EventKind k);
std::optional<EventKind> parse_kind(std::string_view name);

struct BellMeasurePayload {
  std::array<int, 2> slots{};
  BellIndex outcome;
};
struct BroadcastPayload {
  std::vector<int> bits;
  std::vector<Party> recipients;
};
struct SendPayload {
  std::vector<int> bits;
  Party recipient = Party::Bob;
};
struct TransferPayload {
  int slot = 0;
  Party recipient = Party::Bob;
};
struct CorrectionPayload {
  int slot = 0;
  BellIndex mn;
  std::optional<BellIndex> kl;  // present for demultiplexer corrections
  Pauli pauli = Pauli::I;
  double fidelity = 0.0;
  bool uses_classical_bits = true;
};
struct RouteDecisionPayload {
  Route route = Route::ToBob;
  Party directed = Party::Dick;  // told to hand over their qubit
  Party recipient = Party::Charlene;
};
struct IdlePayload {};

using EventPayload = std::variant<BellMeasurePayload, BroadcastPayload, SendPayload,
                                  TransferPayload, CorrectionPayload, RouteDecisionPayload,
                                  IdlePayload>;

struct ProtocolEvent {
  long seq = 0;
  Party actor = Party::Alice;
  EventPayload payload;

  EventKind kind() const;
};

struct ProtocolTranscript {
  std::vector<ProtocolEvent> events;
  std::optional<Route> route;  // empty for telecloning sessions
  double final_fidelity = 0.0;
  std::uint64_t seed = 0;
  std::array<double, 3> alpha_bloch{};
};

struct SessionOptions {
  /// Idle events Alice inserts between her broadcast and the route decision.
  int route_delay = 0;
};

ProtocolTranscript run_session(Route route, const StateVector& alpha, std::uint64_t seed,
                               const SessionOptions& options = {});

/// Stops after the clone corrections; final_fidelity is Bob's clone fidelity
/// and each party's value sits in its Correction event.
ProtocolTranscript run_telecloning_session(const StateVector& alpha, std::uint64_t seed);

struct CloneFidelities {
  double bob = 0.0;
  double charlene = 0.0;
  double dick = 0.0;
};
CloneFidelities clone_fidelities(const ProtocolTranscript& transcript);

/// Checks sequence order, payload shapes and causality; throws
/// ValidationError naming the first offending event.
void validate(const ProtocolTranscript& transcript);

/// Re-executes the transcript with its recorded outcomes forced and returns
/// the recomputed final fidelity.
double replay(const ProtocolTranscript& transcript);

/// Bob's marginal after Alice's measurement, averaged over her outcomes,
/// before any classical message arrives.
DensityMatrix bob_marginal_before_communication(const StateVector& alpha);

/// Largest pairwise trace distance of that marginal over `samples` inputs.
double no_signaling_check(int samples, std::uint64_t seed);

/// Reconstructs a unit state from a Bloch vector (global phase is fixed).
StateVector state_from_bloch_vector(const std::array<double, 3>& bloch);

// Line-delimited JSON records: header, one line per event, footer.
std::string serialize(const ProtocolTranscript& transcript);
ProtocolTranscript parse_transcript(std::string_view text);

}  // namespace qswitch::parties
