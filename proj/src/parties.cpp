#include "qswitch/parties.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace qswitch::parties {

namespace sb = switchboard;

std::string kind_name(EventKind k) {
  switch (k) {
    case EventKind::BellMeasure: return "BellMeasure";
    case EventKind::ClassicalBroadcast: return "ClassicalBroadcast";
    case EventKind::ClassicalSend: return "ClassicalSend";
    case EventKind::QubitTransfer: return "QubitTransfer";
    case EventKind::Correction: return "Correction";
    case EventKind::RouteDecision: return "RouteDecision";
    case EventKind::Idle: return "Idle";
  }
  return "?";
}

std::optional<EventKind> parse_kind(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(EventKind::Idle); ++k) {
    if (kind_name(static_cast<EventKind>(k)) == name) return static_cast<EventKind>(k);
  }
  return std::nullopt;
}

EventKind ProtocolEvent::kind() const { return static_cast<EventKind>(payload.index()); }

namespace {

std::vector<int> bits_of(BellIndex idx) { return {idx.a, idx.b}; }

constexpr std::array<int, 2> kAlicePair = {sb::kAuxSlot, 1};

std::array<Party, sb::kRegisterQubits> initial_owners() {
  std::array<Party, sb::kRegisterQubits> owners{};
  owners[sb::kAuxSlot] = Party::Alice;
  for (Party p : kAllParties) owners[static_cast<std::size_t>(sb::register_slot(p))] = p;
  return owners;
}

Party idle_party(Route route) { return sb::route_geometry(route).idle; }

// --- session -----------------------------------------------------------------

struct BitsMessage {
  BellIndex value;
};
struct QubitMessage {
  int slot = 0;
};
struct DirectiveMessage {
  Party recipient = Party::Bob;
};

struct Message {
  Party from = Party::Alice;
  Party to = Party::Alice;
  std::variant<BitsMessage, QubitMessage, DirectiveMessage> body;
};

class Session {
 public:
  Session(const StateVector& alpha, std::uint64_t seed, std::optional<Route> route,
          SessionOptions options)
      : alpha_(alpha),
        seed_(seed),
        route_(route),
        options_(options),
        register_(sb::protocol_register(alpha)),
        owners_(initial_owners()) {
    transcript_.route = route;
    transcript_.seed = seed;
    transcript_.alpha_bloch = bloch_vector(alpha);
  }

  ProtocolTranscript run() {
    alice_start();
    while (!channel_.empty()) {
      const Message message = channel_.front();
      channel_.pop_front();
      deliver(message);
    }
    if (!route_) evaluate_dick_clone();
    return std::move(transcript_);
  }

 private:
  // Per-party view: what each receiver has learned so far.
  struct Inbox {
    std::optional<BellIndex> from_alice;
    std::optional<BellIndex> from_idle;
    bool corrected = false;
  };

  void log(Party actor, EventPayload payload) {
    transcript_.events.push_back({next_seq_++, actor, std::move(payload)});
  }

  BellIndex bell_measure(Party actor, std::array<int, 2> slots, std::uint64_t stream) {
    for (int s : slots) {
      if (owners_[static_cast<std::size_t>(s)] != actor) {
        throw ContractError(party_name(actor) + " measured a qubit it does not hold");
      }
    }
    auto result = measure_bell(register_, slots, SampleMode{derive_seed(seed_, stream)}).front();
    register_ = std::move(*result.post_state);
    log(actor, BellMeasurePayload{slots, result.outcome});
    return result.outcome;
  }

  void alice_start() {
    const BellIndex mn = bell_measure(Party::Alice, kAlicePair, 1);
    log(Party::Alice, BroadcastPayload{bits_of(mn), {Party::Bob, Party::Charlene}});
    for (Party to : {Party::Bob, Party::Charlene}) {
      channel_.push_back({Party::Alice, to, BitsMessage{mn}});
    }
    if (!route_) return;
    for (int i = 0; i < options_.route_delay; ++i) log(Party::Alice, IdlePayload{});
    const Party idle = idle_party(*route_);
    log(Party::Alice, RouteDecisionPayload{*route_, Party::Dick, idle});
    channel_.push_back({Party::Alice, Party::Dick, DirectiveMessage{idle}});
  }

  void deliver(const Message& message) {
    std::visit([&](const auto& body) { on_message(message.from, message.to, body); },
               message.body);
  }

  void on_message(Party from, Party to, const BitsMessage& bits) {
    Inbox& inbox = inboxes_[to];
    if (from == Party::Alice) {
      inbox.from_alice = bits.value;
    } else {
      inbox.from_idle = bits.value;
    }
    if (!route_) {
      clone_correction(to);
    } else if (to == sb::route_geometry(*route_).target && inbox.from_alice && inbox.from_idle) {
      demux_correction(to);
    }
  }

  void on_message(Party, Party to, const DirectiveMessage& directive) {
    const int slot = sb::register_slot(to);
    owners_[static_cast<std::size_t>(slot)] = directive.recipient;
    log(to, TransferPayload{slot, directive.recipient});
    channel_.push_back({to, directive.recipient, QubitMessage{slot}});
  }

  void on_message(Party, Party to, const QubitMessage& qubit) {
    const std::array<int, 2> pair = {qubit.slot, sb::register_slot(to)};
    const BellIndex kl = bell_measure(to, pair, 2);
    const Party target = sb::route_geometry(*route_).target;
    log(to, SendPayload{bits_of(kl), target});
    channel_.push_back({to, target, BitsMessage{kl}});
  }

  double fidelity_of(Party p, const StateVector& reg) const {
    const std::array<int, 1> keep = {sb::register_slot(p)};
    return fidelity_with_pure(reduced_state(reg, keep), alpha_);
  }

  void clone_correction(Party who) {
    Inbox& inbox = inboxes_[who];
    if (inbox.corrected || !inbox.from_alice) return;
    const BellIndex mn = *inbox.from_alice;
    const auto& entry = sb::corrections().at(mn, kSinglet);
    const int slot = sb::register_slot(who);
    register_ = apply_on_qubits(register_, entry.unitary().adjoint(), std::array{slot});
    const double f = fidelity_of(who, register_);
    inbox.corrected = true;
    log(who, CorrectionPayload{slot, mn, std::nullopt, entry.pauli, f, true});
    if (who == Party::Bob) transcript_.final_fidelity = f;
  }

  // Dick never receives Alice's bits; his clone is scored against the same
  // singlet-channel correction rule on a copy of the register.
  void evaluate_dick_clone() {
    const auto& first = std::get<BellMeasurePayload>(transcript_.events.front().payload);
    const BellIndex mn = first.outcome;
    const auto& entry = sb::corrections().at(mn, kSinglet);
    const int slot = sb::register_slot(Party::Dick);
    const StateVector scored = apply_on_qubits(register_, entry.unitary().adjoint(), std::array{slot});
    log(Party::Dick, CorrectionPayload{slot, mn, std::nullopt, entry.pauli,
                                       fidelity_of(Party::Dick, scored), false});
  }

  void demux_correction(Party who) {
    Inbox& inbox = inboxes_[who];
    if (inbox.corrected) return;
    const BellIndex mn = *inbox.from_alice;
    const BellIndex kl = *inbox.from_idle;
    const auto& entry = sb::corrections().at(mn, kl);
    const int slot = sb::register_slot(who);
    register_ = apply_on_qubits(register_, entry.unitary().adjoint(), std::array{slot});
    const double f = fidelity_of(who, register_);
    inbox.corrected = true;
    log(who, CorrectionPayload{slot, mn, kl, entry.pauli, f, true});
    transcript_.final_fidelity = f;
  }

  StateVector alpha_;
  std::uint64_t seed_;
  std::optional<Route> route_;
  SessionOptions options_;
  StateVector register_;
  std::array<Party, sb::kRegisterQubits> owners_;
  std::deque<Message> channel_;
  std::map<Party, Inbox> inboxes_;
  ProtocolTranscript transcript_;
  long next_seq_ = 1;
};

void require_alpha(const StateVector& alpha) {
  if (alpha.n_qubits() != 1) throw DomainError("session input must be a single qubit");
}

}  // namespace

ProtocolTranscript run_session(Route route, const StateVector& alpha, std::uint64_t seed,
                               const SessionOptions& options) {
  require_alpha(alpha);
  if (options.route_delay < 0) throw DomainError("run_session: negative route delay");
  return Session(alpha, seed, route, options).run();
}

ProtocolTranscript run_telecloning_session(const StateVector& alpha, std::uint64_t seed) {
  require_alpha(alpha);
  return Session(alpha, seed, std::nullopt, {}).run();
}

CloneFidelities clone_fidelities(const ProtocolTranscript& transcript) {
  CloneFidelities out;
  for (const auto& e : transcript.events) {
    if (const auto* c = std::get_if<CorrectionPayload>(&e.payload)) {
      if (e.actor == Party::Bob) out.bob = c->fidelity;
      if (e.actor == Party::Charlene) out.charlene = c->fidelity;
      if (e.actor == Party::Dick) out.dick = c->fidelity;
    }
  }
  return out;
}

// --- validation & replay ---------------------------------------------------------

namespace {

struct Ledger {
  std::array<Party, sb::kRegisterQubits> owners = initial_owners();
  std::optional<BellIndex> alice_outcome;
  std::optional<std::vector<Party>> broadcast_to;
  std::map<Party, BellIndex> last_measurement;
  std::map<Party, BellIndex> received_from_idle;
  std::optional<RouteDecisionPayload> route_decision;
  int route_decisions = 0;
};

void check_bits(long seq, const std::vector<int>& bits) {
  if (bits.size() != 2) {
    throw ValidationError(seq, "classical payload must carry exactly 2 bits, got " +
                                   std::to_string(bits.size()));
  }
  for (int b : bits) {
    if (b != 0 && b != 1) throw ValidationError(seq, "classical payload bit out of range");
  }
}

BellIndex bits_to_index(const std::vector<int>& bits) { return {bits[0], bits[1]}; }

void check_event(const ProtocolEvent& e, Ledger& ledger) {
  const long seq = e.seq;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, BellMeasurePayload>) {
          for (int s : p.slots) {
            if (s < 0 || s >= sb::kRegisterQubits) throw ValidationError(seq, "slot out of range");
            if (ledger.owners[static_cast<std::size_t>(s)] != e.actor) {
              throw ValidationError(seq, party_name(e.actor) + " measures slot " +
                                             std::to_string(s) + " before holding it");
            }
          }
          ledger.last_measurement[e.actor] = p.outcome;
          if (e.actor == Party::Alice) ledger.alice_outcome = p.outcome;
        } else if constexpr (std::is_same_v<P, BroadcastPayload>) {
          check_bits(seq, p.bits);
          if (e.actor != Party::Alice) throw ValidationError(seq, "only Alice broadcasts");
          if (!ledger.alice_outcome) throw ValidationError(seq, "broadcast precedes Alice's measurement");
          if (bits_to_index(p.bits) != *ledger.alice_outcome) {
            throw ValidationError(seq, "broadcast bits differ from Alice's outcome");
          }
          ledger.broadcast_to = p.recipients;
        } else if constexpr (std::is_same_v<P, SendPayload>) {
          check_bits(seq, p.bits);
          const auto it = ledger.last_measurement.find(e.actor);
          if (it == ledger.last_measurement.end() || e.actor == Party::Alice) {
            throw ValidationError(seq, "send precedes the sender's Bell measurement");
          }
          if (bits_to_index(p.bits) != it->second) {
            throw ValidationError(seq, "sent bits differ from the sender's outcome");
          }
          ledger.received_from_idle[p.recipient] = it->second;
        } else if constexpr (std::is_same_v<P, TransferPayload>) {
          if (p.slot < 0 || p.slot >= sb::kRegisterQubits) throw ValidationError(seq, "slot out of range");
          if (ledger.owners[static_cast<std::size_t>(p.slot)] != e.actor) {
            throw ValidationError(seq, "transfer of a qubit the actor does not hold");
          }
          if (!ledger.route_decision || ledger.route_decision->directed != e.actor) {
            throw ValidationError(seq, "transfer without a route decision");
          }
          ledger.owners[static_cast<std::size_t>(p.slot)] = p.recipient;
        } else if constexpr (std::is_same_v<P, CorrectionPayload>) {
          if (ledger.owners[static_cast<std::size_t>(p.slot)] != e.actor) {
            throw ValidationError(seq, "correction on a qubit the actor does not hold");
          }
          if (!ledger.alice_outcome || *ledger.alice_outcome != p.mn) {
            throw ValidationError(seq, "correction precedes or contradicts Alice's measurement");
          }
          if (p.uses_classical_bits) {
            const auto& to = ledger.broadcast_to;
            if (!to || std::find(to->begin(), to->end(), e.actor) == to->end()) {
              throw ValidationError(seq, "correction before Alice's bits reached " +
                                             party_name(e.actor));
            }
          }
          if (p.kl) {
            const auto it = ledger.received_from_idle.find(e.actor);
            if (it == ledger.received_from_idle.end() || it->second != *p.kl) {
              throw ValidationError(seq, "correction precedes the idle party's measurement report");
            }
          }
        } else if constexpr (std::is_same_v<P, RouteDecisionPayload>) {
          if (e.actor != Party::Alice) throw ValidationError(seq, "only Alice decides the route");
          if (!ledger.broadcast_to) throw ValidationError(seq, "route decision precedes the broadcast");
          ledger.route_decision = p;
          ++ledger.route_decisions;
        }
      },
      e.payload);
}

}  // namespace

void validate(const ProtocolTranscript& transcript) {
  Ledger ledger;
  long previous = 0;
  bool first = true;
  for (const auto& e : transcript.events) {
    if (!first && e.seq <= previous) throw ValidationError(e.seq, "sequence number not increasing");
    first = false;
    previous = e.seq;
    check_event(e, ledger);
  }
  if (transcript.route) {
    if (ledger.route_decisions != 1 || ledger.route_decision->route != *transcript.route) {
      throw ValidationError(previous, "transcript route has no matching route decision");
    }
  } else if (ledger.route_decisions != 0) {
    throw ValidationError(previous, "telecloning transcript contains a route decision");
  }
}

StateVector state_from_bloch_vector(const std::array<double, 3>& bloch) {
  const double z = std::clamp(bloch[2], -1.0, 1.0);
  return state_from_bloch(std::acos(z), std::atan2(bloch[1], bloch[0]));
}

double replay(const ProtocolTranscript& transcript) {
  validate(transcript);
  const StateVector alpha = state_from_bloch_vector(transcript.alpha_bloch);
  StateVector reg = sb::protocol_register(alpha);
  std::optional<double> result;
  for (const auto& e : transcript.events) {
    if (const auto* m = std::get_if<BellMeasurePayload>(&e.payload)) {
      reg = std::move(*measure_bell(reg, m->slots, ForcedMode{m->outcome}).front().post_state);
    } else if (const auto* c = std::get_if<CorrectionPayload>(&e.payload)) {
      const auto& entry = sb::corrections().at(c->mn, c->kl.value_or(kSinglet));
      if (entry.pauli != c->pauli) throw ValidationError(e.seq, "recorded correction is not U(mn,kl)");
      StateVector corrected = apply_on_qubits(reg, entry.unitary().adjoint(), std::array{c->slot});
      const std::array<int, 1> keep = {c->slot};
      const double f = fidelity_with_pure(reduced_state(corrected, keep), alpha);
      if (c->uses_classical_bits) reg = std::move(corrected);
      const bool defines_result = transcript.route ? c->kl.has_value() : e.actor == Party::Bob;
      if (defines_result) result = f;
    }
  }
  if (!result) throw ValidationError(0, "transcript has no final correction");
  return *result;
}

// --- no-signaling ---------------------------------------------------------------

DensityMatrix bob_marginal_before_communication(const StateVector& alpha) {
  const auto outcomes = sb::alice_step(alpha, EnumerateMode{});
  Matrix avg = Matrix::Zero(2, 2);
  const std::array<int, 1> keep = {sb::register_slot(Party::Bob)};
  for (const auto& r : outcomes) {
    if (!r.post_state) continue;
    avg += r.probability * reduced_state(*r.post_state, keep).matrix();
  }
  return {1, 0.5 * (avg + avg.adjoint())};
}

double no_signaling_check(int samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("no_signaling_check: samples must be >= 1");
  std::vector<DensityMatrix> marginals;
  marginals.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    marginals.push_back(bob_marginal_before_communication(
        random_pure_qubit(derive_seed(seed, static_cast<std::uint64_t>(i)))));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < marginals.size(); ++i) {
    for (std::size_t j = i + 1; j < marginals.size(); ++j) {
      worst = std::max(worst, trace_distance(marginals[i], marginals[j]));
    }
  }
  return worst;
}

}  // namespace qswitch::parties
