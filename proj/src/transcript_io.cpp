#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "qswitch/parties.hpp"

namespace qswitch::parties {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kSchema = "qswitch/1";

// Rounds to 12 significant digits; the shortest round-trip form of the result
// has at most 12 digits, so the JSON text is stable.
double twelve_digits(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

Json payload_json(const EventPayload& payload) {
  return std::visit(
      [](const auto& p) -> Json {
        using P = std::decay_t<decltype(p)>;
        Json j = Json::object();
        if constexpr (std::is_same_v<P, BellMeasurePayload>) {
          j["slots"] = p.slots;
          j["outcome"] = p.outcome.label();
        } else if constexpr (std::is_same_v<P, BroadcastPayload>) {
          j["bits"] = p.bits;
          Json to = Json::array();
          for (Party r : p.recipients) to.push_back(party_name(r));
          j["recipients"] = to;
        } else if constexpr (std::is_same_v<P, SendPayload>) {
          j["bits"] = p.bits;
          j["recipient"] = party_name(p.recipient);
        } else if constexpr (std::is_same_v<P, TransferPayload>) {
          j["slot"] = p.slot;
          j["recipient"] = party_name(p.recipient);
        } else if constexpr (std::is_same_v<P, CorrectionPayload>) {
          j["slot"] = p.slot;
          j["mn"] = p.mn.label();
          if (p.kl) j["kl"] = p.kl->label();
          j["unitary"] = std::string(1, pauli_name(p.pauli));
          j["fidelity"] = twelve_digits(p.fidelity);
          j["classical_bits"] = p.uses_classical_bits;
          if (!p.uses_classical_bits) j["note"] = "no classical bits required";
        } else if constexpr (std::is_same_v<P, RouteDecisionPayload>) {
          j["route"] = route_name(p.route);
          j["directed"] = party_name(p.directed);
          j["recipient"] = party_name(p.recipient);
        }
        return j;
      },
      payload);
}

[[noreturn]] void bad_record(std::size_t line, const std::string& why) {
  throw DomainError("transcript line " + std::to_string(line) + ": " + why);
}

Party party_field(const Json& j, const char* key, std::size_t line) {
  const auto p = parse_party(j.at(key).get<std::string>());
  if (!p) bad_record(line, std::string("unknown party in '") + key + "'");
  return *p;
}

BellIndex bell_field(const Json& j, const char* key, std::size_t line) {
  const auto s = j.at(key).get<std::string>();
  if (s.size() != 2 || (s[0] != '0' && s[0] != '1') || (s[1] != '0' && s[1] != '1')) {
    bad_record(line, std::string("bad Bell label in '") + key + "'");
  }
  return {s[0] - '0', s[1] - '0'};
}

Pauli pauli_field(const Json& j, std::size_t line) {
  const auto s = j.at("unitary").get<std::string>();
  for (Pauli p : kAllPaulis) {
    if (s.size() == 1 && s[0] == pauli_name(p)) return p;
  }
  bad_record(line, "unknown unitary label");
}

EventPayload parse_payload(EventKind kind, const Json& j, std::size_t line) {
  switch (kind) {
    case EventKind::BellMeasure:
      return BellMeasurePayload{j.at("slots").get<std::array<int, 2>>(), bell_field(j, "outcome", line)};
    case EventKind::ClassicalBroadcast: {
      BroadcastPayload p;
      p.bits = j.at("bits").get<std::vector<int>>();
      for (const auto& r : j.at("recipients")) {
        const auto party = parse_party(r.get<std::string>());
        if (!party) bad_record(line, "unknown recipient");
        p.recipients.push_back(*party);
      }
      return p;
    }
    case EventKind::ClassicalSend:
      return SendPayload{j.at("bits").get<std::vector<int>>(), party_field(j, "recipient", line)};
    case EventKind::QubitTransfer:
      return TransferPayload{j.at("slot").get<int>(), party_field(j, "recipient", line)};
    case EventKind::Correction: {
      CorrectionPayload p;
      p.slot = j.at("slot").get<int>();
      p.mn = bell_field(j, "mn", line);
      if (j.contains("kl")) p.kl = bell_field(j, "kl", line);
      p.pauli = pauli_field(j, line);
      p.fidelity = j.at("fidelity").get<double>();
      p.uses_classical_bits = j.at("classical_bits").get<bool>();
      return p;
    }
    case EventKind::RouteDecision: {
      const auto route = parse_route(j.at("route").get<std::string>());
      if (!route) bad_record(line, "unknown route");
      return RouteDecisionPayload{*route, party_field(j, "directed", line),
                                  party_field(j, "recipient", line)};
    }
    case EventKind::Idle:
      return IdlePayload{};
  }
  bad_record(line, "unknown event kind");
}

}  // namespace

std::string serialize(const ProtocolTranscript& transcript) {
  std::ostringstream out;
  Json header;
  header["record"] = "header";
  header["schema"] = kSchema;
  header["session"] = transcript.route ? "demux" : "telecloning";
  header["route"] = transcript.route ? Json(route_name(*transcript.route)) : Json(nullptr);
  header["seed"] = transcript.seed;
  header["alpha_bloch"] = transcript.alpha_bloch;
  out << header.dump() << '\n';
  for (const auto& e : transcript.events) {
    Json j;
    j["record"] = "event";
    j["seq"] = e.seq;
    j["kind"] = kind_name(e.kind());
    j["actor"] = party_name(e.actor);
    j["payload"] = payload_json(e.payload);
    out << j.dump() << '\n';
  }
  Json footer;
  footer["record"] = "footer";
  footer["final_fidelity"] = twelve_digits(transcript.final_fidelity);
  out << footer.dump() << '\n';
  return out.str();
}

ProtocolTranscript parse_transcript(std::string_view text) {
  ProtocolTranscript t;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  bool header_seen = false;
  bool footer_seen = false;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      bad_record(number, e.what());
    }
    try {
      const auto record = j.at("record").get<std::string>();
      if (record == "header") {
        if (j.at("schema").get<std::string>() != kSchema) bad_record(number, "unsupported schema");
        if (!j.at("route").is_null()) {
          const auto route = parse_route(j.at("route").get<std::string>());
          if (!route) bad_record(number, "unknown route");
          t.route = route;
        }
        t.seed = j.at("seed").get<std::uint64_t>();
        t.alpha_bloch = j.at("alpha_bloch").get<std::array<double, 3>>();
        header_seen = true;
      } else if (record == "event") {
        if (!header_seen || footer_seen) bad_record(number, "event outside header/footer");
        const auto kind = parse_kind(j.at("kind").get<std::string>());
        if (!kind) bad_record(number, "unknown event kind");
        t.events.push_back({j.at("seq").get<long>(), party_field(j, "actor", number),
                            parse_payload(*kind, j.at("payload"), number)});
      } else if (record == "footer") {
        t.final_fidelity = j.at("final_fidelity").get<double>();
        footer_seen = true;
      } else {
        bad_record(number, "unknown record type");
      }
    } catch (const nlohmann::json::exception& e) {
      bad_record(number, e.what());
    }
  }
  if (!header_seen || !footer_seen) throw DomainError("transcript: missing header or footer");
  return t;
}

}  // namespace qswitch::parties
