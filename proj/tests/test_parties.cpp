#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "qswitch/parties.hpp"

using namespace qswitch;
using namespace qswitch::parties;
namespace sb = qswitch::switchboard;

namespace {

StateVector alpha_sample(int k) { return random_pure_qubit(derive_seed(555, static_cast<std::uint64_t>(k))); }

template <typename P>
std::vector<const ProtocolEvent*> events_of(const ProtocolTranscript& t) {
  std::vector<const ProtocolEvent*> out;
  for (const auto& e : t.events) {
    if (std::holds_alternative<P>(e.payload)) out.push_back(&e);
  }
  return out;
}

}  // namespace

TEST_CASE("demux sessions deliver the state") {
  for (Route route : {Route::ToBob, Route::ToCharlene}) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto t = run_session(route, alpha_sample(static_cast<int>(seed)), seed);
      CHECK(std::abs(t.final_fidelity - 1.0) < 1e-12);
      CHECK(t.route == route);
      CHECK_NOTHROW(validate(t));
      CHECK(std::abs(replay(t) - t.final_fidelity) < 1e-12);
    }
  }
}

TEST_CASE("demux event structure") {
  const auto t = run_session(Route::ToCharlene, alpha_sample(1), 5);
  const auto broadcasts = events_of<BroadcastPayload>(t);
  REQUIRE(broadcasts.size() == 1);
  const auto& b = std::get<BroadcastPayload>(broadcasts[0]->payload);
  CHECK(b.bits.size() == 2);
  CHECK(broadcasts[0]->actor == Party::Alice);

  const auto sends = events_of<SendPayload>(t);
  REQUIRE(sends.size() == 1);
  CHECK(std::get<SendPayload>(sends[0]->payload).bits.size() == 2);
  CHECK(sends[0]->actor == Party::Bob);
  CHECK(std::get<SendPayload>(sends[0]->payload).recipient == Party::Charlene);

  const auto transfers = events_of<TransferPayload>(t);
  REQUIRE(transfers.size() == 1);
  CHECK(transfers[0]->actor == Party::Dick);
  CHECK(std::get<TransferPayload>(transfers[0]->payload).recipient == Party::Bob);

  const auto to_bob = run_session(Route::ToBob, alpha_sample(1), 5);
  const auto tb = events_of<TransferPayload>(to_bob);
  REQUIRE(tb.size() == 1);
  CHECK(std::get<TransferPayload>(tb[0]->payload).recipient == Party::Charlene);

  long previous = 0;
  for (const auto& e : t.events) {
    CHECK(e.seq == previous + 1);
    previous = e.seq;
  }
}

TEST_CASE("delaying the route decision changes nothing") {
  const auto alpha = alpha_sample(2);
  const auto base = run_session(Route::ToBob, alpha, 17);
  for (int delay : {1, 3, 10}) {
    const auto t = run_session(Route::ToBob, alpha, 17, {delay});
    CHECK(std::abs(t.final_fidelity - base.final_fidelity) < 1e-15);
    CHECK(events_of<IdlePayload>(t).size() == static_cast<std::size_t>(delay));
    CHECK_NOTHROW(validate(t));
  }
  CHECK_THROWS_AS(run_session(Route::ToBob, alpha, 17, {-1}), DomainError);
}

TEST_CASE("telecloning session") {
  const auto t = run_telecloning_session(alpha_sample(4), 3);
  CHECK_FALSE(t.route);
  const auto f = clone_fidelities(t);
  CHECK(f.bob == doctest::Approx(5.0 / 6.0).epsilon(1e-10));
  CHECK(f.charlene == doctest::Approx(5.0 / 6.0).epsilon(1e-10));
  CHECK(f.dick == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(events_of<BroadcastPayload>(t).size() == 1);
  bool dick_seen = false;
  for (const auto* e : events_of<CorrectionPayload>(t)) {
    if (e->actor == Party::Dick) {
      dick_seen = true;
      CHECK_FALSE(std::get<CorrectionPayload>(e->payload).uses_classical_bits);
    }
  }
  CHECK(dick_seen);
  CHECK(serialize(t).find("\"note\":\"no classical bits required\"") != std::string::npos);
  CHECK_NOTHROW(validate(t));
  CHECK(std::abs(replay(t) - f.bob) < 1e-12);
}

TEST_CASE("validation catches causality violations") {
  const auto t = run_session(Route::ToBob, alpha_sample(5), 8);

  SUBCASE("correction before the idle party's report") {
    auto bad = t;
    auto it = std::find_if(bad.events.begin(), bad.events.end(),
                           [](const ProtocolEvent& e) { return e.kind() == EventKind::ClassicalSend; });
    REQUIRE(it != bad.events.end());
    const long seq = it->seq;
    bad.events.erase(it);
    for (auto& e : bad.events) {
      if (e.seq > seq) --e.seq;
    }
    CHECK_THROWS_AS(validate(bad), ValidationError);
  }
  SUBCASE("measuring a qubit not yet held") {
    auto bad = t;
    auto it = std::find_if(bad.events.begin(), bad.events.end(),
                           [](const ProtocolEvent& e) { return e.kind() == EventKind::QubitTransfer; });
    REQUIRE(it != bad.events.end());
    bad.events.erase(it);
    try {
      validate(bad);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(e.seq() > 0);
    }
  }
  SUBCASE("tampered broadcast bits") {
    auto bad = t;
    for (auto& e : bad.events) {
      if (auto* b = std::get_if<BroadcastPayload>(&e.payload)) b->bits[0] ^= 1;
    }
    CHECK_THROWS_AS(validate(bad), ValidationError);
  }
  SUBCASE("three-bit payload") {
    auto bad = t;
    for (auto& e : bad.events) {
      if (auto* b = std::get_if<SendPayload>(&e.payload)) b->bits.push_back(0);
    }
    CHECK_THROWS_AS(validate(bad), ValidationError);
  }
  SUBCASE("out-of-order sequence numbers") {
    auto bad = t;
    std::swap(bad.events[1].seq, bad.events[2].seq);
    CHECK_THROWS_AS(validate(bad), ValidationError);
  }
  SUBCASE("wrong recorded correction") {
    auto bad = t;
    for (auto& e : bad.events) {
      if (auto* c = std::get_if<CorrectionPayload>(&e.payload)) {
        c->pauli = c->pauli == Pauli::X ? Pauli::Z : Pauli::X;
      }
    }
    CHECK_THROWS_AS(replay(bad), ValidationError);
  }
}

TEST_CASE("transcript serialization round trip") {
  const auto t = run_session(Route::ToCharlene, alpha_sample(6), 21, {2});
  const auto text = serialize(t);
  CHECK(text.find("\"schema\":\"qswitch/1\"") != std::string::npos);
  const auto parsed = parse_transcript(text);
  CHECK(serialize(parsed) == text);
  CHECK(parsed.events.size() == t.events.size());
  CHECK(std::abs(replay(parsed) - 1.0) < 1e-9);

  const auto tele = run_telecloning_session(alpha_sample(6), 21);
  CHECK(serialize(parse_transcript(serialize(tele))) == serialize(tele));

  CHECK_THROWS_AS(parse_transcript("{\"record\":\"header\"}\n"), DomainError);
  CHECK_THROWS_AS(parse_transcript("not json\n"), DomainError);
  auto broken = text;
  broken.replace(broken.find("qswitch/1"), 9, "qswitch/9");
  CHECK_THROWS_AS(parse_transcript(broken), DomainError);
}

TEST_CASE("same seed, same transcript") {
  const auto alpha = alpha_sample(7);
  CHECK(serialize(run_session(Route::ToBob, alpha, 99)) == serialize(run_session(Route::ToBob, alpha, 99)));
  CHECK(serialize(run_telecloning_session(alpha, 99)) == serialize(run_telecloning_session(alpha, 99)));
}

TEST_CASE("no-signaling") {
  const auto alpha = alpha_sample(8);
  // Before Alice acts, Bob holds half of a singlet-like mixture: I/2.
  const std::array<int, 1> bob{sb::register_slot(Party::Bob)};
  const auto before = reduced_state(sb::protocol_register(alpha), bob);
  CHECK((before.matrix() - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  const auto ref = oracle::partial_trace(sb::protocol_register(alpha).amplitudes(), 5, {2});
  CHECK((before.matrix() - ref).cwiseAbs().maxCoeff() < 1e-12);

  const auto m1 = bob_marginal_before_communication(alpha_sample(9));
  const auto m2 = bob_marginal_before_communication(alpha_sample(10));
  CHECK(trace_distance(m1, m2) < 1e-12);
  CHECK(no_signaling_check(20, 1) < 1e-10);
  CHECK_THROWS_AS(no_signaling_check(0, 1), DomainError);
}

TEST_CASE("sampled outcome statistics") {
  constexpr int kShots = 100000;
  std::array<int, 4> alice{}, idle{};
  const auto alpha = alpha_sample(11);
  for (int i = 0; i < kShots; ++i) {
    const auto t = run_session(Route::ToBob, alpha, derive_seed(4, static_cast<std::uint64_t>(i)));
    const auto measures = events_of<BellMeasurePayload>(t);
    REQUIRE(measures.size() == 2);
    ++alice[static_cast<std::size_t>(std::get<BellMeasurePayload>(measures[0]->payload).outcome.ordinal())];
    ++idle[static_cast<std::size_t>(std::get<BellMeasurePayload>(measures[1]->payload).outcome.ordinal())];
  }
  const std::array<double, 4> idle_p = {1.0 / 12, 1.0 / 12, 1.0 / 12, 3.0 / 4};
  for (std::size_t k = 0; k < 4; ++k) {
    const double sa = std::sqrt(0.25 * 0.75 / kShots);
    CHECK(std::abs(alice[k] / double(kShots) - 0.25) <= 3 * sa);
    const double si = std::sqrt(idle_p[k] * (1 - idle_p[k]) / kShots);
    CHECK(std::abs(idle[k] / double(kShots) - idle_p[k]) <= 3 * si);
  }
}

TEST_CASE("bloch vector reconstruction") {
  const auto a = alpha_sample(12);
  CHECK(equal_up_to_phase(state_from_bloch_vector(bloch_vector(a)), a));
}
