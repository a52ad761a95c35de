#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qswitch/qcore.hpp"

using namespace qswitch;

namespace {

StateVector random_state(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vector v(Eigen::Index{1} << n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return StateVector::normalized(n, v);
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("bell states match their defining amplitudes") {
  for (BellIndex idx : kAllBellIndices) {
    CHECK((bell_state(idx).amplitudes() - oracle::bell(idx.a, idx.b)).norm() < 1e-15);
  }
  const auto s = bell_state(kSinglet);
  CHECK(s[1].real() == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(s[2].real() == doctest::Approx(-1 / std::sqrt(2.0)));
  CHECK(std::abs(s[0]) == 0.0);
  CHECK(std::abs(s[3]) == 0.0);
}

TEST_CASE("Bell projectors resolve the identity") {
  Matrix sum = Matrix::Zero(4, 4);
  for (BellIndex idx : kAllBellIndices) sum += bell_state(idx).amplitudes() * bell_state(idx).amplitudes().adjoint();
  CHECK(max_abs(sum - Matrix::Identity(4, 4)) < 1e-12);
}

TEST_CASE("BellIndex") {
  CHECK_THROWS_AS(BellIndex(2, 0), DomainError);
  CHECK(BellIndex::from_ordinal(2) == BellIndex{1, 0});
  CHECK(BellIndex{0, 1}.label() == "01");
}

TEST_CASE("state construction contracts") {
  Vector v(2);
  v << 1.0, 1.0;
  CHECK_THROWS_AS(StateVector(1, v), ContractError);
  CHECK_THROWS_AS(StateVector::normalized(1, Vector::Zero(2)), DomainError);
  CHECK_THROWS_AS(StateVector(2, Vector::Ones(2) / std::sqrt(2.0)), ContractError);
  const auto k = basis_ket(3, 5);
  CHECK(std::abs(k[5] - Complex(1.0)) < 1e-15);
}

TEST_CASE("tensor and permute") {
  const auto t = tensor({basis_ket(1, 1), basis_ket(1, 0), basis_ket(1, 0)});
  CHECK(std::abs(t[4]) == doctest::Approx(1.0));
  const std::array<int, 3> perm{2, 0, 1};  // slot 0 -> slot 2
  const auto p = permute_qubits(t, perm);
  CHECK(std::abs(p[1]) == doctest::Approx(1.0));
  const auto r = random_state(4, 3);
  const std::array<int, 4> swap{1, 0, 3, 2};
  CHECK((permute_qubits(permute_qubits(r, swap), swap).amplitudes() - r.amplitudes()).norm() < 1e-14);
}

TEST_CASE("apply_on_qubits: u then u-dagger is the identity") {
  const auto s = random_state(3, 11);
  for (int k = 0; k < 10; ++k) {
    const auto u = random_unitary_qubit(derive_seed(5, static_cast<std::uint64_t>(k)));
    const std::array<int, 1> target{k % 3};
    const auto back = apply_on_qubits(apply_on_qubits(s, u, target), u.adjoint(), target);
    CHECK((back.amplitudes() - s.amplitudes()).norm() < 1e-12);
    CHECK(std::abs(apply_on_qubits(s, u, target).amplitudes().norm() - 1.0) < 1e-12);
  }
  const auto cnot_like = kron(pauli(Pauli::X), pauli(Pauli::Z));
  const std::array<int, 2> targets{2, 0};
  const auto x = apply_on_qubits(basis_ket(3, 0b100), cnot_like, targets);
  // Z on slot 0 (which is 1) gives -1; X flips slot 2.
  CHECK(std::abs(x[0b101] + Complex(1.0)) < 1e-15);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 0) = 2.0;
  const std::array<int, 1> t0{0};
  CHECK_THROWS_AS(apply_on_qubits(s, QubitOperator(1, bad), t0), ContractError);
}

TEST_CASE("partial trace against explicit summation") {
  const auto s = random_state(4, 21);
  const std::vector<std::vector<int>> keeps = {{0}, {1}, {0, 1}, {0, 3}, {1, 2, 3}, {2}};
  for (const auto& keep : keeps) {
    const auto rho = partial_trace(density_of(s), keep);
    const auto direct = reduced_state(s, keep);
    const auto ref = oracle::partial_trace(s.amplitudes(), 4, keep);
    CHECK(max_abs(rho.matrix() - ref) < 1e-12);
    CHECK(max_abs(direct.matrix() - ref) < 1e-12);
  }
}

TEST_CASE("partial trace composes") {
  const auto s = random_state(4, 22);
  const std::array<int, 2> keep12{0, 1};
  const std::array<int, 1> keep1{0};
  const auto stepwise = partial_trace(partial_trace(density_of(s), keep12), keep1);
  const auto direct = partial_trace(density_of(s), keep1);
  CHECK(max_abs(stepwise.matrix() - direct.matrix()) < 1e-12);
}

TEST_CASE("fidelity is blind to global phase; trace distance") {
  const auto s = random_state(2, 31);
  const auto rho = reduced_state(random_state(3, 32), std::array<int, 2>{0, 2});
  const auto f = fidelity_with_pure(rho, s);
  const auto phased = StateVector(2, std::polar(1.0, 0.7) * s.amplitudes());
  CHECK(std::abs(fidelity_with_pure(rho, phased) - f) < 1e-14);
  CHECK(std::abs(f - oracle::fidelity(rho.matrix(), s.amplitudes())) < 1e-14);
  CHECK(trace_distance(density_of(basis_ket(1, 0)), density_of(basis_ket(1, 1))) == doctest::Approx(1.0));
  CHECK(trace_distance(rho, rho) < 1e-14);
}

TEST_CASE("measure_bell enumerate matches explicit projection") {
  const auto s = random_state(4, 41);
  const std::array<int, 2> pair{3, 1};
  const auto results = measure_bell(s, pair, EnumerateMode{});
  REQUIRE(results.size() == 4);
  double total = 0.0;
  for (const auto& r : results) {
    double p = 0.0;
    for (unsigned rest = 0; rest < 4; ++rest) {
      oracle::C amp = 0.0;
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
          // slot 3 = x, slot 1 = y, slots 0 and 2 from `rest`
          const unsigned i = ((rest >> 1) << 3) | (static_cast<unsigned>(y) << 2) | ((rest & 1U) << 1) |
                             static_cast<unsigned>(x);
          amp += std::conj(oracle::bell_amp(r.outcome.a, r.outcome.b, x, y)) * s[i];
        }
      p += std::norm(amp);
    }
    CHECK(std::abs(r.probability - p) < 1e-12);
    REQUIRE(r.post_state);
    CHECK(r.post_state->n_qubits() == 4);
    CHECK(std::abs(r.post_state->amplitudes().norm() - 1.0) < 1e-12);
    total += r.probability;
  }
  CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("measure_bell forced and impossible outcomes") {
  const auto phi = tensor(bell_state({0, 0}), basis_ket(1, 0));
  const std::array<int, 2> pair{0, 1};
  CHECK_THROWS_AS(measure_bell(phi, pair, ForcedMode{{1, 1}}), ImpossibleOutcomeError);
  const auto r = measure_bell(phi, pair, ForcedMode{{0, 0}});
  REQUIRE(r.size() == 1);
  CHECK(r[0].probability == doctest::Approx(1.0));
  CHECK_THROWS_AS(measure_bell(phi, {0, 0}, EnumerateMode{}), DomainError);
}

TEST_CASE("measure_bell sampled frequencies within 3 sigma") {
  const auto s = random_state(3, 51);
  const std::array<int, 2> pair{0, 2};
  const auto exact = measure_bell(s, pair, EnumerateMode{});
  constexpr int kShots = 100000;
  std::array<int, 4> counts{};
  for (int i = 0; i < kShots; ++i) {
    const auto r = measure_bell(s, pair, SampleMode{derive_seed(99, static_cast<std::uint64_t>(i))});
    ++counts[static_cast<std::size_t>(r.front().outcome.ordinal())];
  }
  for (const auto& e : exact) {
    const double p = e.probability;
    const double freq = counts[static_cast<std::size_t>(e.outcome.ordinal())] / double(kShots);
    CHECK(std::abs(freq - p) <= 3.0 * std::sqrt(p * (1 - p) / kShots));
  }
}

TEST_CASE("measure_qubit in a rotated basis") {
  const auto plus = state_from_bloch(std::numbers::pi / 2, 0.0);
  const auto minus = state_from_bloch(std::numbers::pi / 2, std::numbers::pi);
  const auto s = tensor(plus, basis_ket(1, 1));
  const auto out = measure_qubit(s, 0, {plus, minus});
  CHECK(out[0].probability == doctest::Approx(1.0));
  CHECK(out[1].probability < 1e-14);
  REQUIRE(out[0].remainder);
  CHECK(equal_up_to_phase(*out[0].remainder, basis_ket(1, 1)));
}

TEST_CASE("Bloch round trip and equal_up_to_phase") {
  const auto s = state_from_bloch(1.1, 2.3);
  const auto b = bloch_vector(s);
  CHECK(b[0] == doctest::Approx(std::sin(1.1) * std::cos(2.3)));
  CHECK(b[1] == doctest::Approx(std::sin(1.1) * std::sin(2.3)));
  CHECK(b[2] == doctest::Approx(std::cos(1.1)));
  CHECK(equal_up_to_phase(s, StateVector(1, std::polar(1.0, -0.4) * s.amplitudes())));
  CHECK_FALSE(equal_up_to_phase(s, state_from_bloch(1.1, 2.4)));
}

TEST_CASE("seeded sampling") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
  CHECK((random_pure_qubit(7).amplitudes() - random_pure_qubit(7).amplitudes()).norm() == 0.0);
  std::array<double, 3> mean{};
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    const auto b = bloch_vector(random_pure_qubit(derive_seed(2024, static_cast<std::uint64_t>(i))));
    for (int c = 0; c < 3; ++c) mean[static_cast<std::size_t>(c)] += b[static_cast<std::size_t>(c)] / kDraws;
  }
  CHECK(std::sqrt(mean[0] * mean[0] + mean[1] * mean[1] + mean[2] * mean[2]) < 0.05);
  for (int i = 0; i < 20; ++i) CHECK(random_unitary_qubit(static_cast<std::uint64_t>(i)).is_unitary());
}

TEST_CASE("z_rotation and collective_unitary") {
  const auto rz = z_rotation(0.8);
  CHECK(std::abs(rz.matrix()(0, 0) - std::polar(1.0, -0.4)) < 1e-15);
  CHECK(std::abs(rz.matrix()(1, 1) - std::polar(1.0, 0.4)) < 1e-15);
  const auto u = random_unitary_qubit(3);
  const auto u3 = collective_unitary(u, 3);
  CHECK(u3.n_qubits() == 3);
  CHECK(max_abs(u3.matrix() - oracle::kron(oracle::kron(u.matrix(), u.matrix()), u.matrix())) < 1e-14);
}

TEST_CASE("haar_average reproduces Haar moments") {
  const auto zero = basis_ket(1, 0);
  CHECK(haar_average([&](const StateVector& a) { return std::norm(inner(zero, a)); }) == doctest::Approx(0.5));
  // E|<0|a>|^4 = 2/(d(d+1)) and E|<0|a>|^6 = 6/(d(d+1)(d+2)) for d = 2.
  CHECK(haar_average([&](const StateVector& a) { return std::pow(std::norm(inner(zero, a)), 2); }) ==
        doctest::Approx(1.0 / 3.0));
  CHECK(haar_average([&](const StateVector& a) { return std::pow(std::norm(inner(zero, a)), 3); }) ==
        doctest::Approx(0.25));
}
