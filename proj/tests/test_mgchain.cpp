#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qswitch/mgchain.hpp"
#include "qswitch/switchboard.hpp"

using namespace qswitch;
using namespace qswitch::mgchain;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix ground_projector(const SpectrumReport& r) {
  const auto dim = r.ground_basis.front().dimension();
  Matrix p = Matrix::Zero(dim, dim);
  for (const auto& g : r.ground_basis) p += g.amplitudes() * g.amplitudes().adjoint();
  return p;
}

double max_eigen_gap(const std::vector<double>& a, const Eigen::VectorXd& b) {
  REQUIRE(a.size() == static_cast<std::size_t>(b.size()));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[static_cast<Eigen::Index>(i)]));
  return worst;
}

}  // namespace

TEST_CASE("N=4, alpha=1 Hamiltonian is S_tot^2 - 3") {
  const auto h = build_hamiltonian({4, 1.0, 1.0});
  CHECK(max_abs(h.matrix() - (total_spin_squared(4).matrix() - 3.0 * Matrix::Identity(16, 16))) < 1e-12);
  CHECK(max_abs(total_spin_squared(4).matrix() - oracle::total_spin_squared(4)) < 1e-12);
}

TEST_CASE("Hamiltonian against Kronecker-product construction") {
  for (int n : {4, 6}) {
    for (double alpha : {0.0, 0.35, 1.0, 1.8}) {
      for (double j : {1.0, 2.5}) {
        const auto h = build_hamiltonian({n, j, alpha});
        CHECK(max_abs(h.matrix() - oracle::mg_hamiltonian(n, j, alpha)) < 1e-12);
        CHECK(std::abs(h.matrix().trace()) < 1e-12);
        CHECK(h.is_hermitian());
      }
    }
  }
  // alpha = 0: nearest-neighbour Heisenberg ring with coupling 2J.
  Matrix ring = Matrix::Zero(16, 16);
  for (int i = 0; i < 4; ++i) ring += 2.0 * oracle::dot(4, i, (i + 1) % 4);
  CHECK(max_abs(build_hamiltonian({4, 1.0, 0.0}).matrix() - ring) < 1e-12);
}

TEST_CASE("conserved quantities") {
  for (int n : {4, 6}) {
    for (double alpha : {0.0, 0.5, 1.0}) {
      const Matrix h = build_hamiltonian({n, 1.0, alpha}).matrix();
      const Matrix sz = total_sz(n).matrix();
      const Matrix s2 = total_spin_squared(n).matrix();
      CHECK((h * sz - sz * h).norm() < 1e-10);
      CHECK((h * s2 - s2 * h).norm() < 1e-10);
    }
  }
}

TEST_CASE("block spectrum equals the dense spectrum") {
  for (int n : {4, 6, 8}) {
    for (double alpha : {0.0, 0.3, 1.0, 1.7}) {
      const auto report = diagonalize({n, 1.0, alpha});
      CHECK(max_eigen_gap(report.eigenvalues, oracle::spectrum(oracle::mg_hamiltonian(n, 1.0, alpha))) < 1e-10);
      const Matrix h = build_hamiltonian({n, 1.0, alpha}).matrix();
      for (const auto& g : report.ground_basis) {
        CHECK((h * g.amplitudes() - report.ground_energy * g.amplitudes()).norm() < 1e-9);
      }
      for (std::size_t a = 0; a < report.ground_basis.size(); ++a)
        for (std::size_t b = a + 1; b < report.ground_basis.size(); ++b)
          CHECK(std::abs(inner(report.ground_basis[a], report.ground_basis[b])) < 1e-10);
    }
  }
}

TEST_CASE("ground vectors at N=10 are eigenvectors") {
  const auto report = diagonalize({10, 1.0, 1.0});
  const Matrix h = build_hamiltonian({10, 1.0, 1.0}).matrix();
  CHECK(report.degeneracy == 2);
  for (const auto& g : report.ground_basis) {
    CHECK((h * g.amplitudes() - report.ground_energy * g.amplitudes()).norm() < 1e-9);
  }
}

TEST_CASE("translation relabeling leaves the spectrum unchanged") {
  for (int shift : {1, 2, 3}) {
    const auto a = oracle::spectrum(oracle::mg_hamiltonian(6, 1.0, 0.7, shift));
    const auto b = diagonalize({6, 1.0, 0.7});
    CHECK(max_eigen_gap(b.eigenvalues, a) < 1e-10);
  }
}

TEST_CASE("scaling J scales the spectrum") {
  const auto base = diagonalize({6, 1.0, 1.0});
  const auto scaled = diagonalize({6, 2.5, 1.0});
  for (std::size_t i = 0; i < base.eigenvalues.size(); ++i) {
    CHECK(std::abs(scaled.eigenvalues[i] - 2.5 * base.eigenvalues[i]) < 1e-12);
  }
  CHECK(max_abs(ground_projector(base) - ground_projector(scaled)) < 1e-10);
}

TEST_CASE("known ground states") {
  const auto n4 = diagonalize({4, 1.0, 1.0});
  CHECK(n4.ground_energy == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK(n4.degeneracy == 2);
  CHECK(diagonalize({6, 1.0, 1.0}).degeneracy == 2);
  CHECK(diagonalize({4, 1.0, 0.0}).degeneracy == 1);
  CHECK(n4.gap() == doctest::Approx(2.0));
}

TEST_CASE("dimer states") {
  const auto d0 = dimer_state(4, 0);
  const auto d1 = dimer_state(4, 1);
  CHECK((d0.amplitudes() - oracle::singlet_cover(4, {{0, 1}, {2, 3}})).norm() < 1e-14);
  CHECK((d1.amplitudes() - oracle::singlet_cover(4, {{1, 2}, {3, 0}})).norm() < 1e-14);
  const auto ref = oracle::singlet_cover(4, {{0, 1}, {2, 3}}).dot(oracle::singlet_cover(4, {{1, 2}, {3, 0}}));
  CHECK(std::abs(inner(d0, d1) - ref) < 1e-14);
  CHECK(std::abs(std::abs(inner(d0, d1)) - 0.5) < 1e-14);
  const auto d6 = dimer_state(6, 1);
  CHECK((d6.amplitudes() - oracle::singlet_cover(6, {{1, 2}, {3, 4}, {5, 0}})).norm() < 1e-14);
  CHECK_THROWS_AS(dimer_state(5, 0), DomainError);
  CHECK_THROWS_AS(dimer_state(4, 2), DomainError);
}

TEST_CASE("ground-space membership") {
  const auto m4 = verify_ground_membership({4, 1.0, 1.0});
  CHECK(m4.degeneracy == 2);
  CHECK(m4.dimer0_deficit < 1e-10);
  CHECK(m4.dimer1_deficit < 1e-10);
  REQUIRE(m4.switchboard_deficit);
  CHECK(*m4.switchboard_deficit < 1e-10);
  REQUIRE(m4.span_mismatch);
  CHECK(*m4.span_mismatch < 1e-10);
  const auto m6 = verify_ground_membership({6, 1.0, 1.0});
  CHECK(m6.dimer0_deficit < 1e-10);
  CHECK(m6.dimer1_deficit < 1e-10);
  CHECK_FALSE(m6.switchboard_deficit);

  // A random state barely overlaps the two-dimensional ground space.
  const auto spectrum = diagonalize({4, 1.0, 1.0});
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (int k = 0; k < 50; ++k) {
    Vector v(16);
    for (auto& x : v) x = {g(rng), g(rng)};
    CHECK(projection_deficit(spectrum, StateVector::normalized(4, v)) > 0.5);
  }
  CHECK_THROWS_AS(verify_ground_membership({4, 1.0, 0.5}), DomainError);
}

TEST_CASE("domain and resource errors") {
  CHECK_THROWS_AS(build_hamiltonian({5, 1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(build_hamiltonian({4, 0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(diagonalize({7, 1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(diagonalize({16, 1.0, 1.0}), ResourceError);
  CHECK_THROWS_AS(build_hamiltonian({14, 1.0, 1.0}), ResourceError);
  const std::vector<double> grid{0.0};
  CHECK_THROWS_AS(gap_scan(14, grid), ResourceError);
}

TEST_CASE("gap scan") {
  for (int n : {4, 6, 8}) {
    const std::vector<double> grid{0.0, 1.0};
    const auto rows = gap_scan(n, grid);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].degeneracy == 1);
    CHECK(rows[1].degeneracy == 2);
    CHECK(rows[1].gap > 0.0);
  }
  const std::vector<double> one{0.5};
  const auto rows = gap_scan(4, one);
  CHECK(rows.size() == 1);
  const auto table = format_scan_table(rows);
  CHECK(table.rfind("alpha", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 2);
  CHECK(format_scan_table(gap_scan(4, std::vector<double>{1.0})).find("-3 ") != std::string::npos);
}

TEST_CASE("N=14 fits the budget") {
  const auto r = diagonalize({14, 1.0, 1.0});
  CHECK(r.degeneracy == 2);
  CHECK(r.eigenvalues.size() == 16384);
  CHECK(r.ground_energy == doctest::Approx(-10.5).epsilon(1e-10));
}
