#include "qswitch/mgchain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "qswitch/switchboard.hpp"

namespace qswitch::mgchain {

namespace {

struct Bond {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

// Literal expansion of the periodic sum; duplicate pairs are kept.
std::vector<Bond> bonds(const SpinChainSpec& spec) {
  std::vector<Bond> out;
  const int n = spec.sites;
  for (int i = 0; i < n; ++i) {
    out.push_back({i, (i + 1) % n, 2.0 * spec.coupling});
    out.push_back({i, (i + 2) % n, spec.nnn_ratio * spec.coupling});
  }
  return out;
}

std::uint64_t site_mask(int site, int sites) { return std::uint64_t{1} << (sites - 1 - site); }

// S_i.S_j acting on basis state `state`: diagonal part and, for antiparallel
// spins, the flipped partner with amplitude 1/2.
template <typename Emit>
void heisenberg_term(std::uint64_t state, const Bond& b, int sites, Emit&& emit) {
  const auto mi = site_mask(b.i, sites);
  const auto mj = site_mask(b.j, sites);
  const bool up_i = (state & mi) == 0;
  const bool up_j = (state & mj) == 0;
  emit(state, b.weight * (up_i == up_j ? 0.25 : -0.25));
  if (up_i != up_j) emit(state ^ mi ^ mj, b.weight * 0.5);
}

// Cyclic translation T: the spin on site i moves to site i+1.
std::uint64_t translate(std::uint64_t s, int sites) {
  return (s >> 1) | ((s & 1U) << (sites - 1));
}

Matrix spin_component(int sites, int site, int component) {
  const QubitOperator single = pauli(component == 0 ? Pauli::X : component == 1 ? Pauli::Y : Pauli::Z);
  QubitOperator acc = site == 0 ? single : pauli(Pauli::I);
  for (int q = 1; q < sites; ++q) acc = kron(acc, q == site ? single : pauli(Pauli::I));
  return 0.5 * acc.matrix();
}

}  // namespace

void SpinChainSpec::validate() const {
  if (sites < 4 || sites % 2 != 0) {
    throw DomainError("SpinChainSpec: site count must be even and >= 4, got " + std::to_string(sites));
  }
  if (!(coupling > 0.0) || !std::isfinite(coupling)) {
    throw DomainError("SpinChainSpec: coupling J must be positive");
  }
  if (!std::isfinite(nnn_ratio)) throw DomainError("SpinChainSpec: alpha must be finite");
}

QubitOperator build_hamiltonian(const SpinChainSpec& spec) {
  spec.validate();
  if (spec.sites > kMaxDenseOperatorSites) {
    throw ResourceError("build_hamiltonian: dense operator limited to " +
                        std::to_string(kMaxDenseOperatorSites) + " sites");
  }
  const auto dim = Eigen::Index{1} << spec.sites;
  Matrix h = Matrix::Zero(dim, dim);
  const auto all_bonds = bonds(spec);
  for (Eigen::Index col = 0; col < dim; ++col) {
    for (const Bond& b : all_bonds) {
      heisenberg_term(static_cast<std::uint64_t>(col), b, spec.sites,
                      [&](std::uint64_t row, double v) { h(static_cast<Eigen::Index>(row), col) += v; });
    }
  }
  return {spec.sites, std::move(h)};
}

QubitOperator total_sz(int sites) {
  const auto dim = Eigen::Index{1} << sites;
  Matrix m = Matrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const int down = std::popcount(static_cast<std::uint64_t>(i));
    m(i, i) = 0.5 * (sites - 2 * down);
  }
  return {sites, std::move(m)};
}

QubitOperator total_spin_squared(int sites) {
  const auto dim = Eigen::Index{1} << sites;
  Matrix s2 = Matrix::Zero(dim, dim);
  for (int c = 0; c < 3; ++c) {
    Matrix total = Matrix::Zero(dim, dim);
    for (int site = 0; site < sites; ++site) total += spin_component(sites, site, c);
    s2 += total * total;
  }
  return {sites, std::move(s2)};
}

double SpectrumReport::gap() const {
  const auto idx = static_cast<std::size_t>(degeneracy);
  return idx < eigenvalues.size() ? eigenvalues[idx] - ground_energy : 0.0;
}

bool same_level(double e, double reference) {
  return std::abs(e - reference) <= std::max(1e-9 * std::abs(reference), 1e-11);
}

SpectrumReport diagonalize(const SpinChainSpec& spec) {
  spec.validate();
  if (spec.sites > kMaxDiagonalizeSites) {
    throw ResourceError("diagonalize: dense budget is " + std::to_string(kMaxDiagonalizeSites) +
                        " sites");
  }
  const int n = spec.sites;
  const auto all_bonds = bonds(spec);
  const std::uint64_t dim = std::uint64_t{1} << n;

  // Translation orbits: rep_of[s] = T^{shift[s]} s is the smallest orbit member.
  std::vector<std::uint64_t> rep_of(dim);
  std::vector<int> shift(dim);
  std::vector<int> period(dim, 0);
  for (std::uint64_t s = 0; s < dim; ++s) {
    std::uint64_t t = s, best = s;
    int best_shift = 0, r = 0;
    do {
      t = translate(t, n);
      ++r;
      if (t < best) {
        best = t;
        best_shift = r;
      }
    } while (t != s);
    rep_of[s] = best;
    shift[s] = best_shift % r;
    if (best == s) period[s] = r;
  }

  struct Block {
    std::vector<std::uint64_t> reps;
    int m = 0;
    Eigen::VectorXd values;
    Matrix vectors;
  };
  std::vector<Block> blocks;
  for (int down = 0; down <= n; ++down) {
    for (int m = 0; m < n; ++m) {
      Block b;
      b.m = m;
      for (std::uint64_t s = 0; s < dim; ++s) {
        if (period[s] != 0 && std::popcount(s) == down && (m * period[s]) % n == 0) b.reps.push_back(s);
      }
      if (b.reps.empty()) continue;
      const double k = 2.0 * std::numbers::pi * m / n;
      const auto size = static_cast<Eigen::Index>(b.reps.size());
      Matrix h = Matrix::Zero(size, size);
      for (Eigen::Index col = 0; col < size; ++col) {
        const std::uint64_t r = b.reps[static_cast<std::size_t>(col)];
        for (const Bond& bond : all_bonds) {
          heisenberg_term(r, bond, n, [&](std::uint64_t target, double v) {
            const auto rep = rep_of[target];
            const auto it = std::lower_bound(b.reps.begin(), b.reps.end(), rep);
            if (it == b.reps.end() || *it != rep) return;
            const double ratio = std::sqrt(static_cast<double>(period[r]) / period[rep]);
            h(it - b.reps.begin(), col) += v * ratio * std::polar(1.0, -k * shift[target]);
          });
        }
      }
      Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (h + h.adjoint()));
      if (eig.info() != Eigen::Success) throw StructuralError("diagonalize: eigensolver failed");
      b.values = eig.eigenvalues();
      b.vectors = eig.eigenvectors();
      blocks.push_back(std::move(b));
    }
  }

  SpectrumReport report;
  for (const auto& b : blocks) report.eigenvalues.insert(report.eigenvalues.end(), b.values.begin(), b.values.end());
  std::sort(report.eigenvalues.begin(), report.eigenvalues.end());
  report.ground_energy = report.eigenvalues.front();

  for (const auto& b : blocks) {
    const double k = 2.0 * std::numbers::pi * b.m / n;
    for (Eigen::Index col = 0; col < b.values.size(); ++col) {
      if (!same_level(b.values[col], report.ground_energy)) continue;
      Vector full = Vector::Zero(static_cast<Eigen::Index>(dim));
      for (std::size_t a = 0; a < b.reps.size(); ++a) {
        const Complex c = b.vectors(static_cast<Eigen::Index>(a), col);
        const int r = period[b.reps[a]];
        std::uint64_t t = b.reps[a];
        for (int j = 0; j < r; ++j) {
          full[static_cast<Eigen::Index>(t)] += c * std::polar(1.0 / std::sqrt(static_cast<double>(r)), -k * j);
          t = translate(t, n);
        }
      }
      report.ground_basis.push_back(StateVector::normalized(n, std::move(full)));
    }
  }
  report.degeneracy = static_cast<int>(report.ground_basis.size());
  return report;
}

StateVector dimer_state(int sites, int offset) {
  if (sites < 2 || sites % 2 != 0) throw DomainError("dimer_state: site count must be even");
  if (offset != 0 && offset != 1) throw DomainError("dimer_state: offset must be 0 or 1");
  const StateVector singlet = bell_state(kSinglet);
  StateVector product = singlet;
  for (int p = 1; p < sites / 2; ++p) product = tensor(product, singlet);
  if (offset == 0) return product;
  // Product slot q holds site q+1 of the shifted covering.
  std::vector<int> perm(static_cast<std::size_t>(sites));
  for (int q = 0; q < sites; ++q) perm[static_cast<std::size_t>(q)] = (q + 1) % sites;
  return permute_qubits(product, perm);
}

double projection_deficit(const SpectrumReport& spectrum, const StateVector& v) {
  double captured = 0.0;
  for (const auto& g : spectrum.ground_basis) captured += std::norm(inner(g, v));
  return 1.0 - captured;
}

MembershipReport verify_ground_membership(const SpinChainSpec& spec) {
  spec.validate();
  if (spec.nnn_ratio != 1.0) throw DomainError("verify_ground_membership: requires alpha = 1");
  const SpectrumReport spectrum = diagonalize(spec);
  if (spectrum.degeneracy != 2) {
    throw StructuralError("verify_ground_membership: ground degeneracy is " +
                          std::to_string(spectrum.degeneracy) + ", expected 2");
  }
  MembershipReport report;
  report.degeneracy = spectrum.degeneracy;
  report.ground_energy = spectrum.ground_energy;
  const StateVector d0 = dimer_state(spec.sites, 0);
  const StateVector d1 = dimer_state(spec.sites, 1);
  report.dimer0_deficit = projection_deficit(spectrum, d0);
  report.dimer1_deficit = projection_deficit(spectrum, d1);
  if (spec.sites == 4) {
    report.switchboard_deficit =
        projection_deficit(spectrum, switchboard::build_switchboard().state());
    // Orthonormalize the dimer pair and compare projectors.
    const Vector e0 = d0.amplitudes();
    Vector e1 = d1.amplitudes() - e0.dot(d1.amplitudes()) * e0;
    e1.normalize();
    const Matrix dimers = e0 * e0.adjoint() + e1 * e1.adjoint();
    Matrix ground = Matrix::Zero(16, 16);
    for (const auto& g : spectrum.ground_basis) ground += g.amplitudes() * g.amplitudes().adjoint();
    report.span_mismatch = (ground - dimers).cwiseAbs().maxCoeff();
  }
  return report;
}

std::vector<GapRow> gap_scan(int sites, std::span<const double> alpha_grid, double coupling) {
  if (sites > kMaxDenseOperatorSites) {
    throw ResourceError("gap_scan: limited to " + std::to_string(kMaxDenseOperatorSites) + " sites");
  }
  std::vector<GapRow> rows;
  rows.reserve(alpha_grid.size());
  for (double alpha : alpha_grid) {
    if (!std::isfinite(alpha)) throw DomainError("gap_scan: grid values must be finite");
    const auto spectrum = diagonalize({sites, coupling, alpha});
    rows.push_back({alpha, spectrum.ground_energy, spectrum.gap(), spectrum.degeneracy});
  }
  return rows;
}

std::string format_scan_table(std::span<const GapRow> rows) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-20s %-20s %-20s %s\n", "alpha", "E0", "gap", "degeneracy");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-20.12g %-20.12g %-20.12g %d\n", r.alpha, r.ground_energy, r.gap,
                  r.degeneracy);
    out << buf;
  }
  return out.str();
}

}  // namespace qswitch::mgchain
