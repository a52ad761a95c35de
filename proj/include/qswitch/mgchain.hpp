#pragma once

// Majumdar-Ghosh ring
//     H = J sum_{i=1..N} ( 2 S_i.S_{i+1} + alpha S_i.S_{i+2} ),  indices mod N,
// with S = sigma/2. The sum is taken literally, so for N = 4 each
// next-nearest pair appears twice. Site i lives on qubit slot i-1; |0> is
// spin up.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qswitch/qcore.hpp"

namespace qswitch::mgchain {

struct SpinChainSpec {
  int sites = 4;
  double coupling = 1.0;   // J > 0
  double nnn_ratio = 1.0;  // alpha

  /// Even sites >= 4, finite positive coupling, finite ratio.
  void validate() const;
};

inline constexpr int kMaxDenseOperatorSites = 12;
inline constexpr int kMaxDiagonalizeSites = 14;

/// Full 2^N x 2^N operator; ResourceError beyond kMaxDenseOperatorSites.
QubitOperator build_hamiltonian(const SpinChainSpec& spec);
QubitOperator total_sz(int sites);
QubitOperator total_spin_squared(int sites);

struct SpectrumReport {
  std::vector<double> eigenvalues;  // ascending
  double ground_energy = 0.0;
  int degeneracy = 0;
  std::vector<StateVector> ground_basis;

  /// First eigenvalue above the ground cluster minus the ground energy; 0
  /// when the whole spectrum is degenerate.
  double gap() const;
};

/// Same-energy rule used for the ground cluster: relative 1e-9 with an
/// absolute floor of 1e-11.
bool same_level(double e, double reference);

/// Diagonalizes H block by block in the joint total-S_z and lattice-momentum
/// sectors (H conserves both).
SpectrumReport diagonalize(const SpinChainSpec& spec);

/// Product of singlets on (1,2),(3,4),... (offset 0) or (2,3),...,(N,1)
/// (offset 1); each singlet is written with the first-listed site first.
StateVector dimer_state(int sites, int offset);

struct MembershipReport {
  int degeneracy = 0;
  double ground_energy = 0.0;
  double dimer0_deficit = 0.0;
  double dimer1_deficit = 0.0;
  std::optional<double> switchboard_deficit;  // N = 4 only
  std::optional<double> span_mismatch;        // N = 4 only: max |P_ground - P_dimers|
};

/// 1 - ||P_ground v||^2 for the dimer states (and the switchboard state at
/// N = 4). Requires alpha = 1; StructuralError if the ground space is not
/// two-dimensional.
MembershipReport verify_ground_membership(const SpinChainSpec& spec);

double projection_deficit(const SpectrumReport& spectrum, const StateVector& v);

struct GapRow {
  double alpha = 0.0;
  double ground_energy = 0.0;
  double gap = 0.0;
  int degeneracy = 0;
};

std::vector<GapRow> gap_scan(int sites, std::span<const double> alpha_grid, double coupling = 1.0);

/// Columnar text table "alpha E0 gap degeneracy", 12 significant digits.
std::string format_scan_table(std::span<const GapRow> rows);

}  // namespace qswitch::mgchain
