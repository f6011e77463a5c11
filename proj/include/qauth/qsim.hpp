#pragma once

// Exact pure-state simulation of small qubit registers.
//
// Qubit 0 is the most significant bit of the amplitude index, so the
// amplitude of |q0 q1 ... q(n-1)> lives at index q0*2^(n-1) + ... + q(n-1).
// tensor(a, b) therefore places a's qubits first.

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qauth/random.hpp"

namespace qauth {

using Bit = std::uint8_t;
using Amplitude = std::complex<double>;

enum class MeasBasis : std::uint8_t { Rectilinear = 0, Diagonal = 1 };

std::string_view to_string(MeasBasis basis);
std::optional<MeasBasis> parse_basis(std::string_view name);

enum class BellKind : std::uint8_t { Phi = 0, Psi = 1 };
enum class BellPhase : std::uint8_t { Plus = 0, Minus = 1 };

/// One of the four Bell states, encoded as a (kind, phase) bit pair.
struct BellLabel {
  BellKind kind = BellKind::Phi;
  BellPhase phase = BellPhase::Plus;

  constexpr Bit kind_bit() const { return static_cast<Bit>(kind); }
  constexpr Bit phase_bit() const { return static_cast<Bit>(phase); }
  /// 0..3 in the order PHI_PLUS, PHI_MINUS, PSI_PLUS, PSI_MINUS.
  constexpr int index() const { return 2 * kind_bit() + phase_bit(); }

  static constexpr BellLabel from_index(int i) {
    return {static_cast<BellKind>((i >> 1) & 1), static_cast<BellPhase>(i & 1)};
  }

  friend constexpr bool operator==(BellLabel, BellLabel) = default;
};

inline constexpr BellLabel kPhiPlus{BellKind::Phi, BellPhase::Plus};
inline constexpr BellLabel kPhiMinus{BellKind::Phi, BellPhase::Minus};
inline constexpr BellLabel kPsiPlus{BellKind::Psi, BellPhase::Plus};
inline constexpr BellLabel kPsiMinus{BellKind::Psi, BellPhase::Minus};
inline constexpr std::array<BellLabel, 4> kAllBellLabels{kPhiPlus, kPhiMinus, kPsiPlus,
                                                         kPsiMinus};

std::string_view to_string(BellLabel label);
std::optional<BellLabel> parse_bell(std::string_view name);

/// Klein four-group law: component-wise XOR of (kind, phase).
constexpr BellLabel bell_compose(BellLabel s, BellLabel m) {
  return {static_cast<BellKind>(s.kind_bit() ^ m.kind_bit()),
          static_cast<BellPhase>(s.phase_bit() ^ m.phase_bit())};
}

/// Dense amplitude vector over 1..kMaxQubits qubits, normalized.
class StateRegister {
 public:
  static constexpr int kMaxQubits = 8;
  static constexpr double kNormTolerance = 1e-9;

  /// Throws std::invalid_argument unless the size is 2^n with 1 <= n <= 8
  /// and the vector has unit norm.
  explicit StateRegister(std::vector<Amplitude> amplitudes);

  static StateRegister computational(int num_qubits, std::uint64_t index);

  int num_qubits() const { return num_qubits_; }
  std::span<const Amplitude> amplitudes() const { return amps_; }
  double norm_squared() const;

  /// Born probability of `outcome` when measuring `qubit` in `basis`.
  double probability(int qubit, MeasBasis basis, Bit outcome) const;

  /// Born probabilities of the four Bell outcomes on (q1, q2), indexed by
  /// BellLabel::index().
  std::array<double, 4> bell_probabilities(int q1, int q2) const;

  /// Collapses onto the given outcome and renormalizes; returns the
  /// probability of that outcome. Throws std::domain_error if it is zero.
  double project(int qubit, MeasBasis basis, Bit outcome);
  double project_bell(int q1, int q2, BellLabel label);

  /// Contracts (q1, q2) with <label| and returns the normalized state of the
  /// remaining qubits in their original order, plus the outcome probability.
  std::pair<StateRegister, double> contract_bell(int q1, int q2, BellLabel label) const;

  /// New register where qubit t is this register's qubit order[t].
  StateRegister permuted(std::span<const int> order) const;

  /// Full computational-basis distribution (|amplitude|^2 per index).
  std::vector<double> computational_distribution() const;

  /// Equality up to a global phase factor.
  bool equal_up_to_phase(const StateRegister& other, double tol = 1e-9) const;

 private:
  StateRegister(int num_qubits, std::vector<Amplitude> amplitudes, bool /*unchecked*/);

  std::uint64_t mask(int qubit) const {
    return std::uint64_t{1} << (num_qubits_ - 1 - qubit);
  }
  void check_qubit(int qubit) const;
  void check_pair(int q1, int q2) const;
  void renormalize(double norm_sq);

  int num_qubits_;
  std::vector<Amplitude> amps_;
};

StateRegister prepare_bell(BellLabel label);
StateRegister prepare_ghz();
StateRegister prepare_polarized(Bit value, MeasBasis basis);

/// Kronecker product; throws std::length_error past kMaxQubits.
StateRegister tensor(const StateRegister& a, const StateRegister& b);

Bit measure_in_basis(StateRegister& reg, int qubit, MeasBasis basis, RandomSource& rand);
BellLabel measure_bell(StateRegister& reg, int q1, int q2, RandomSource& rand);

// ---------------------------------------------------------------------------
// Entanglement-swapping oracle.
//
// Register layout mirrors the protocol: the source qubits come first
// (k to Alice, l to Bob, and m kept by the server for GHZ), then Alice's
// created pair (i, j). The Bell measurement is on (j, k).

enum class SourceKind : std::uint8_t { EntangledPhiPlus, Product, Ghz };

struct SwapSource {
  SourceKind kind = SourceKind::EntangledPhiPlus;
  Bit x = 0;  // PRODUCT only

  static SwapSource entangled() { return {SourceKind::EntangledPhiPlus, 0}; }
  static SwapSource product(Bit x) { return {SourceKind::Product, x}; }
  static SwapSource ghz() { return {SourceKind::Ghz, 0}; }
};

std::string to_string(SwapSource source);

struct SwapBranch {
  BellLabel outcome;
  double probability = 0.0;
  /// Post-measurement state of (Q_i, Q_l) or (Q_i, Q_l, Q_m). Only
  /// meaningful when probability > 0.
  std::optional<StateRegister> residual;
  /// Computational distribution over the residual, index bits (i, l[, m]).
  std::vector<double> joint;

  double p_qi_one() const;
  double p_ql_one() const;
  std::optional<double> p_qm_one() const;
  /// P(Q_l == Q_i) in the computational basis.
  double p_qi_equals_ql() const;
  /// P(Q_l == Q_m); nullopt unless the source is GHZ.
  std::optional<double> p_ql_equals_qm() const;
};

struct SwapTable {
  BellLabel created;
  SwapSource source;
  std::array<SwapBranch, 4> branches;  // indexed by BellLabel::index()
};

/// Exhaustive enumeration of every Bell outcome on (Q_j, Q_k) by exact
/// state-vector arithmetic. No sampling.
SwapTable swap_enumerate(BellLabel created, SwapSource source);

/// Source register as emitted: qubits (k, l) or (k, l, m).
StateRegister prepare_source(SwapSource source);

}  // namespace qauth
