#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qauth/qsim.hpp"

namespace qauth {

enum class AttackKind : std::uint8_t {
  None,
  InterceptResend,
  SubsetGuess,
  PhotonNumberSplitting,
  ServerProduct,
  ServerGhz,
};

enum class Path : std::uint8_t { ToAlice, ToBob, Both };

enum class BasisStrategy : std::uint8_t { RandomPerSlot, Fixed };

/// When Eve manages to read the encrypted tamper-bit layout.
enum class LocationKnowledge : std::uint8_t { Never, AfterMeasurement, Realtime };

std::string_view to_string(AttackKind kind);
std::string_view to_string(Path path);
std::string_view to_string(BasisStrategy strategy);
std::string_view to_string(LocationKnowledge knowledge);
std::optional<AttackKind> parse_attack_kind(std::string_view name);
std::optional<Path> parse_path(std::string_view name);
std::optional<BasisStrategy> parse_basis_strategy(std::string_view name);
std::optional<LocationKnowledge> parse_location_knowledge(std::string_view name);

struct AttackConfig {
  AttackKind kind = AttackKind::None;
  std::size_t g = 0;  // SUBSET_GUESS only
  Path path = Path::ToAlice;
  BasisStrategy basis_strategy = BasisStrategy::RandomPerSlot;
  MeasBasis fixed_basis = MeasBasis::Rectilinear;  // FIXED only
  LocationKnowledge location_knowledge = LocationKnowledge::Never;

  bool is_server_attack() const {
    return kind == AttackKind::ServerProduct || kind == AttackKind::ServerGhz;
  }
  bool taps(Path p) const { return path == Path::Both || path == p; }

  /// Throws std::invalid_argument; stream_length is k + d.
  void validate(std::size_t stream_length) const;
};

struct KnownBit {
  Bit value = 0;
  bool certain = false;
};

/// A qubit the compromised server kept for itself.
struct RetainedQubit {
  std::size_t position = 0;
  std::shared_ptr<StateRegister> reg;
  int qubit = 0;
};

/// Everything the adversary has accumulated during one session.
struct EveState {
  AttackConfig config;
  MeasBasis key_basis = MeasBasis::Rectilinear;

  std::map<std::size_t, KnownBit> known_key_bits;
  bool tamper_positions_known = false;
  std::set<std::size_t> known_tamper_positions;
  std::vector<std::size_t> disturbance_log;
  /// Positions where a multi-photon pulse was split; resolved after the
  /// session from the slot's post-measurement key-basis value.
  std::vector<std::size_t> split_positions;

  /// SERVER_PRODUCT: value sent per position (key slots only).
  std::map<std::size_t, Bit> server_record;
  /// SERVER_GHZ: retained qubits, measured at session end into server_record.
  std::vector<RetainedQubit> retained;

  std::size_t intercepted_messages = 0;
  /// Ciphertexts queued for decryption after the session (AFTER_MEASUREMENT).
  std::size_t deferred_decryptions = 0;

  EveState() = default;
  EveState(AttackConfig cfg, MeasBasis key_basis) : config(cfg), key_basis(key_basis) {}
};

/// Per-session adversary summary attached to a SessionOutcome.
struct AdversaryReport {
  AttackKind kind = AttackKind::None;
  LocationKnowledge location_knowledge = LocationKnowledge::Never;
  /// Fraction of key slots where Eve holds a certain bit equal to Alice's
  /// final key bit.
  double key_knowledge = 0.0;
  bool detected = false;
  bool tamper_positions_known = false;
  /// Fraction of key slots where the server's record equals Alice's final
  /// key bit; nullopt unless the attack is a server attack.
  std::optional<double> server_copy_match;
  /// Set when both paths were tapped: detection figures for that case are an
  /// extrapolation.
  bool dual_path_extrapolation = false;
};

}  // namespace qauth
