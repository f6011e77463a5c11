#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qauth/attack_types.hpp"
#include "qauth/qsim.hpp"

namespace qauth {

using BitString = std::vector<Bit>;

std::string bits_to_string(const BitString& bits);
BitString bits_from_string(std::string_view text);

enum class Mode : std::uint8_t { Base, Swap };

/// How Alice infers the (Q_i, Q_l) state after her Bell measurement.
enum class BeliefRule : std::uint8_t {
  ComposeTable1,      // bell_compose(created, outcome)
  MeasurementResult,  // the Bell outcome itself
};

std::string_view to_string(Mode mode);
std::string_view to_string(BeliefRule rule);
std::optional<Mode> parse_mode(std::string_view name);
std::optional<BeliefRule> parse_belief_rule(std::string_view name);

struct SessionConfig {
  std::size_t k = 1;  // key slots
  std::size_t d = 0;  // tamper slots
  double error_threshold = 0.0;
  std::size_t reveal_count = 1;  // token length
  Mode mode = Mode::Base;
  /// Deliberately has no default: SWAP sessions must name the rule.
  std::optional<BeliefRule> belief_rule;
  MeasBasis key_basis = MeasBasis::Rectilinear;

  std::size_t length() const { return k + d; }
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class SlotRole : std::uint8_t { Key, Tamper };

struct PlannedSlot {
  SlotRole role = SlotRole::Key;
  MeasBasis basis = MeasBasis::Rectilinear;  // TAMPER only
  Bit value = 0;                             // TAMPER only
};

/// Server-side layout of one session.
struct SessionPlan {
  std::vector<PlannedSlot> slots;

  std::size_t length() const { return slots.size(); }
  std::vector<std::size_t> key_positions() const;
  std::vector<std::size_t> tamper_positions() const;
};

struct TamperEntry {
  std::size_t position = 0;
  MeasBasis basis = MeasBasis::Rectilinear;
  Bit value = 0;

  friend bool operator==(const TamperEntry&, const TamperEntry&) = default;
};

/// The tamper subset of a plan, as delivered to Alice and Bob.
struct TamperSpec {
  std::size_t stream_length = 0;
  std::vector<TamperEntry> entries;  // ascending position

  static TamperSpec from_plan(const SessionPlan& plan);
  bool is_tamper(std::size_t position) const;
  const TamperEntry* find(std::size_t position) const;

  /// Compact text encoding used as the classical message body.
  std::string encode() const;
  /// Throws std::invalid_argument on malformed input.
  static TamperSpec decode(std::string_view text);

  friend bool operator==(const TamperSpec&, const TamperSpec&) = default;
};

struct SwapRecord {
  std::size_t position = 0;
  BellLabel created;    // Q_i Q_j
  BellLabel outcome;    // Bell outcome on Q_j Q_k
  Bit qi_result = 0;
  BellLabel believed;
  Bit key_bit = 0;
};

enum class SessionStatus : std::uint8_t { AuthAccept, AuthReject, TamperAbort, IncompleteStream };

std::string_view to_string(SessionStatus status);

enum class Party : std::uint8_t { Alice, Bob, TrustedServer, Eve };

std::string_view to_string(Party party);

struct Event {
  std::string step;  // protocol step id: "1".."6", "5a".."5d"
  Party party = Party::Alice;
  std::string action;
  std::uint64_t digest = 0;
};

/// Ordered record of every cross-party event in a session.
///
/// Text form, one event per line:
///   <step> <party> <action> <16 hex digit FNV-1a digest of the payload>
class EventLog {
 public:
  void record(std::string step, Party party, std::string action, std::string_view payload);

  const std::vector<Event>& events() const { return events_; }
  std::string to_text() const;
  /// FNV-1a of to_text().
  std::uint64_t digest() const;

  /// Index of the first event matching (party, action), if any.
  std::optional<std::size_t> find(Party party, std::string_view action) const;

 private:
  std::vector<Event> events_;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

struct SessionOutcome {
  SessionStatus status = SessionStatus::AuthReject;
  double alice_tamper_error_rate = 0.0;
  /// Unset when Bob never measured (the session aborted first).
  std::optional<double> bob_tamper_error_rate;
  /// True when d == 0 and the tamper checks passed vacuously.
  bool vacuous_tamper_check = false;
  BitString alice_key_bits;
  BitString bob_key_bits;  // empty if Bob never measured
  BitString token;
  BitString session_key;
  std::vector<SwapRecord> swap_records;
  AdversaryReport adversary_report;
  EventLog events;
};

}  // namespace qauth
