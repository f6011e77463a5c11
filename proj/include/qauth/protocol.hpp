#pragma once

// Session state machine for the trusted server (Tr), the initiator (Alice)
// and the responder (Bob), in both the base flow and the entanglement-swap
// flow that lets Alice detect a server which did not send entangled pairs.

#include <cstddef>
#include <stdexcept>

#include "qauth/attack_types.hpp"
#include "qauth/channel.hpp"
#include "qauth/random.hpp"
#include "qauth/session_types.hpp"

namespace qauth {

/// Thrown when a party receives a slot marked lost.
class IncompleteStreamError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform tamper subset and uniform bases/values. Deterministic given rand.
SessionPlan plan_session(const SessionConfig& cfg, RandomSource& rand);

BellLabel believed_state(BellLabel created, BellLabel outcome, BeliefRule rule);

/// Phi-kind: the key bit is Q_i's result; Psi-kind: its complement.
constexpr Bit derive_key_bit(BellLabel believed, Bit qi_result) {
  return believed.kind == BellKind::Phi ? qi_result : static_cast<Bit>(1 - qi_result);
}

/// Alice's swap step on one key slot: draws a random Bell pair (Q_i, Q_j),
/// appends it to the slot register, Bell-measures (Q_j, Q_k), then measures
/// Q_i. The register grows by two qubits in place.
SwapRecord alice_swap_step(PhotonSlot& slot, const SessionConfig& cfg, RandomSource& rand);

struct TamperCheck {
  bool pass = true;
  double error_rate = 0.0;
  bool vacuous = false;  // d == 0
};

/// Throws std::invalid_argument if observed.size() != spec.entries.size().
TamperCheck tamper_check(const BitString& observed, const TamperSpec& spec, double threshold);

struct Token {
  BitString token;
  BitString session_key;
};

/// token = first `a` bits, session_key = the rest. Requires 1 <= a <= size.
Token make_token(const BitString& key_bits, std::size_t a);

/// Exact prefix match. Throws std::invalid_argument on an empty token or one
/// longer than responder_bits.
bool authenticate(const BitString& responder_bits, const BitString& token);

struct ChannelConfig {
  PhotonCountModel photons;
  double p_loss = 0.0;
};

/// One full session. Never throws for protocol-level failures: those are
/// reported through SessionOutcome::status. Invalid configuration throws
/// std::invalid_argument.
SessionOutcome run_session(const SessionConfig& cfg, const AttackConfig& attack,
                           const ChannelConfig& channel, RandomSource& rand);

}  // namespace qauth
