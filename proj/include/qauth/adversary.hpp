#pragma once

// Attack strategies: intercept-resend, subset guessing, photon-number
// splitting, and the two compromised-server attacks.
//
// Modeling rules:
//  - A tap measures the traveling qubit in place. Registers are shared
//    between the two halves of a key slot, so the collapse reaches the
//    other party's later measurement.
//  - Under REALTIME location knowledge Eve has already read the tamper
//    layout: she skips tamper slots and measures key slots in the public
//    key basis.
//  - A split multi-photon pulse costs the receiver nothing. Eve's copy is
//    resolved after the session to the slot's key-basis value, and only key
//    slots yield knowledge (the tamper basis is secret).

#include <cstddef>

#include "qauth/attack_types.hpp"
#include "qauth/channel.hpp"
#include "qauth/random.hpp"
#include "qauth/session_types.hpp"

namespace qauth {

struct BasisChoice {
  BasisStrategy strategy = BasisStrategy::RandomPerSlot;
  MeasBasis fixed = MeasBasis::Rectilinear;

  static BasisChoice random() { return {BasisStrategy::RandomPerSlot, MeasBasis::Rectilinear}; }
  static BasisChoice fixed_to(MeasBasis b) { return {BasisStrategy::Fixed, b}; }
};

void intercept_resend_tap(PhotonSlot& slot, BasisChoice strategy, EveState& eve,
                          RandomSource& rand);

/// Picks g positions uniformly without replacement and intercepts each in
/// the key basis. Throws std::out_of_range if g exceeds the stream length.
void subset_guess_tap(QuantumStream& stream, std::size_t g, EveState& eve, RandomSource& rand);

void pns_tap(PhotonSlot& slot, EveState& eve, RandomSource& rand);

/// Runs the configured eavesdropping attack on the tapped path(s). Server
/// attacks and NONE are no-ops here.
void eavesdrop(StreamPair& streams, EveState& eve, RandomSource& rand);

/// Compromised server sending |x>|x> on key slots, recording x. Tamper
/// slots are honest.
StreamPair emit_product_streams(const SessionPlan& plan, const PhotonCountModel& model,
                                EveState& eve, RandomSource& rand);

/// Compromised server sending one GHZ qubit to each party per key slot and
/// keeping the third.
StreamPair emit_ghz_streams(const SessionPlan& plan, const PhotonCountModel& model,
                            EveState& eve, RandomSource& rand);

/// Measures retained GHZ qubits computationally into server_record.
void server_finalize(EveState& eve, RandomSource& rand);

/// Records the key-basis value Eve's split copy yields at `position`.
void resolve_split_copy(EveState& eve, std::size_t position, Bit value);

AdversaryReport eve_knowledge_report(const EveState& eve, const SessionPlan& plan,
                                     const SessionOutcome& outcome);

}  // namespace qauth
