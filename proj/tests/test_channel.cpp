#include <cmath>

#include <gtest/gtest.h>

#include "qauth/channel.hpp"
#include "qauth/protocol.hpp"

using namespace qauth;

namespace {

SessionPlan plan_for(std::size_t k, std::size_t d, std::uint64_t seed) {
  SessionConfig cfg;
  cfg.k = k;
  cfg.d = d;
  RandomSource rand(seed, 0);
  return plan_session(cfg, rand);
}

}  // namespace

TEST(Streams, KeySlotsShareOnePhiPlusRegister) {
  const SessionPlan plan = plan_for(6, 4, 11);
  RandomSource rand(1, 0);
  const StreamPair s = build_streams(plan, {}, rand);
  ASSERT_EQ(s.to_alice.slots.size(), 10u);
  for (std::size_t pos = 0; pos < plan.length(); ++pos) {
    const PhotonSlot& a = s.to_alice.slots[pos];
    const PhotonSlot& b = s.to_bob.slots[pos];
    EXPECT_EQ(a.position, pos);
    EXPECT_EQ(a.photon_count, 1);
    if (plan.slots[pos].role == SlotRole::Key) {
      EXPECT_EQ(a.reg, b.reg);
      EXPECT_TRUE(a.reg->equal_up_to_phase(prepare_bell(kPhiPlus)));
      EXPECT_EQ(a.qubit, 0);
      EXPECT_EQ(b.qubit, 1);
    } else {
      EXPECT_NE(a.reg, b.reg);
      const PlannedSlot& p = plan.slots[pos];
      EXPECT_NEAR(a.reg->probability(0, p.basis, p.value), 1.0, 1e-12);
      EXPECT_NEAR(b.reg->probability(0, p.basis, p.value), 1.0, 1e-12);
    }
  }
}

TEST(Streams, PhotonCountFrequency) {
  const SessionPlan plan = plan_for(50, 50, 3);
  RandomSource rand(5, 0);
  int singles = 0;
  int total = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const StreamPair s = build_streams(plan, {0.3}, rand);
    for (const auto* stream : {&s.to_alice, &s.to_bob}) {
      for (const PhotonSlot& slot : stream->slots) {
        singles += slot.photon_count == 1;
        ++total;
      }
    }
  }
  const double f = static_cast<double>(singles) / total;
  EXPECT_LE(std::abs(f - 0.3), 4.0 * std::sqrt(0.3 * 0.7 / total));
}

TEST(Streams, PhotonModelValidation) {
  EXPECT_THROW((PhotonCountModel{0.0}.validate()), std::invalid_argument);
  EXPECT_THROW((PhotonCountModel{1.5}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((PhotonCountModel{1.0}.validate()));
}

TEST(Loss, ZeroLossDrawsNothing) {
  const SessionPlan plan = plan_for(4, 4, 1);
  RandomSource a(9, 9);
  RandomSource b(9, 9);
  StreamPair s = build_streams(plan, {}, a);
  (void)build_streams(plan, {}, b);
  apply_loss(s.to_alice, 0.0, a);
  EXPECT_EQ(a.next_u64(), b.next_u64());
  for (const PhotonSlot& slot : s.to_alice.slots) EXPECT_FALSE(slot.lost);
  EXPECT_THROW(apply_loss(s.to_alice, 1.0, a), std::invalid_argument);
}

TEST(Tap, SkipsLostSlots) {
  const SessionPlan plan = plan_for(4, 0, 1);
  RandomSource rand(2, 0);
  StreamPair s = build_streams(plan, {}, rand);
  s.to_alice.slots[1].lost = true;
  std::vector<std::size_t> seen;
  apply_tap(s.to_alice, [&](PhotonSlot& slot, RandomSource&) { seen.push_back(slot.position); },
            rand);
  EXPECT_EQ(seen, (std::vector<std::size_t>{0, 2, 3}));
}

TEST(Classical, SealedRoundTripAndTamperDetection) {
  ClassicalChannel ch;
  ch.set_server_key(Party::Alice, 42);
  EveState eve;
  const ClassicalMessage m = ch.classical_send(
      ch.make_sealed(Party::TrustedServer, Party::Alice, MessageKind::TamperSpec, "3;0R1"), eve);
  EXPECT_TRUE(m.sealed);
  EXPECT_EQ(eve.intercepted_messages, 1u);
  EXPECT_EQ(ch.open(m), "3;0R1");
  EXPECT_EQ(m.body.find("3;0R1"), std::string::npos);

  ClassicalMessage forged = m;
  forged.body[9] = static_cast<char>(forged.body[9] ^ 1);
  EXPECT_THROW((void)ch.open(forged), std::runtime_error);
  EXPECT_THROW((void)ch.make_sealed(Party::Alice, Party::Bob, MessageKind::Token, "x"),
               std::invalid_argument);
}

TEST(Classical, LocationKnowledgeTiming) {
  TamperSpec spec{5, {{1, MeasBasis::Diagonal, 1}, {3, MeasBasis::Rectilinear, 0}}};
  for (LocationKnowledge lk :
       {LocationKnowledge::Never, LocationKnowledge::AfterMeasurement, LocationKnowledge::Realtime}) {
    ClassicalChannel ch;
    ch.set_server_key(Party::Bob, 7);
    AttackConfig cfg;
    cfg.kind = AttackKind::InterceptResend;
    cfg.location_knowledge = lk;
    EveState eve(cfg, MeasBasis::Rectilinear);
    (void)ch.classical_send(
        ch.make_sealed(Party::TrustedServer, Party::Bob, MessageKind::TamperSpec, spec.encode()),
        eve);
    EXPECT_EQ(eve.tamper_positions_known, lk == LocationKnowledge::Realtime);
    if (lk == LocationKnowledge::Realtime) {
      EXPECT_EQ(eve.known_tamper_positions, (std::set<std::size_t>{1, 3}));
    }
    EXPECT_EQ(eve.deferred_decryptions, lk == LocationKnowledge::AfterMeasurement ? 1u : 0u);
  }
}
