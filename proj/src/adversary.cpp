#include "qauth/adversary.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qauth {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table,
                        std::string_view name) {
  for (const auto& [value, text] : table) {
    if (text == name) return value;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
  for (const auto& [v, text] : table) {
    if (v == value) return text;
  }
  return "?";
}

constexpr std::array<std::pair<AttackKind, std::string_view>, 6> kAttackNames{{
    {AttackKind::None, "NONE"},
    {AttackKind::InterceptResend, "INTERCEPT_RESEND"},
    {AttackKind::SubsetGuess, "SUBSET_GUESS"},
    {AttackKind::PhotonNumberSplitting, "PNS"},
    {AttackKind::ServerProduct, "SERVER_PRODUCT"},
    {AttackKind::ServerGhz, "SERVER_GHZ"},
}};

constexpr std::array<std::pair<Path, std::string_view>, 3> kPathNames{{
    {Path::ToAlice, "TO_ALICE"},
    {Path::ToBob, "TO_BOB"},
    {Path::Both, "BOTH"},
}};

constexpr std::array<std::pair<BasisStrategy, std::string_view>, 2> kStrategyNames{{
    {BasisStrategy::RandomPerSlot, "RANDOM_PER_SLOT"},
    {BasisStrategy::Fixed, "FIXED"},
}};

constexpr std::array<std::pair<LocationKnowledge, std::string_view>, 3> kKnowledgeNames{{
    {LocationKnowledge::Never, "NEVER"},
    {LocationKnowledge::AfterMeasurement, "AFTER_MEASUREMENT"},
    {LocationKnowledge::Realtime, "REALTIME"},
}};

}  // namespace

std::string_view to_string(AttackKind kind) { return name_of(kAttackNames, kind); }
std::string_view to_string(Path path) { return name_of(kPathNames, path); }
std::string_view to_string(BasisStrategy strategy) { return name_of(kStrategyNames, strategy); }
std::string_view to_string(LocationKnowledge knowledge) {
  return name_of(kKnowledgeNames, knowledge);
}
std::optional<AttackKind> parse_attack_kind(std::string_view name) {
  return lookup(kAttackNames, name);
}
std::optional<Path> parse_path(std::string_view name) { return lookup(kPathNames, name); }
std::optional<BasisStrategy> parse_basis_strategy(std::string_view name) {
  return lookup(kStrategyNames, name);
}
std::optional<LocationKnowledge> parse_location_knowledge(std::string_view name) {
  return lookup(kKnowledgeNames, name);
}

void AttackConfig::validate(std::size_t stream_length) const {
  if (kind == AttackKind::SubsetGuess && g > stream_length) {
    throw std::invalid_argument("attack.g = " + std::to_string(g) +
                                " exceeds the stream length " + std::to_string(stream_length));
  }
}

// ---------------------------------------------------------------------------

void intercept_resend_tap(PhotonSlot& slot, BasisChoice strategy, EveState& eve,
                          RandomSource& rand) {
  MeasBasis basis = strategy.fixed;
  if (eve.tamper_positions_known) {
    if (eve.known_tamper_positions.contains(slot.position)) return;
    basis = eve.key_basis;
  } else if (strategy.strategy == BasisStrategy::RandomPerSlot) {
    basis = static_cast<MeasBasis>(rand.bit());
  }
  // Measuring in place both reads the qubit and "resends" the collapsed state.
  const Bit outcome = measure_in_basis(*slot.reg, slot.qubit, basis, rand);
  eve.known_key_bits[slot.position] = KnownBit{outcome, basis == eve.key_basis};
  eve.disturbance_log.push_back(slot.position);
}

void subset_guess_tap(QuantumStream& stream, std::size_t g, EveState& eve, RandomSource& rand) {
  const std::size_t n = stream.slots.size();
  if (g > n) {
    throw std::out_of_range("subset_guess_tap: g = " + std::to_string(g) +
                            " exceeds stream length " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < g; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rand.below(n - i));
    std::swap(order[i], order[j]);
  }
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(g));
  const BasisChoice key_basis = BasisChoice::fixed_to(eve.key_basis);
  for (std::size_t i = 0; i < g; ++i) {
    PhotonSlot& slot = stream.slots[order[i]];
    if (!slot.lost) intercept_resend_tap(slot, key_basis, eve, rand);
  }
}

void pns_tap(PhotonSlot& slot, EveState& eve, RandomSource& rand) {
  if (slot.photon_count >= 2) {
    eve.split_positions.push_back(slot.position);
    return;
  }
  intercept_resend_tap(slot, BasisChoice::fixed_to(eve.key_basis), eve, rand);
}

void eavesdrop(StreamPair& streams, EveState& eve, RandomSource& rand) {
  const AttackConfig& cfg = eve.config;
  for (Path p : {Path::ToAlice, Path::ToBob}) {
    if (!cfg.taps(p)) continue;
    QuantumStream& stream = streams.on(p);
    switch (cfg.kind) {
      case AttackKind::InterceptResend: {
        const BasisChoice choice{cfg.basis_strategy, cfg.fixed_basis};
        apply_tap(
            stream,
            [&](PhotonSlot& slot, RandomSource& r) { intercept_resend_tap(slot, choice, eve, r); },
            rand);
        break;
      }
      case AttackKind::SubsetGuess:
        subset_guess_tap(stream, cfg.g, eve, rand);
        break;
      case AttackKind::PhotonNumberSplitting:
        apply_tap(
            stream, [&](PhotonSlot& slot, RandomSource& r) { pns_tap(slot, eve, r); }, rand);
        break;
      case AttackKind::None:
      case AttackKind::ServerProduct:
      case AttackKind::ServerGhz:
        return;
    }
  }
}

namespace {

PhotonSlot honest_tamper_slot(std::size_t pos, const PlannedSlot& planned) {
  return {pos, std::make_shared<StateRegister>(prepare_polarized(planned.value, planned.basis)), 0,
          1, false};
}

}  // namespace

StreamPair emit_product_streams(const SessionPlan& plan, const PhotonCountModel& model,
                                EveState& eve, RandomSource& rand) {
  StreamPair streams;
  streams.to_alice.path = Path::ToAlice;
  streams.to_bob.path = Path::ToBob;
  for (std::size_t pos = 0; pos < plan.length(); ++pos) {
    const PlannedSlot& planned = plan.slots[pos];
    if (planned.role == SlotRole::Tamper) {
      streams.to_alice.slots.push_back(honest_tamper_slot(pos, planned));
      streams.to_bob.slots.push_back(honest_tamper_slot(pos, planned));
      continue;
    }
    const Bit x = rand.bit();
    eve.server_record[pos] = x;
    streams.to_alice.slots.push_back(
        {pos, std::make_shared<StateRegister>(prepare_polarized(x, MeasBasis::Rectilinear)), 0, 1,
         false});
    streams.to_bob.slots.push_back(
        {pos, std::make_shared<StateRegister>(prepare_polarized(x, MeasBasis::Rectilinear)), 0, 1,
         false});
  }
  assign_photon_counts(streams, model, rand);
  return streams;
}

StreamPair emit_ghz_streams(const SessionPlan& plan, const PhotonCountModel& model,
                            EveState& eve, RandomSource& rand) {
  StreamPair streams;
  streams.to_alice.path = Path::ToAlice;
  streams.to_bob.path = Path::ToBob;
  for (std::size_t pos = 0; pos < plan.length(); ++pos) {
    const PlannedSlot& planned = plan.slots[pos];
    if (planned.role == SlotRole::Tamper) {
      streams.to_alice.slots.push_back(honest_tamper_slot(pos, planned));
      streams.to_bob.slots.push_back(honest_tamper_slot(pos, planned));
      continue;
    }
    auto ghz = std::make_shared<StateRegister>(prepare_ghz());
    streams.to_alice.slots.push_back({pos, ghz, 0, 1, false});
    streams.to_bob.slots.push_back({pos, ghz, 1, 1, false});
    eve.retained.push_back({pos, ghz, 2});
  }
  assign_photon_counts(streams, model, rand);
  return streams;
}

void server_finalize(EveState& eve, RandomSource& rand) {
  for (RetainedQubit& kept : eve.retained) {
    eve.server_record[kept.position] =
        measure_in_basis(*kept.reg, kept.qubit, MeasBasis::Rectilinear, rand);
  }
  eve.retained.clear();
}

void resolve_split_copy(EveState& eve, std::size_t position, Bit value) {
  eve.known_key_bits[position] = KnownBit{value, true};
}

AdversaryReport eve_knowledge_report(const EveState& eve, const SessionPlan& plan,
                                     const SessionOutcome& outcome) {
  AdversaryReport report;
  report.kind = eve.config.kind;
  report.location_knowledge = eve.config.location_knowledge;
  report.detected = outcome.status == SessionStatus::TamperAbort;
  report.tamper_positions_known = eve.tamper_positions_known;
  report.dual_path_extrapolation =
      eve.config.path == Path::Both && !eve.config.is_server_attack() &&
      eve.config.kind != AttackKind::None;

  const std::vector<std::size_t> keys = plan.key_positions();
  if (keys.empty() || outcome.alice_key_bits.size() != keys.size()) return report;

  std::size_t known = 0;
  std::size_t server_match = 0;
  for (std::size_t idx = 0; idx < keys.size(); ++idx) {
    const Bit alice = outcome.alice_key_bits[idx];
    if (auto it = eve.known_key_bits.find(keys[idx]);
        it != eve.known_key_bits.end() && it->second.certain && it->second.value == alice) {
      ++known;
    }
    if (auto it = eve.server_record.find(keys[idx]);
        it != eve.server_record.end() && it->second == alice) {
      ++server_match;
    }
  }
  const double k = static_cast<double>(keys.size());
  report.key_knowledge = static_cast<double>(known) / k;
  if (eve.config.is_server_attack()) report.server_copy_match = static_cast<double>(server_match) / k;
  return report;
}

}  // namespace qauth
