#include "qauth/protocol.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string>

#include "qauth/adversary.hpp"

namespace qauth {

// ---------------------------------------------------------------------------
// Domain-type helpers.

std::string bits_to_string(const BitString& bits) {
  std::string out;
  out.reserve(bits.size());
  for (Bit b : bits) out.push_back(b ? '1' : '0');
  return out;
}

BitString bits_from_string(std::string_view text) {
  BitString bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw std::invalid_argument("bit string contains '" + std::string(1, c) + "'");
    bits.push_back(c == '1');
  }
  return bits;
}

std::string_view to_string(Mode mode) { return mode == Mode::Base ? "BASE" : "SWAP"; }

std::string_view to_string(BeliefRule rule) {
  return rule == BeliefRule::ComposeTable1 ? "COMPOSE_TABLE1" : "MEASUREMENT_RESULT";
}

std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "BASE") return Mode::Base;
  if (name == "SWAP") return Mode::Swap;
  return std::nullopt;
}

std::optional<BeliefRule> parse_belief_rule(std::string_view name) {
  if (name == "COMPOSE_TABLE1") return BeliefRule::ComposeTable1;
  if (name == "MEASUREMENT_RESULT") return BeliefRule::MeasurementResult;
  return std::nullopt;
}

std::string_view to_string(SessionStatus status) {
  switch (status) {
    case SessionStatus::AuthAccept:
      return "AUTH_ACCEPT";
    case SessionStatus::AuthReject:
      return "AUTH_REJECT";
    case SessionStatus::TamperAbort:
      return "TAMPER_ABORT";
    case SessionStatus::IncompleteStream:
      return "INCOMPLETE_STREAM";
  }
  return "?";
}

std::string_view to_string(Party party) {
  switch (party) {
    case Party::Alice:
      return "ALICE";
    case Party::Bob:
      return "BOB";
    case Party::TrustedServer:
      return "TR";
    case Party::Eve:
      return "EVE";
  }
  return "?";
}

void SessionConfig::validate() const {
  if (k < 1) throw std::invalid_argument("session.k must be at least 1");
  if (reveal_count < 1 || reveal_count > k) {
    throw std::invalid_argument("session.reveal_count must lie in [1, k]");
  }
  if (!(error_threshold >= 0.0 && error_threshold < 1.0)) {
    throw std::invalid_argument("session.error_threshold must lie in [0, 1)");
  }
  if (mode == Mode::Swap) {
    if (!belief_rule) throw std::invalid_argument("session.belief_rule is required in SWAP mode");
    if (key_basis != MeasBasis::Rectilinear) {
      throw std::invalid_argument("session.key_basis must be RECTILINEAR in SWAP mode");
    }
  }
  if (k + d > 100000) throw std::invalid_argument("session: k + d exceeds 100000 slots");
}

std::vector<std::size_t> SessionPlan::key_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].role == SlotRole::Key) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> SessionPlan::tamper_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].role == SlotRole::Tamper) out.push_back(i);
  }
  return out;
}

TamperSpec TamperSpec::from_plan(const SessionPlan& plan) {
  TamperSpec spec;
  spec.stream_length = plan.length();
  for (std::size_t i = 0; i < plan.length(); ++i) {
    const PlannedSlot& s = plan.slots[i];
    if (s.role == SlotRole::Tamper) spec.entries.push_back({i, s.basis, s.value});
  }
  return spec;
}

const TamperEntry* TamperSpec::find(std::size_t position) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), position,
                             [](const TamperEntry& e, std::size_t p) { return e.position < p; });
  if (it == entries.end() || it->position != position) return nullptr;
  return &*it;
}

bool TamperSpec::is_tamper(std::size_t position) const { return find(position) != nullptr; }

// "<length>;<pos><R|D><0|1>,..."
std::string TamperSpec::encode() const {
  std::string out = std::to_string(stream_length) + ";";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(entries[i].position);
    out.push_back(entries[i].basis == MeasBasis::Rectilinear ? 'R' : 'D');
    out.push_back(entries[i].value ? '1' : '0');
  }
  return out;
}

TamperSpec TamperSpec::decode(std::string_view text) {
  const auto fail = [&] { throw std::invalid_argument("TamperSpec: malformed encoding"); };
  TamperSpec spec;
  const auto semi = text.find(';');
  if (semi == std::string_view::npos || semi == 0) fail();
  spec.stream_length = std::stoull(std::string(text.substr(0, semi)));
  std::string_view rest = text.substr(semi + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    if (item.size() < 3) fail();
    const char basis = item[item.size() - 2];
    const char value = item[item.size() - 1];
    if ((basis != 'R' && basis != 'D') || (value != '0' && value != '1')) fail();
    const std::string digits(item.substr(0, item.size() - 2));
    if (digits.find_first_not_of("0123456789") != std::string::npos) fail();
    TamperEntry e{std::stoull(digits), basis == 'R' ? MeasBasis::Rectilinear : MeasBasis::Diagonal,
                  static_cast<Bit>(value == '1')};
    if (e.position >= spec.stream_length) fail();
    if (!spec.entries.empty() && e.position <= spec.entries.back().position) fail();
    spec.entries.push_back(e);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return spec;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

void EventLog::record(std::string step, Party party, std::string action,
                      std::string_view payload) {
  events_.push_back({std::move(step), party, std::move(action), fnv1a64(payload)});
}

std::string EventLog::to_text() const {
  std::string out;
  for (const Event& e : events_) {
    out += e.step;
    out += ' ';
    out += to_string(e.party);
    out += ' ';
    out += e.action;
    out += ' ';
    out += hex64(e.digest);
    out += '\n';
  }
  return out;
}

std::uint64_t EventLog::digest() const { return fnv1a64(to_text()); }

std::optional<std::size_t> EventLog::find(Party party, std::string_view action) const {
  for (std::size_t i = 0; i < events_.size(); ++i) {
    if (events_[i].party == party && events_[i].action == action) return i;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Operations.

SessionPlan plan_session(const SessionConfig& cfg, RandomSource& rand) {
  cfg.validate();
  const std::size_t n = cfg.length();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < cfg.d; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rand.below(n - i));
    std::swap(order[i], order[j]);
  }
  SessionPlan plan;
  plan.slots.assign(n, PlannedSlot{});
  for (std::size_t i = 0; i < cfg.d; ++i) plan.slots[order[i]].role = SlotRole::Tamper;
  for (PlannedSlot& slot : plan.slots) {
    if (slot.role != SlotRole::Tamper) continue;
    slot.basis = static_cast<MeasBasis>(rand.bit());
    slot.value = rand.bit();
  }
  return plan;
}

BellLabel believed_state(BellLabel created, BellLabel outcome, BeliefRule rule) {
  return rule == BeliefRule::ComposeTable1 ? bell_compose(created, outcome) : outcome;
}

SwapRecord alice_swap_step(PhotonSlot& slot, const SessionConfig& cfg, RandomSource& rand) {
  if (slot.lost) {
    throw IncompleteStreamError("alice_swap_step: slot " + std::to_string(slot.position) +
                                " was lost");
  }
  if (!cfg.belief_rule) throw std::invalid_argument("alice_swap_step: belief_rule not set");

  SwapRecord rec;
  rec.position = slot.position;
  rec.created = BellLabel::from_index(static_cast<int>(rand.below(4)));

  StateRegister& reg = *slot.reg;
  const int qi = reg.num_qubits();
  const int qj = qi + 1;
  reg = tensor(reg, prepare_bell(rec.created));

  rec.outcome = measure_bell(reg, qj, slot.qubit, rand);
  rec.qi_result = measure_in_basis(reg, qi, MeasBasis::Rectilinear, rand);
  rec.believed = believed_state(rec.created, rec.outcome, *cfg.belief_rule);
  rec.key_bit = derive_key_bit(rec.believed, rec.qi_result);
  return rec;
}

TamperCheck tamper_check(const BitString& observed, const TamperSpec& spec, double threshold) {
  if (observed.size() != spec.entries.size()) {
    throw std::invalid_argument("tamper_check: observed " + std::to_string(observed.size()) +
                                " bits for " + std::to_string(spec.entries.size()) +
                                " tamper slots");
  }
  if (observed.empty()) return {true, 0.0, true};
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed[i] != spec.entries[i].value) ++mismatches;
  }
  const double rate = static_cast<double>(mismatches) / static_cast<double>(observed.size());
  return {rate <= threshold, rate, false};
}

Token make_token(const BitString& key_bits, std::size_t a) {
  if (a < 1 || a > key_bits.size()) {
    throw std::invalid_argument("make_token: reveal count " + std::to_string(a) +
                                " outside [1, " + std::to_string(key_bits.size()) + "]");
  }
  const auto split = key_bits.begin() + static_cast<std::ptrdiff_t>(a);
  return {BitString(key_bits.begin(), split), BitString(split, key_bits.end())};
}

bool authenticate(const BitString& responder_bits, const BitString& token) {
  if (token.empty()) throw std::invalid_argument("authenticate: empty token");
  if (token.size() > responder_bits.size()) {
    throw std::invalid_argument("authenticate: token longer than responder key");
  }
  return std::equal(token.begin(), token.end(), responder_bits.begin());
}

namespace {

struct PartyMeasurement {
  BitString tamper_bits;
  BitString key_bits;
};

// Tamper slots in the spec basis, key slots in the public key basis.
PartyMeasurement measure_plainly(QuantumStream& stream, const TamperSpec& spec,
                                 MeasBasis key_basis, RandomSource& rand) {
  PartyMeasurement out;
  for (PhotonSlot& slot : stream.slots) {
    if (const TamperEntry* e = spec.find(slot.position)) {
      out.tamper_bits.push_back(measure_in_basis(*slot.reg, slot.qubit, e->basis, rand));
    } else {
      out.key_bits.push_back(measure_in_basis(*slot.reg, slot.qubit, key_basis, rand));
    }
  }
  return out;
}

std::string labels_payload(const std::vector<SwapRecord>& records, bool created) {
  std::string out;
  for (const SwapRecord& r : records) {
    out.push_back(static_cast<char>('0' + (created ? r.created : r.outcome).index()));
  }
  return out;
}

std::string check_payload(const TamperCheck& chk) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s %.17g", chk.pass ? "pass" : "fail", chk.error_rate);
  return buf;
}

bool any_lost(const QuantumStream& stream) {
  return std::any_of(stream.slots.begin(), stream.slots.end(),
                     [](const PhotonSlot& s) { return s.lost; });
}

}  // namespace

SessionOutcome run_session(const SessionConfig& cfg, const AttackConfig& attack,
                           const ChannelConfig& channel, RandomSource& rand) {
  cfg.validate();
  attack.validate(cfg.length());
  channel.photons.validate();
  if (!(channel.p_loss >= 0.0 && channel.p_loss < 1.0)) {
    throw std::invalid_argument("photon.p_loss must lie in [0, 1)");
  }

  SessionOutcome out;
  EventLog& log = out.events;
  EveState eve(attack, cfg.key_basis);

  ClassicalChannel classical;
  classical.set_server_key(Party::Alice, rand.next_u64());
  classical.set_server_key(Party::Bob, rand.next_u64());

  // Step 1: Alice asks the server for a session with Bob.
  const ClassicalMessage request = classical.classical_send(
      classical.make_sealed(Party::Alice, Party::TrustedServer, MessageKind::SessionRequest,
                            "REQUEST BOB"),
      eve);
  log.record("1", Party::Alice, "session_request", request.body);
  (void)classical.open(request);

  // Step 2: the server fixes the plan and sends the tamper layout to both.
  const SessionPlan plan = plan_session(cfg, rand);
  const std::string spec_text = TamperSpec::from_plan(plan).encode();
  const ClassicalMessage to_alice = classical.classical_send(
      classical.make_sealed(Party::TrustedServer, Party::Alice, MessageKind::TamperSpec, spec_text),
      eve);
  log.record("2", Party::TrustedServer, "tamper_spec_alice", to_alice.body);
  const ClassicalMessage to_bob = classical.classical_send(
      classical.make_sealed(Party::TrustedServer, Party::Bob, MessageKind::TamperSpec, spec_text),
      eve);
  log.record("2", Party::TrustedServer, "tamper_spec_bob", to_bob.body);
  const TamperSpec alice_spec = TamperSpec::decode(classical.open(to_alice));
  const TamperSpec bob_spec = TamperSpec::decode(classical.open(to_bob));

  // Step 3: quantum streams, loss, eavesdropping.
  StreamPair streams = [&] {
    switch (attack.kind) {
      case AttackKind::ServerProduct:
        return emit_product_streams(plan, channel.photons, eve, rand);
      case AttackKind::ServerGhz:
        return emit_ghz_streams(plan, channel.photons, eve, rand);
      default:
        return build_streams(plan, channel.photons, rand);
    }
  }();
  log.record("3", Party::TrustedServer, "quantum_streams", std::to_string(plan.length()));
  apply_loss(streams.to_alice, channel.p_loss, rand);
  apply_loss(streams.to_bob, channel.p_loss, rand);
  eavesdrop(streams, eve, rand);

  const auto finish = [&](SessionStatus status) -> SessionOutcome {
    out.status = status;
    server_finalize(eve, rand);
    if (!eve.split_positions.empty() && out.status != SessionStatus::IncompleteStream) {
      const std::vector<std::size_t> keys = plan.key_positions();
      for (std::size_t pos : eve.split_positions) {
        const auto it = std::lower_bound(keys.begin(), keys.end(), pos);
        if (it == keys.end() || *it != pos) continue;  // tamper slot: basis unknown to Eve
        const auto idx = static_cast<std::size_t>(it - keys.begin());
        // Bob's photon is the twin of every key photon; if he never measured,
        // Eve's copy is read against his still-unmeasured qubit.
        Bit value;
        if (idx < out.bob_key_bits.size()) {
          value = out.bob_key_bits[idx];
        } else {
          PhotonSlot& twin = streams.to_bob.slots[pos];
          value = measure_in_basis(*twin.reg, twin.qubit, cfg.key_basis, rand);
        }
        resolve_split_copy(eve, pos, value);
      }
    }
    out.adversary_report = eve_knowledge_report(eve, plan, out);
    return std::move(out);
  };

  if (any_lost(streams.to_alice)) {
    log.record("3", Party::Alice, "incomplete_stream", "");
    return finish(SessionStatus::IncompleteStream);
  }
  if (any_lost(streams.to_bob)) {
    log.record("3", Party::Bob, "incomplete_stream", "");
    return finish(SessionStatus::IncompleteStream);
  }

  // Step 4 (and the swap replacement 5a-5c): Alice measures.
  BitString alice_tamper;
  if (cfg.mode == Mode::Base) {
    PartyMeasurement m = measure_plainly(streams.to_alice, alice_spec, cfg.key_basis, rand);
    alice_tamper = std::move(m.tamper_bits);
    out.alice_key_bits = std::move(m.key_bits);
    log.record("4", Party::Alice, "measure",
               bits_to_string(alice_tamper) + "|" + bits_to_string(out.alice_key_bits));
  } else {
    for (PhotonSlot& slot : streams.to_alice.slots) {
      if (const TamperEntry* e = alice_spec.find(slot.position)) {
        alice_tamper.push_back(measure_in_basis(*slot.reg, slot.qubit, e->basis, rand));
      } else {
        out.swap_records.push_back(alice_swap_step(slot, cfg, rand));
        out.alice_key_bits.push_back(out.swap_records.back().key_bit);
      }
    }
    log.record("4", Party::Alice, "measure_tamper", bits_to_string(alice_tamper));
    log.record("5a", Party::Alice, "prepare_pairs", labels_payload(out.swap_records, true));
    log.record("5b", Party::Alice, "bell_measure", labels_payload(out.swap_records, false));
    log.record("5c", Party::Alice, "derive_key", bits_to_string(out.alice_key_bits));
  }

  // BASE: Bob measures as the photons arrive.
  BitString bob_tamper;
  const auto bob_measures = [&](const char* step) {
    PartyMeasurement m = measure_plainly(streams.to_bob, bob_spec, cfg.key_basis, rand);
    bob_tamper = std::move(m.tamper_bits);
    out.bob_key_bits = std::move(m.key_bits);
    log.record(step, Party::Bob, "measure",
               bits_to_string(bob_tamper) + "|" + bits_to_string(out.bob_key_bits));
  };
  if (cfg.mode == Mode::Base) bob_measures("4");

  const TamperCheck alice_check = tamper_check(alice_tamper, alice_spec, cfg.error_threshold);
  out.alice_tamper_error_rate = alice_check.error_rate;
  out.vacuous_tamper_check = alice_check.vacuous;
  log.record("4", Party::Alice, "tamper_check", check_payload(alice_check));

  std::optional<TamperCheck> bob_check;
  const auto bob_checks = [&](const char* step) {
    bob_check = tamper_check(bob_tamper, bob_spec, cfg.error_threshold);
    out.bob_tamper_error_rate = bob_check->error_rate;
    log.record(step, Party::Bob, "tamper_check", check_payload(*bob_check));
  };
  if (cfg.mode == Mode::Base) bob_checks("4");

  if (!alice_check.pass || (bob_check && !bob_check->pass)) {
    return finish(SessionStatus::TamperAbort);
  }

  // Step 5: the token goes out in the clear.
  Token token = make_token(out.alice_key_bits, cfg.reveal_count);
  out.token = token.token;
  out.session_key = std::move(token.session_key);
  const ClassicalMessage token_msg = classical.classical_send(
      ClassicalChannel::make_clear(Party::Alice, Party::Bob, MessageKind::Token,
                                   bits_to_string(out.token)),
      eve);
  log.record("5", Party::Alice, "token", token_msg.body);

  // 5d: in SWAP mode Bob measures only now that Alice's transmission exists.
  if (cfg.mode == Mode::Swap) {
    bob_measures("5d");
    bob_checks("5d");
    if (!bob_check->pass) return finish(SessionStatus::TamperAbort);
  }

  // Step 6.
  const bool accepted = authenticate(out.bob_key_bits, bits_from_string(token_msg.body));
  log.record("6", Party::Bob, "authenticate", accepted ? "accept" : "reject");
  return finish(accepted ? SessionStatus::AuthAccept : SessionStatus::AuthReject);
}

}  // namespace qauth
