#include "qauth/channel.hpp"

#include <stdexcept>

namespace qauth {

void PhotonCountModel::validate() const {
  if (!(p1 > 0.0 && p1 <= 1.0)) {
    throw std::invalid_argument("photon.p1 must lie in (0, 1]");
  }
}

void assign_photon_counts(StreamPair& streams, const PhotonCountModel& model,
                          RandomSource& rand) {
  model.validate();
  for (std::size_t pos = 0; pos < streams.to_alice.slots.size(); ++pos) {
    streams.to_alice.slots[pos].photon_count = rand.bernoulli(model.p1) ? 1 : 2;
    streams.to_bob.slots[pos].photon_count = rand.bernoulli(model.p1) ? 1 : 2;
  }
}

StreamPair build_streams(const SessionPlan& plan, const PhotonCountModel& model,
                         RandomSource& rand) {
  StreamPair streams;
  streams.to_alice.path = Path::ToAlice;
  streams.to_bob.path = Path::ToBob;
  streams.to_alice.slots.reserve(plan.length());
  streams.to_bob.slots.reserve(plan.length());

  for (std::size_t pos = 0; pos < plan.length(); ++pos) {
    const PlannedSlot& planned = plan.slots[pos];
    if (planned.role == SlotRole::Key) {
      auto pair = std::make_shared<StateRegister>(prepare_bell(kPhiPlus));
      streams.to_alice.slots.push_back({pos, pair, 0, 1, false});
      streams.to_bob.slots.push_back({pos, pair, 1, 1, false});
    } else {
      streams.to_alice.slots.push_back(
          {pos, std::make_shared<StateRegister>(prepare_polarized(planned.value, planned.basis)),
           0, 1, false});
      streams.to_bob.slots.push_back(
          {pos, std::make_shared<StateRegister>(prepare_polarized(planned.value, planned.basis)),
           0, 1, false});
    }
  }
  assign_photon_counts(streams, model, rand);
  return streams;
}

void apply_tap(QuantumStream& stream, const Tap& tap, RandomSource& rand) {
  for (PhotonSlot& slot : stream.slots) {
    if (!slot.lost) tap(slot, rand);
  }
}

void apply_loss(QuantumStream& stream, double p_loss, RandomSource& rand) {
  if (!(p_loss >= 0.0 && p_loss < 1.0)) {
    throw std::invalid_argument("photon.p_loss must lie in [0, 1)");
  }
  if (p_loss == 0.0) return;
  for (PhotonSlot& slot : stream.slots) {
    if (rand.bernoulli(p_loss)) slot.lost = true;
  }
}

// ---------------------------------------------------------------------------

namespace {

void append_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t read_u64(const std::string& in, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return v;
}

std::string apply_keystream(std::uint64_t key, std::uint64_t nonce, std::string_view data) {
  RandomSource stream(key, nonce);
  std::string out(data);
  for (std::size_t i = 0; i < out.size(); i += 8) {
    const std::uint64_t block = stream.next_u64();
    for (std::size_t j = 0; j < 8 && i + j < out.size(); ++j) {
      out[i + j] = static_cast<char>(static_cast<unsigned char>(out[i + j]) ^
                                     static_cast<unsigned char>((block >> (8 * j)) & 0xff));
    }
  }
  return out;
}

std::uint64_t tag_of(std::uint64_t key, std::uint64_t nonce, std::string_view ciphertext) {
  std::string material;
  append_u64(material, key);
  append_u64(material, nonce);
  material.append(ciphertext);
  return fnv1a64(material);
}

}  // namespace

// Layout: nonce (8 bytes LE) | ciphertext | tag (8 bytes LE).
std::string KeystreamCipher::seal(std::uint64_t key, std::uint64_t nonce,
                                  const std::string& plaintext) const {
  std::string out;
  append_u64(out, nonce);
  const std::string ct = apply_keystream(key, nonce, plaintext);
  out += ct;
  append_u64(out, tag_of(key, nonce, ct));
  return out;
}

std::optional<std::string> KeystreamCipher::open(std::uint64_t key,
                                                 const std::string& sealed) const {
  if (sealed.size() < 16) return std::nullopt;
  const std::uint64_t nonce = read_u64(sealed, 0);
  const std::string ct = sealed.substr(8, sealed.size() - 16);
  if (read_u64(sealed, sealed.size() - 8) != tag_of(key, nonce, ct)) return std::nullopt;
  return apply_keystream(key, nonce, ct);
}

ClassicalChannel::ClassicalChannel(std::shared_ptr<const AuthenticatedCipher> cipher)
    : cipher_(std::move(cipher)) {
  if (!cipher_) throw std::invalid_argument("ClassicalChannel: null cipher");
}

void ClassicalChannel::set_server_key(Party party, std::uint64_t key) { keys_[party] = key; }

std::uint64_t ClassicalChannel::key_for(Party a, Party b) const {
  const Party client = a == Party::TrustedServer ? b : a;
  if ((a != Party::TrustedServer && b != Party::TrustedServer) || client == Party::TrustedServer) {
    throw std::invalid_argument("ClassicalChannel: sealed messages must involve the server");
  }
  const auto it = keys_.find(client);
  if (it == keys_.end()) {
    throw std::invalid_argument("ClassicalChannel: no key shared with " +
                                std::string(to_string(client)));
  }
  return it->second;
}

ClassicalMessage ClassicalChannel::make_sealed(Party sender, Party receiver, MessageKind kind,
                                               const std::string& plaintext) {
  ClassicalMessage msg{sender, receiver, kind, true, {}};
  msg.body = cipher_->seal(key_for(sender, receiver), next_nonce_++, plaintext);
  return msg;
}

ClassicalMessage ClassicalChannel::make_clear(Party sender, Party receiver, MessageKind kind,
                                              std::string plaintext) {
  return {sender, receiver, kind, false, std::move(plaintext)};
}

std::string ClassicalChannel::open(const ClassicalMessage& msg) const {
  if (!msg.sealed) return msg.body;
  auto plain = cipher_->open(key_for(msg.sender, msg.receiver), msg.body);
  if (!plain) throw std::runtime_error("ClassicalChannel: authentication tag mismatch");
  return *plain;
}

ClassicalMessage ClassicalChannel::classical_send(const ClassicalMessage& msg,
                                                  EveState& eve) const {
  ++eve.intercepted_messages;
  if (msg.kind == MessageKind::TamperSpec && msg.sealed) {
    switch (eve.config.location_knowledge) {
      case LocationKnowledge::Realtime: {
        // Models successful real-time cryptanalysis of the server message.
        const TamperSpec spec = TamperSpec::decode(open(msg));
        eve.tamper_positions_known = true;
        for (const TamperEntry& e : spec.entries) eve.known_tamper_positions.insert(e.position);
        break;
      }
      case LocationKnowledge::AfterMeasurement:
        ++eve.deferred_decryptions;
        break;
      case LocationKnowledge::Never:
        break;
    }
  }
  return msg;
}

}  // namespace qauth
