#pragma once

// Quantum photon streams from the trusted server to Alice and Bob, and the
// classical channel an eavesdropper can read but not modify.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qauth/attack_types.hpp"
#include "qauth/qsim.hpp"
#include "qauth/random.hpp"
#include "qauth/session_types.hpp"

namespace qauth {

/// One time slot on one path. Carries no role/basis/value metadata: a tap
/// sees only the position, the photon count and the traveling qubit.
struct PhotonSlot {
  std::size_t position = 0;
  std::shared_ptr<StateRegister> reg;  // shared with the twin slot for key bits
  int qubit = 0;
  int photon_count = 1;
  bool lost = false;
};

struct QuantumStream {
  Path path = Path::ToAlice;  // never Path::Both
  std::vector<PhotonSlot> slots;
};

struct StreamPair {
  QuantumStream to_alice;
  QuantumStream to_bob;

  QuantumStream& on(Path path) { return path == Path::ToBob ? to_bob : to_alice; }
};

/// Two-valued photon-number model: one photon with probability p1,
/// otherwise two.
struct PhotonCountModel {
  double p1 = 1.0;

  void validate() const;
};

/// Honest emission: Phi+ pairs on key slots, identically polarized twins on
/// tamper slots, then per-path photon counts.
StreamPair build_streams(const SessionPlan& plan, const PhotonCountModel& model,
                         RandomSource& rand);

/// Draws photon_count for every slot of both paths, position-major, Alice
/// before Bob. Used by all emitters so their draw order matches.
void assign_photon_counts(StreamPair& streams, const PhotonCountModel& model,
                          RandomSource& rand);

using Tap = std::function<void(PhotonSlot&, RandomSource&)>;

/// Invokes the tap once per non-lost slot, in order.
void apply_tap(QuantumStream& stream, const Tap& tap, RandomSource& rand);

/// Marks each slot lost with probability p_loss (0 <= p_loss < 1).
void apply_loss(QuantumStream& stream, double p_loss, RandomSource& rand);

// ---------------------------------------------------------------------------
// Classical channel.

enum class MessageKind : std::uint8_t { SessionRequest, TamperSpec, Token };

struct ClassicalMessage {
  Party sender = Party::Alice;
  Party receiver = Party::TrustedServer;
  MessageKind kind = MessageKind::SessionRequest;
  bool sealed = false;  // body is ciphertext under the sender/receiver key
  std::string body;
};

/// Pluggable authenticated encryption between a party and the server.
class AuthenticatedCipher {
 public:
  virtual ~AuthenticatedCipher() = default;
  virtual std::string seal(std::uint64_t key, std::uint64_t nonce,
                           const std::string& plaintext) const = 0;
  /// nullopt when the tag does not verify.
  virtual std::optional<std::string> open(std::uint64_t key, const std::string& sealed) const = 0;
};

/// Keyed pseudo-random keystream with an FNV tag. A placeholder so the
/// message flow is realistic; it is not a secure cipher.
class KeystreamCipher final : public AuthenticatedCipher {
 public:
  std::string seal(std::uint64_t key, std::uint64_t nonce,
                   const std::string& plaintext) const override;
  std::optional<std::string> open(std::uint64_t key, const std::string& sealed) const override;
};

/// Reliable, unmodifiable delivery with a copy always offered to Eve.
class ClassicalChannel {
 public:
  explicit ClassicalChannel(std::shared_ptr<const AuthenticatedCipher> cipher =
                                std::make_shared<KeystreamCipher>());

  /// Key shared between `party` and the trusted server.
  void set_server_key(Party party, std::uint64_t key);

  /// Seals `plaintext` under the key shared by sender and receiver (one of
  /// them must be the server).
  ClassicalMessage make_sealed(Party sender, Party receiver, MessageKind kind,
                               const std::string& plaintext);
  static ClassicalMessage make_clear(Party sender, Party receiver, MessageKind kind,
                                     std::string plaintext);

  /// Delivers the message verbatim and hands Eve a copy. Under REALTIME
  /// location knowledge Eve reads a tamper-spec message immediately; under
  /// AFTER_MEASUREMENT it is queued and read only after the session.
  ClassicalMessage classical_send(const ClassicalMessage& msg, EveState& eve) const;

  /// Receiver-side decryption; throws std::runtime_error on a bad tag.
  std::string open(const ClassicalMessage& msg) const;

 private:
  std::uint64_t key_for(Party a, Party b) const;

  std::shared_ptr<const AuthenticatedCipher> cipher_;
  std::map<Party, std::uint64_t> keys_;
  std::uint64_t next_nonce_ = 1;
};

}  // namespace qauth
