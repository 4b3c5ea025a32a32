#ifndef SSPLAB_PROTOCOL_HPP
#define SSPLAB_PROTOCOL_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ssplab/crypto.hpp"
#include "ssplab/rng.hpp"

namespace ssplab {

enum class Variant { Original, SM, Enhanced };

const char* variant_name(Variant v);
std::optional<Variant> variant_from_name(const std::string& s);

inline int rounds_for(Variant v) { return v == Variant::Enhanced ? 10 : 20; }

// 6-decimal-digit user passkey, 20 significant bits.
struct Passkey {
    uint32_t value = 0;

    explicit Passkey(uint32_t v) : value(v) {
        if (v > 999999) throw std::invalid_argument("passkey out of range");
    }

    // i-th least significant bit, i in 1..20.
    int bit(int i) const {
        if (i < 1 || i > 20) throw std::out_of_range("passkey bit index");
        return (value >> (i - 1)) & 1;
    }

    std::string to_string() const;  // exactly 6 digits, zero padded
    static Passkey parse(const std::string& s);
};

enum class Role { Initiator, Responder };

inline const char* role_name(Role r) { return r == Role::Initiator ? "A" : "B"; }

struct DeviceIdentity {
    std::array<uint8_t, 6> bd_addr{};
    std::array<uint8_t, 3> iocap{};
    Role role = Role::Initiator;
};

// Display+input initiator, input-only responder.
DeviceIdentity default_device_a();
DeviceIdentity default_device_b();

enum class MessageKind { PublicKey, SeedNonce, MaskedPosition, Commit, NonceReveal, Phase3Check };

const char* message_kind_name(MessageKind k);
std::optional<MessageKind> message_kind_from_name(const std::string& s);

struct Message {
    MessageKind kind;
    int round = 0;  // 0 = not a round message
    Bytes payload;
    Role sender;
};

using Transcript = std::vector<Message>;

// Sum of payload bits over phase-2 messages (seed nonces, masked positions,
// commitments, nonce reveals).
uint64_t phase2_bits(const Transcript& t);
uint64_t phase1_bits(const Transcript& t);
uint64_t phase3_bits(const Transcript& t);

// SM per-session authentication value: six most significant decimal digits of
// f2_seed(DHKey, N_a0 || N_b0 || passkey), as a 20-bit integer.
uint32_t sm_derive_rstar(const DHKey& w, const Nonce128& n_a0, const Nonce128& n_b0, Passkey r);
uint32_t sm_derive_rstar(HmacSha256& keyed, const Nonce128& n_a0, const Nonce128& n_b0,
                         uint32_t passkey);

// Six most significant decimal digits of a digest, as an integer.
uint32_t top6_decimal_digits(const Digest256& d);

// Enhanced protocol's per-session 256-bit passkey derivative r'.
Digest256 enhanced_derive_rprime(const DHKey& w, Passkey r);

// Byte i of r', counting from the most significant byte (i = 1 is the MSB).
uint8_t rprime_block(const Digest256& rp, int i);

// Bit at position pos of r', counting from the most significant bit
// (pos = 1 is the MSB of byte 1); pos in 1..255.
int rprime_bit(const Digest256& rp, int pos);

// XOR mask for the position byte; self-inverse.
inline uint8_t mask_position(uint8_t n_prime, uint8_t block) { return n_prime ^ block; }

enum class AbortReason { None, CommitMismatch, Phase3Mismatch, ProtocolViolation };

const char* abort_reason_name(AbortReason r);

struct StepEvent {
    enum class Kind { Continue, Phase2Done, SessionDone, Abort };
    Kind kind = Kind::Continue;
    AbortReason reason = AbortReason::None;
    int round = 0;  // round at which an abort happened, 0 otherwise
};

struct StepResult {
    std::vector<Message> out;
    StepEvent event;
};

// One device's state machine for a single SSP session, phases 1-4.
class Party {
public:
    Party(Variant variant, CurveId curve, const DeviceIdentity& self, const DeviceIdentity& peer,
          Passkey passkey, Rng& rng);

    // Initiator kick-off: emits the phase-1 public key.
    std::vector<Message> start();

    StepResult on_message(const Message& m);

    bool done() const { return phase_ == Phase::Done; }
    bool aborted() const { return phase_ == Phase::Aborted; }

    const std::optional<LinkKey>& link_key() const { return link_key_; }
    const std::optional<DHKey>& dhkey() const { return dhkey_; }
    const KeyPair& keypair() const { return keypair_; }
    std::optional<uint32_t> rstar() const { return rstar_; }
    const std::optional<Digest256>& rprime() const { return rprime_; }
    uint64_t phase2_hashes() const { return phase2_hashes_; }

private:
    enum class Phase { KeyExchange, SeedExchange, Rounds, Confirm, Done, Aborted };
    enum class Await { PublicKey, SeedNonce, Mask, Commit, NonceReveal, Phase3Check, Nothing };

    Message make(MessageKind kind, int round, Bytes payload) const;
    void enter_phase2(std::vector<Message>& out);
    void begin_round(std::vector<Message>& out);
    void send_commit(std::vector<Message>& out);
    int own_round_bit() const;        // Original/SM: disclosed bit for round_
    int expected_peer_bit() const;    // bit the peer must have committed to
    Commitment128 phase3_value(bool own) const;
    StepResult abort(AbortReason reason);

    Variant variant_;
    CurveId curve_;
    DeviceIdentity self_;
    DeviceIdentity peer_;
    Passkey passkey_;
    Rng* rng_;

    Phase phase_ = Phase::KeyExchange;
    Await await_;
    int round_ = 0;
    int total_rounds_;

    KeyPair keypair_;
    Bytes peer_pub_x_, peer_pub_y_;
    std::optional<DHKey> dhkey_;

    // SM seed exchange
    Nonce128 seed_own_{}, seed_peer_{};
    std::optional<uint32_t> rstar_;

    // Enhanced
    std::optional<Digest256> rprime_;
    uint8_t nprime_own_ = 0;
    uint8_t nprime_peer_ = 0;  // recovered from the peer's masked byte

    // current round
    Nonce128 nonce_own_{};
    Commitment128 commit_peer_{};
    int committed_bit_ = 0;

    // final-round nonces carried into phase 3
    Nonce128 final_own_{}, final_peer_{};

    uint64_t phase2_hashes_ = 0;  // f-function calls this party made in phase 2

    std::optional<LinkKey> link_key_;
};

enum class SessionStatus { Success, AbortPhase2, AbortPhase3 };

const char* session_status_name(SessionStatus s);

struct SessionOutcome {
    SessionStatus status = SessionStatus::Success;
    AbortReason abort_reason = AbortReason::None;
    int abort_round = 0;
    Role abort_side = Role::Initiator;  // side that detected the mismatch
    std::optional<LinkKey> link_key_a, link_key_b;
    Transcript transcript;
    std::optional<DHKey> dhkey;
    std::optional<uint32_t> rstar_a, rstar_b;
    uint64_t phase2_hashes = 0;
};

SessionOutcome run_session(Variant variant, Passkey passkey_a, Passkey passkey_b,
                           const DeviceIdentity& id_a, const DeviceIdentity& id_b, CurveId curve,
                           Rng& rng);

SessionOutcome run_session(Variant variant, Passkey passkey, CurveId curve, Rng& rng);

}  // namespace ssplab

#endif
