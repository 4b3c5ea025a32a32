#ifndef SSPLAB_ADVERSARY_HPP
#define SSPLAB_ADVERSARY_HPP

#include <optional>
#include <vector>

#include "ssplab/protocol.hpp"

namespace ssplab {

struct CapturedSession {
    Transcript transcript;
    Variant variant = Variant::Original;
    // Present only when the capture came from an active MITM run; a passive
    // eavesdropper never learns the DH secrets.
    std::optional<DHKey> dhkey;
};

struct RecoveryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// §-style passive bit recovery: replays each round's commitment against both
// bit encodings using the revealed nonce and public-key x-coordinates from
// the transcript. Needs no DHKey. At most two f1 evaluations per round.
Passkey passive_recover_original(const CapturedSession& capture);

// Ascending candidate passkeys.
using CandidateSet = std::vector<uint32_t>;

CandidateSet full_candidate_space(uint32_t space_bound);

// Keeps the candidates whose SM r* has its n_bits most significant bits (of
// the 20-bit value) equal to observed_bits. n_bits = 0 is a vacuous filter.
CandidateSet bruteforce_filter(const DHKey& dhkey, const Nonce128& n_a0, const Nonce128& n_b0,
                               uint32_t observed_bits, int n_bits, const CandidateSet& candidates);

inline uint32_t top_bits20(uint32_t rstar, int n_bits) {
    return n_bits == 0 ? 0 : rstar >> (20 - n_bits);
}

enum class GuessSource { Fixed, FromCandidates, Oracle };

struct MitmStrategy {
    GuessSource source = GuessSource::Fixed;
    uint32_t fixed_guess = 0;
};

// Per-round observations an active attacker collects from one enhanced-variant
// victim before it aborts; the raw material for the candidate filter.
struct EnhancedRoundObs {
    int round = 0;
    uint8_t mask_sent = 0;       // attacker's masked position byte
    uint8_t mask_received = 0;   // victim's masked position byte
    Commitment128 victim_commit{};
    Nonce128 victim_nonce{};
    bool victim_nonce_seen = false;
    int attacker_bit = 0;        // bit the attacker committed to
    bool victim_continued = false;  // victim's check of the attacker's commit
};

struct MitmSideResult {
    CapturedSession capture;
    bool reached_phase4 = false;
    int rounds_survived = 0;           // victim checks the attacker passed
    int rounds_played = 0;             // rounds in which the victim checked us
    std::vector<int> bits_learned;     // victim's disclosed commitment bits
    std::vector<EnhancedRoundObs> enhanced_obs;
    Bytes victim_pub_x, attacker_pub_x;
};

// Runs one attacker-in-the-middle pairing attempt against a single honest
// device. The victim's role decides the message order (an initiating victim
// reveals its nonce first). The attacker impersonates imp_id and uses `guess`
// as its passkey.
MitmSideResult mitm_side(Variant variant, CurveId curve, const DeviceIdentity& victim_id,
                         const DeviceIdentity& imp_id, Passkey victim_passkey, uint32_t guess,
                         Rng& rng);

struct MitmResult {
    CapturedSession capture_a, capture_b;
    bool success = false;  // attacker reached phase 4 with at least one side
    std::vector<int> bits_learned_a;
    int rounds_survived_a = 0, rounds_survived_b = 0;
    int rounds_played_a = 0, rounds_played_b = 0;
};

MitmResult mitm_run(Variant variant, const MitmStrategy& strategy, const DeviceIdentity& id_a,
                    const DeviceIdentity& id_b, Passkey true_passkey, CurveId curve, Rng& rng);

struct CampaignResult {
    int sessions_used = 0;
    std::optional<uint32_t> recovered;
    std::vector<size_t> candidate_history;  // surviving set size per session
    bool max_sessions_exceeded = false;
    size_t final_candidates = 0;
};

// Algorithm-style cross-session intersection attack on the SM variant. Each
// session the attacker is granted the session's DHKey, seed nonces and the
// n_known most significant bits of that session's r* (the paper's
// predicted-bits assumption, made an explicit parameter).
CampaignResult attack_campaign_sm(Passkey true_passkey, int n_known, int max_sessions,
                                  uint32_t space_bound, Rng& rng);

// Adaptation of the brute-force attack to the enhanced variant: the attacker
// MITMs device A each session, then filters candidates on commitment
// consistency and on the victim's observed accept/abort decision. With
// grant_dhkeys = false (passive capture only) the filter is vacuous.
CampaignResult attack_campaign_enhanced(Passkey true_passkey, int max_sessions,
                                        uint32_t space_bound, Rng& rng, bool grant_dhkeys = true,
                                        GuessSource guess_source = GuessSource::FromCandidates);

}  // namespace ssplab

#endif
