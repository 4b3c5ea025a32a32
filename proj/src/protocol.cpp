#include "ssplab/protocol.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>

namespace ssplab {

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Original: return "original";
        case Variant::SM: return "sm";
        case Variant::Enhanced: return "enhanced";
    }
    return "?";
}

std::optional<Variant> variant_from_name(const std::string& s) {
    if (s == "original") return Variant::Original;
    if (s == "sm") return Variant::SM;
    if (s == "enhanced") return Variant::Enhanced;
    return std::nullopt;
}

const char* message_kind_name(MessageKind k) {
    switch (k) {
        case MessageKind::PublicKey: return "public_key";
        case MessageKind::SeedNonce: return "seed_nonce";
        case MessageKind::MaskedPosition: return "masked_position";
        case MessageKind::Commit: return "commit";
        case MessageKind::NonceReveal: return "nonce_reveal";
        case MessageKind::Phase3Check: return "phase3_check";
    }
    return "?";
}

std::optional<MessageKind> message_kind_from_name(const std::string& s) {
    if (s == "public_key") return MessageKind::PublicKey;
    if (s == "seed_nonce") return MessageKind::SeedNonce;
    if (s == "masked_position") return MessageKind::MaskedPosition;
    if (s == "commit") return MessageKind::Commit;
    if (s == "nonce_reveal") return MessageKind::NonceReveal;
    if (s == "phase3_check") return MessageKind::Phase3Check;
    return std::nullopt;
}

const char* abort_reason_name(AbortReason r) {
    switch (r) {
        case AbortReason::None: return "none";
        case AbortReason::CommitMismatch: return "commit_mismatch";
        case AbortReason::Phase3Mismatch: return "phase3_mismatch";
        case AbortReason::ProtocolViolation: return "protocol_violation";
    }
    return "?";
}

const char* session_status_name(SessionStatus s) {
    switch (s) {
        case SessionStatus::Success: return "success";
        case SessionStatus::AbortPhase2: return "abort_phase2";
        case SessionStatus::AbortPhase3: return "abort_phase3";
    }
    return "?";
}

std::string Passkey::to_string() const {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%06u", value);
    return buf;
}

Passkey Passkey::parse(const std::string& s) {
    if (s.size() != 6 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw std::invalid_argument("passkey must be exactly 6 decimal digits");
    return Passkey(static_cast<uint32_t>(std::stoul(s)));
}

DeviceIdentity default_device_a() {
    return DeviceIdentity{{0x00, 0x1b, 0xdc, 0x0a, 0x00, 0x01}, {0x01, 0x00, 0x01}, Role::Initiator};
}

DeviceIdentity default_device_b() {
    return DeviceIdentity{{0x00, 0x1b, 0xdc, 0x0b, 0x00, 0x02}, {0x00, 0x00, 0x01}, Role::Responder};
}

uint64_t phase2_bits(const Transcript& t) {
    uint64_t bits = 0;
    for (const auto& m : t) {
        switch (m.kind) {
            case MessageKind::SeedNonce:
            case MessageKind::MaskedPosition:
            case MessageKind::Commit:
            case MessageKind::NonceReveal:
                bits += m.payload.size() * 8;
                break;
            default:
                break;
        }
    }
    return bits;
}

uint64_t phase1_bits(const Transcript& t) {
    uint64_t bits = 0;
    for (const auto& m : t)
        if (m.kind == MessageKind::PublicKey) bits += m.payload.size() * 8;
    return bits;
}

uint64_t phase3_bits(const Transcript& t) {
    uint64_t bits = 0;
    for (const auto& m : t)
        if (m.kind == MessageKind::Phase3Check) bits += m.payload.size() * 8;
    return bits;
}

uint32_t top6_decimal_digits(const Digest256& d) {
    // 32-bit limbs, big-endian; repeated division by 1e9 yields base-1e9
    // chunks from least significant upward.
    uint32_t limbs[8];
    for (int i = 0; i < 8; ++i)
        limbs[i] = static_cast<uint32_t>(d[4 * i]) << 24 | static_cast<uint32_t>(d[4 * i + 1]) << 16 |
                   static_cast<uint32_t>(d[4 * i + 2]) << 8 | d[4 * i + 3];

    uint32_t chunks[10];
    int nchunks = 0;
    int top = 0;
    while (top < 8) {
        while (top < 8 && limbs[top] == 0) ++top;
        if (top == 8) break;
        uint64_t rem = 0;
        for (int i = top; i < 8; ++i) {
            uint64_t cur = rem << 32 | limbs[i];
            limbs[i] = static_cast<uint32_t>(cur / 1000000000u);
            rem = cur % 1000000000u;
        }
        chunks[nchunks++] = static_cast<uint32_t>(rem);
    }
    if (nchunks == 0) return 0;

    char digits[96];
    int len = std::snprintf(digits, sizeof digits, "%u", chunks[nchunks - 1]);
    for (int i = nchunks - 2; i >= 0; --i)
        len += std::snprintf(digits + len, sizeof digits - len, "%09u", chunks[i]);

    uint32_t out = 0;
    for (int i = 0; i < 6; ++i) out = out * 10 + (i < len ? digits[i] - '0' : 0);
    return out;
}

uint32_t sm_derive_rstar(HmacSha256& keyed, const Nonce128& n_a0, const Nonce128& n_b0,
                         uint32_t passkey) {
    uint8_t msg[36];
    std::copy(n_a0.begin(), n_a0.end(), msg);
    std::copy(n_b0.begin(), n_b0.end(), msg + 16);
    msg[32] = static_cast<uint8_t>(passkey >> 24);
    msg[33] = static_cast<uint8_t>(passkey >> 16);
    msg[34] = static_cast<uint8_t>(passkey >> 8);
    msg[35] = static_cast<uint8_t>(passkey);
    return top6_decimal_digits(keyed.compute(msg));
}

uint32_t sm_derive_rstar(const DHKey& w, const Nonce128& n_a0, const Nonce128& n_b0, Passkey r) {
    Bytes na(n_a0.begin(), n_a0.end());
    Bytes nb(n_b0.begin(), n_b0.end());
    return top6_decimal_digits(f2_seed(w, {na, nb, be32(r.value)}));
}

Digest256 enhanced_derive_rprime(const DHKey& w, Passkey r) {
    return f2_seed(w, {be32(r.value)});
}

uint8_t rprime_block(const Digest256& rp, int i) {
    if (i < 1 || i > 10) throw std::out_of_range("rprime block index");
    return rp[i - 1];
}

int rprime_bit(const Digest256& rp, int pos) {
    if (pos < 1 || pos > 255) throw std::out_of_range("rprime bit position");
    int idx = (pos - 1) / 8;
    int shift = 7 - (pos - 1) % 8;
    return (rp[idx] >> shift) & 1;
}

namespace {

// A recovered position of 0 can only happen under an r' mismatch (honest
// peers draw n' in 1..255 and recover it exactly); the committed bit is then
// arbitrary since the session is doomed to abort.
int committed_bit_at(const Digest256& rp, uint8_t pos) {
    return pos == 0 ? 0 : rprime_bit(rp, pos);
}

}  // namespace

Party::Party(Variant variant, CurveId curve, const DeviceIdentity& self, const DeviceIdentity& peer,
             Passkey passkey, Rng& rng)
    : variant_(variant),
      curve_(curve),
      self_(self),
      peer_(peer),
      passkey_(passkey),
      rng_(&rng),
      total_rounds_(rounds_for(variant)) {
    await_ = self_.role == Role::Initiator ? Await::PublicKey : Await::PublicKey;
}

Message Party::make(MessageKind kind, int round, Bytes payload) const {
    return Message{kind, round, std::move(payload), self_.role};
}

std::vector<Message> Party::start() {
    if (self_.role != Role::Initiator || phase_ != Phase::KeyExchange)
        throw std::logic_error("start() is for a fresh initiator");
    keypair_ = ecdh_keygen(*rng_, curve_);
    Bytes payload = keypair_.pub_x;
    append(payload, keypair_.pub_y);
    return {make(MessageKind::PublicKey, 0, std::move(payload))};
}

StepResult Party::abort(AbortReason reason) {
    phase_ = Phase::Aborted;
    await_ = Await::Nothing;
    return StepResult{{}, StepEvent{StepEvent::Kind::Abort, reason, round_}};
}

int Party::own_round_bit() const {
    if (variant_ == Variant::SM) return (rstar_.value() >> (round_ - 1)) & 1;
    return passkey_.bit(round_);
}

int Party::expected_peer_bit() const {
    if (variant_ == Variant::Enhanced) return rprime_bit(rprime_.value(), nprime_own_);
    return own_round_bit();
}

void Party::enter_phase2(std::vector<Message>& out) {
    if (variant_ == Variant::Enhanced) {
        rprime_ = enhanced_derive_rprime(dhkey_.value(), passkey_);
        ++phase2_hashes_;
    }

    if (self_.role == Role::Initiator) {
        if (variant_ == Variant::SM) {
            phase_ = Phase::SeedExchange;
            seed_own_ = rng_->nonce128();
            out.push_back(make(MessageKind::SeedNonce, 0, Bytes(seed_own_.begin(), seed_own_.end())));
            await_ = Await::SeedNonce;
        } else {
            phase_ = Phase::Rounds;
            round_ = 1;
            begin_round(out);
        }
    } else {
        phase_ = variant_ == Variant::SM ? Phase::SeedExchange : Phase::Rounds;
        round_ = variant_ == Variant::SM ? 0 : 1;
        await_ = variant_ == Variant::SM ? Await::SeedNonce
                 : variant_ == Variant::Enhanced ? Await::Mask
                                                 : Await::Commit;
    }
}

// Initiator's opening move of a round; the responder acts on receipt.
void Party::begin_round(std::vector<Message>& out) {
    if (variant_ == Variant::Enhanced) {
        nprime_own_ = rng_->u8_range();
        uint8_t masked = mask_position(nprime_own_, rprime_block(rprime_.value(), round_));
        out.push_back(make(MessageKind::MaskedPosition, round_, {masked}));
        await_ = Await::Mask;
    } else {
        send_commit(out);
        await_ = Await::Commit;
    }
}

void Party::send_commit(std::vector<Message>& out) {
    nonce_own_ = rng_->nonce128();
    if (variant_ == Variant::Enhanced)
        committed_bit_ = committed_bit_at(rprime_.value(), nprime_peer_);
    else
        committed_bit_ = own_round_bit();
    Commitment128 c = f1(keypair_.pub_x, peer_pub_x_, nonce_own_, encode_bit(committed_bit_));
    ++phase2_hashes_;
    out.push_back(make(MessageKind::Commit, round_, Bytes(c.begin(), c.end())));
}

StepResult Party::on_message(const Message& m) {
    if (phase_ == Phase::Done || phase_ == Phase::Aborted)
        return abort(AbortReason::ProtocolViolation);

    std::vector<Message> out;

    switch (m.kind) {
        case MessageKind::PublicKey: {
            if (phase_ != Phase::KeyExchange || await_ != Await::PublicKey ||
                m.payload.size() != 2 * coord_width(curve_))
                return abort(AbortReason::ProtocolViolation);
            size_t w = coord_width(curve_);
            peer_pub_x_.assign(m.payload.begin(), m.payload.begin() + w);
            peer_pub_y_.assign(m.payload.begin() + w, m.payload.end());
            if (self_.role == Role::Responder) {
                keypair_ = ecdh_keygen(*rng_, curve_);
                Bytes payload = keypair_.pub_x;
                append(payload, keypair_.pub_y);
                out.push_back(make(MessageKind::PublicKey, 0, std::move(payload)));
            }
            dhkey_ = ecdh_shared(curve_, keypair_.priv, peer_pub_x_, peer_pub_y_);
            enter_phase2(out);
            return {std::move(out), StepEvent{StepEvent::Kind::Continue}};
        }

        case MessageKind::SeedNonce: {
            if (phase_ != Phase::SeedExchange || await_ != Await::SeedNonce ||
                m.payload.size() != 16)
                return abort(AbortReason::ProtocolViolation);
            std::copy(m.payload.begin(), m.payload.end(), seed_peer_.begin());
            if (self_.role == Role::Responder) {
                seed_own_ = rng_->nonce128();
                out.push_back(
                    make(MessageKind::SeedNonce, 0, Bytes(seed_own_.begin(), seed_own_.end())));
            }
            const Nonce128& na0 = self_.role == Role::Initiator ? seed_own_ : seed_peer_;
            const Nonce128& nb0 = self_.role == Role::Initiator ? seed_peer_ : seed_own_;
            rstar_ = sm_derive_rstar(dhkey_.value(), na0, nb0, passkey_);
            ++phase2_hashes_;
            phase_ = Phase::Rounds;
            round_ = 1;
            if (self_.role == Role::Initiator)
                begin_round(out);
            else
                await_ = Await::Commit;
            return {std::move(out), StepEvent{StepEvent::Kind::Continue}};
        }

        case MessageKind::MaskedPosition: {
            if (phase_ != Phase::Rounds || variant_ != Variant::Enhanced || await_ != Await::Mask ||
                m.round != round_ || m.payload.size() != 1)
                return abort(AbortReason::ProtocolViolation);
            if (self_.role == Role::Responder) {
                nprime_own_ = rng_->u8_range();
                uint8_t masked = mask_position(nprime_own_, rprime_block(rprime_.value(), round_));
                out.push_back(make(MessageKind::MaskedPosition, round_, {masked}));
            }
            nprime_peer_ = mask_position(m.payload[0], rprime_block(rprime_.value(), round_));
            if (self_.role == Role::Initiator) {
                send_commit(out);
                await_ = Await::Commit;
            } else {
                await_ = Await::Commit;
            }
            return {std::move(out), StepEvent{StepEvent::Kind::Continue}};
        }

        case MessageKind::Commit: {
            if (phase_ != Phase::Rounds || await_ != Await::Commit || m.round != round_ ||
                m.payload.size() != 16)
                return abort(AbortReason::ProtocolViolation);
            std::copy(m.payload.begin(), m.payload.end(), commit_peer_.begin());
            if (self_.role == Role::Initiator) {
                out.push_back(
                    make(MessageKind::NonceReveal, round_, Bytes(nonce_own_.begin(), nonce_own_.end())));
            } else {
                send_commit(out);
            }
            await_ = Await::NonceReveal;
            return {std::move(out), StepEvent{StepEvent::Kind::Continue}};
        }

        case MessageKind::NonceReveal: {
            if (phase_ != Phase::Rounds || await_ != Await::NonceReveal || m.round != round_ ||
                m.payload.size() != 16)
                return abort(AbortReason::ProtocolViolation);
            Nonce128 peer_nonce;
            std::copy(m.payload.begin(), m.payload.end(), peer_nonce.begin());
            Commitment128 expect =
                f1(peer_pub_x_, keypair_.pub_x, peer_nonce, encode_bit(expected_peer_bit()));
            ++phase2_hashes_;
            if (expect != commit_peer_) return abort(AbortReason::CommitMismatch);

            if (round_ == total_rounds_) {
                final_own_ = nonce_own_;
                final_peer_ = peer_nonce;
            }
            if (self_.role == Role::Responder)
                out.push_back(
                    make(MessageKind::NonceReveal, round_, Bytes(nonce_own_.begin(), nonce_own_.end())));

            if (round_ < total_rounds_) {
                ++round_;
                if (self_.role == Role::Initiator)
                    begin_round(out);
                else
                    await_ = variant_ == Variant::Enhanced ? Await::Mask : Await::Commit;
                return {std::move(out), StepEvent{StepEvent::Kind::Continue}};
            }

            phase_ = Phase::Confirm;
            if (self_.role == Role::Initiator) {
                Commitment128 e = phase3_value(true);
                out.push_back(make(MessageKind::Phase3Check, 0, Bytes(e.begin(), e.end())));
            }
            await_ = Await::Phase3Check;
            return {std::move(out), StepEvent{StepEvent::Kind::Phase2Done}};
        }

        case MessageKind::Phase3Check: {
            if (phase_ != Phase::Confirm || await_ != Await::Phase3Check || m.payload.size() != 16)
                return abort(AbortReason::ProtocolViolation);
            Commitment128 expect = phase3_value(false);
            if (!std::equal(m.payload.begin(), m.payload.end(), expect.begin()))
                return abort(AbortReason::Phase3Mismatch);
            if (self_.role == Role::Responder) {
                Commitment128 e = phase3_value(true);
                out.push_back(make(MessageKind::Phase3Check, 0, Bytes(e.begin(), e.end())));
            }
            // phase 4: canonical initiator-first argument order on both sides
            const Nonce128& na = self_.role == Role::Initiator ? final_own_ : final_peer_;
            const Nonce128& nb = self_.role == Role::Initiator ? final_peer_ : final_own_;
            const auto& addr_a = self_.role == Role::Initiator ? self_.bd_addr : peer_.bd_addr;
            const auto& addr_b = self_.role == Role::Initiator ? peer_.bd_addr : self_.bd_addr;
            link_key_ = f2_link_key(dhkey_.value(), na, nb, addr_a, addr_b);
            phase_ = Phase::Done;
            await_ = Await::Nothing;
            return {std::move(out), StepEvent{StepEvent::Kind::SessionDone}};
        }
    }
    return abort(AbortReason::ProtocolViolation);
}

// own = true: the check value this side sends; own = false: the value the
// peer's check must equal, recomputed with this side's passkey.
Commitment128 Party::phase3_value(bool own) const {
    Bytes r = be32(passkey_.value);
    if (own)
        return f3(dhkey_.value(), final_own_, final_peer_, r, self_.iocap, self_.bd_addr,
                  peer_.bd_addr);
    return f3(dhkey_.value(), final_peer_, final_own_, r, peer_.iocap, peer_.bd_addr, self_.bd_addr);
}

SessionOutcome run_session(Variant variant, Passkey passkey_a, Passkey passkey_b,
                           const DeviceIdentity& id_a, const DeviceIdentity& id_b, CurveId curve,
                           Rng& rng) {
    Party a(variant, curve, id_a, id_b, passkey_a, rng);
    Party b(variant, curve, id_b, id_a, passkey_b, rng);

    SessionOutcome outcome;

    // synchronous in-memory duplex channel, no loss or reordering
    std::deque<Message> queue;
    for (auto& m : a.start()) queue.push_back(std::move(m));

    bool done_a = false, done_b = false;
    while (!queue.empty()) {
        Message m = std::move(queue.front());
        queue.pop_front();
        outcome.transcript.push_back(m);

        Party& target = m.sender == Role::Initiator ? b : a;
        StepResult r = target.on_message(m);
        for (auto& o : r.out) queue.push_back(std::move(o));

        if (r.event.kind == StepEvent::Kind::Abort) {
            outcome.status = r.event.reason == AbortReason::Phase3Mismatch
                                 ? SessionStatus::AbortPhase3
                                 : SessionStatus::AbortPhase2;
            outcome.abort_reason = r.event.reason;
            outcome.abort_round = r.event.round;
            outcome.abort_side = (&target == &a) ? Role::Initiator : Role::Responder;
            break;
        }
        if (r.event.kind == StepEvent::Kind::SessionDone) {
            (&target == &a ? done_a : done_b) = true;
            if (done_a && done_b) break;
        }
    }

    if (done_a && done_b) {
        outcome.status = SessionStatus::Success;
        outcome.link_key_a = a.link_key();
        outcome.link_key_b = b.link_key();
    }
    outcome.dhkey = a.dhkey();
    outcome.rstar_a = a.rstar();
    outcome.rstar_b = b.rstar();
    outcome.phase2_hashes = a.phase2_hashes() + b.phase2_hashes();
    return outcome;
}

SessionOutcome run_session(Variant variant, Passkey passkey, CurveId curve, Rng& rng) {
    return run_session(variant, passkey, passkey, default_device_a(), default_device_b(), curve, rng);
}

}  // namespace ssplab
