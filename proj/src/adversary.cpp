#include "ssplab/adversary.hpp"

#include <algorithm>
#include <numeric>

namespace ssplab {

namespace {

int committed_bit_at(const Digest256& rp, uint8_t pos) {
    return pos == 0 ? 0 : rprime_bit(rp, pos);
}

const Message* find_message(const Transcript& t, Role sender, MessageKind kind, int round) {
    for (const auto& m : t)
        if (m.sender == sender && m.kind == kind && m.round == round) return &m;
    return nullptr;
}

}  // namespace

Passkey passive_recover_original(const CapturedSession& capture) {
    const Transcript& t = capture.transcript;
    const Message* pk_a = find_message(t, Role::Initiator, MessageKind::PublicKey, 0);
    const Message* pk_b = find_message(t, Role::Responder, MessageKind::PublicKey, 0);
    if (!pk_a || !pk_b || pk_a->payload.empty() || pk_a->payload.size() % 2 != 0)
        throw RecoveryError("transcript incomplete: missing public keys");
    size_t w = pk_a->payload.size() / 2;
    Bytes ax(pk_a->payload.begin(), pk_a->payload.begin() + w);
    Bytes bx(pk_b->payload.begin(), pk_b->payload.begin() + w);

    uint32_t value = 0;
    for (int i = 1; i <= 20; ++i) {
        const Message* commit = find_message(t, Role::Initiator, MessageKind::Commit, i);
        const Message* reveal = find_message(t, Role::Initiator, MessageKind::NonceReveal, i);
        if (!commit || !reveal || commit->payload.size() != 16 || reveal->payload.size() != 16)
            throw RecoveryError("transcript incomplete: missing round " + std::to_string(i));
        Nonce128 n;
        std::copy(reveal->payload.begin(), reveal->payload.end(), n.begin());
        Commitment128 c;
        std::copy(commit->payload.begin(), commit->payload.end(), c.begin());

        int bit;
        if (f1(ax, bx, n, encode_bit(1)) == c)
            bit = 1;
        else if (f1(ax, bx, n, encode_bit(0)) == c)
            bit = 0;
        else
            throw RecoveryError("round " + std::to_string(i) + " commitment matches neither bit");
        value |= static_cast<uint32_t>(bit) << (i - 1);
    }
    return Passkey(value);
}

CandidateSet full_candidate_space(uint32_t space_bound) {
    CandidateSet s(space_bound);
    std::iota(s.begin(), s.end(), 0u);
    return s;
}

CandidateSet bruteforce_filter(const DHKey& dhkey, const Nonce128& n_a0, const Nonce128& n_b0,
                               uint32_t observed_bits, int n_bits, const CandidateSet& candidates) {
    if (n_bits < 0 || n_bits > 20) throw std::invalid_argument("observed bit count out of range");
    if (n_bits == 0) return candidates;

    HmacSha256 keyed(dhkey.x);
    CandidateSet out;
    out.reserve(candidates.size() / 2);
    for (uint32_t c : candidates) {
        uint32_t rstar = sm_derive_rstar(keyed, n_a0, n_b0, c);
        if (top_bits20(rstar, n_bits) == observed_bits) out.push_back(c);
    }
    return out;
}

MitmSideResult mitm_side(Variant variant, CurveId curve, const DeviceIdentity& victim_id,
                         const DeviceIdentity& imp_id, Passkey victim_passkey, uint32_t guess,
                         Rng& rng) {
    MitmSideResult res;
    res.capture.variant = variant;
    const int total_rounds = rounds_for(variant);
    const Role att_role = victim_id.role == Role::Initiator ? Role::Responder : Role::Initiator;

    Party victim(variant, curve, victim_id, imp_id, victim_passkey, rng);

    Transcript& t = res.capture.transcript;
    std::vector<Message> inbox;  // victim messages not yet consumed
    bool victim_aborted = false;
    bool victim_done = false;

    auto note_victim = [&](std::vector<Message>&& msgs) {
        for (auto& m : msgs) {
            t.push_back(m);
            inbox.push_back(std::move(m));
        }
    };
    auto deliver = [&](Message m) {
        t.push_back(m);
        StepResult r = victim.on_message(m);
        if (r.event.kind == StepEvent::Kind::Abort) victim_aborted = true;
        if (r.event.kind == StepEvent::Kind::SessionDone) victim_done = true;
        note_victim(std::move(r.out));
    };
    auto take = [&](MessageKind kind) -> Message {
        for (auto it = inbox.begin(); it != inbox.end(); ++it) {
            if (it->kind == kind) {
                Message m = std::move(*it);
                inbox.erase(it);
                return m;
            }
        }
        throw std::logic_error("victim did not send expected message");
    };

    // phase 1: independent key exchange with the victim
    KeyPair att_kp = ecdh_keygen(rng, curve);
    Bytes att_pub = att_kp.pub_x;
    append(att_pub, att_kp.pub_y);
    if (victim_id.role == Role::Initiator) {
        note_victim(victim.start());
        deliver(Message{MessageKind::PublicKey, 0, att_pub, att_role});
    } else {
        deliver(Message{MessageKind::PublicKey, 0, att_pub, att_role});
    }
    Message victim_pk = take(MessageKind::PublicKey);
    size_t w = coord_width(curve);
    Bytes victim_x(victim_pk.payload.begin(), victim_pk.payload.begin() + w);
    Bytes victim_y(victim_pk.payload.begin() + w, victim_pk.payload.end());
    DHKey dh = ecdh_shared(curve, att_kp.priv, victim_x, victim_y);
    res.capture.dhkey = dh;
    res.victim_pub_x = victim_x;
    res.attacker_pub_x = att_kp.pub_x;

    if (victim_id.role == Role::Responder) {
        // victim computed its dh upon our public key; nothing pending
    }

    std::optional<uint32_t> rstar_att;
    std::optional<Digest256> rprime_att;
    if (variant == Variant::Enhanced) rprime_att = enhanced_derive_rprime(dh, Passkey(guess));

    if (variant == Variant::SM) {
        Nonce128 seed_att = rng.nonce128();
        Nonce128 seed_victim;
        if (victim_id.role == Role::Initiator) {
            Message sv = take(MessageKind::SeedNonce);
            std::copy(sv.payload.begin(), sv.payload.end(), seed_victim.begin());
            deliver(Message{MessageKind::SeedNonce, 0, Bytes(seed_att.begin(), seed_att.end()),
                            att_role});
            rstar_att = sm_derive_rstar(dh, seed_victim, seed_att, Passkey(guess));
        } else {
            deliver(Message{MessageKind::SeedNonce, 0, Bytes(seed_att.begin(), seed_att.end()),
                            att_role});
            Message sv = take(MessageKind::SeedNonce);
            std::copy(sv.payload.begin(), sv.payload.end(), seed_victim.begin());
            rstar_att = sm_derive_rstar(dh, seed_att, seed_victim, Passkey(guess));
        }
    }

    Nonce128 att_final{}, victim_final{};
    for (int round = 1; round <= total_rounds && !victim_aborted; ++round) {
        EnhancedRoundObs obs;
        obs.round = round;

        if (variant == Variant::Enhanced) {
            uint8_t nprime_att = rng.u8_range();
            uint8_t block_att = rprime_block(rprime_att.value(), round);
            obs.mask_sent = mask_position(nprime_att, block_att);
            Message victim_mask;
            if (victim_id.role == Role::Initiator) {
                victim_mask = take(MessageKind::MaskedPosition);
                deliver(Message{MessageKind::MaskedPosition, round, {obs.mask_sent}, att_role});
            } else {
                deliver(Message{MessageKind::MaskedPosition, round, {obs.mask_sent}, att_role});
                victim_mask = take(MessageKind::MaskedPosition);
            }
            obs.mask_received = victim_mask.payload[0];
        }

        // attacker's committed bit for this round
        int att_bit;
        switch (variant) {
            case Variant::Original:
                att_bit = (guess >> (round - 1)) & 1;
                break;
            case Variant::SM:
                att_bit = (rstar_att.value() >> (round - 1)) & 1;
                break;
            case Variant::Enhanced: {
                uint8_t pos = mask_position(obs.mask_received, rprime_block(rprime_att.value(), round));
                att_bit = committed_bit_at(rprime_att.value(), pos);
                break;
            }
        }
        obs.attacker_bit = att_bit;
        Nonce128 att_nonce = rng.nonce128();
        Commitment128 att_commit = f1(att_kp.pub_x, victim_x, att_nonce, encode_bit(att_bit));

        auto learn_bit = [&](const Commitment128& c, const Nonce128& n) {
            if (f1(victim_x, att_kp.pub_x, n, encode_bit(1)) == c)
                res.bits_learned.push_back(1);
            else if (f1(victim_x, att_kp.pub_x, n, encode_bit(0)) == c)
                res.bits_learned.push_back(0);
            else
                res.bits_learned.push_back(-1);  // never for an honest victim
        };

        if (victim_id.role == Role::Initiator) {
            // victim commits first and reveals first
            Message vc = take(MessageKind::Commit);
            std::copy(vc.payload.begin(), vc.payload.end(), obs.victim_commit.begin());
            deliver(Message{MessageKind::Commit, round,
                            Bytes(att_commit.begin(), att_commit.end()), att_role});
            Message vr = take(MessageKind::NonceReveal);
            std::copy(vr.payload.begin(), vr.payload.end(), obs.victim_nonce.begin());
            obs.victim_nonce_seen = true;
            learn_bit(obs.victim_commit, obs.victim_nonce);
            victim_final = obs.victim_nonce;
            att_final = att_nonce;

            res.rounds_played += 1;
            deliver(Message{MessageKind::NonceReveal, round,
                            Bytes(att_nonce.begin(), att_nonce.end()), att_role});
            if (!victim_aborted) {
                res.rounds_survived += 1;
                obs.victim_continued = true;
            }
        } else {
            // attacker commits first and reveals first
            deliver(Message{MessageKind::Commit, round,
                            Bytes(att_commit.begin(), att_commit.end()), att_role});
            Message vc = take(MessageKind::Commit);
            std::copy(vc.payload.begin(), vc.payload.end(), obs.victim_commit.begin());
            res.rounds_played += 1;
            deliver(Message{MessageKind::NonceReveal, round,
                            Bytes(att_nonce.begin(), att_nonce.end()), att_role});
            if (!victim_aborted) {
                res.rounds_survived += 1;
                obs.victim_continued = true;
                Message vr = take(MessageKind::NonceReveal);
                std::copy(vr.payload.begin(), vr.payload.end(), obs.victim_nonce.begin());
                obs.victim_nonce_seen = true;
                learn_bit(obs.victim_commit, obs.victim_nonce);
                victim_final = obs.victim_nonce;
                att_final = att_nonce;
            }
        }
        if (variant == Variant::Enhanced) res.enhanced_obs.push_back(obs);
    }

    if (!victim_aborted) {
        // phase 3; argument order mirrors the honest parties'
        Bytes r = be32(guess);
        if (victim_id.role == Role::Initiator) {
            Message ev = take(MessageKind::Phase3Check);
            Commitment128 e_att =
                f3(dh, att_final, victim_final, r, imp_id.iocap, imp_id.bd_addr, victim_id.bd_addr);
            deliver(Message{MessageKind::Phase3Check, 0, Bytes(e_att.begin(), e_att.end()),
                            att_role});
        } else {
            Commitment128 e_att =
                f3(dh, att_final, victim_final, r, imp_id.iocap, imp_id.bd_addr, victim_id.bd_addr);
            deliver(Message{MessageKind::Phase3Check, 0, Bytes(e_att.begin(), e_att.end()),
                            att_role});
        }
        res.reached_phase4 = victim_done;
    }
    return res;
}

MitmResult mitm_run(Variant variant, const MitmStrategy& strategy, const DeviceIdentity& id_a,
                    const DeviceIdentity& id_b, Passkey true_passkey, CurveId curve, Rng& rng) {
    uint32_t guess =
        strategy.source == GuessSource::Oracle ? true_passkey.value : strategy.fixed_guess;

    MitmResult res;
    MitmSideResult a = mitm_side(variant, curve, id_a, id_b, true_passkey, guess, rng);
    MitmSideResult b = mitm_side(variant, curve, id_b, id_a, true_passkey, guess, rng);
    res.success = a.reached_phase4 || b.reached_phase4;
    res.bits_learned_a = a.bits_learned;
    res.rounds_survived_a = a.rounds_survived;
    res.rounds_survived_b = b.rounds_survived;
    res.rounds_played_a = a.rounds_played;
    res.rounds_played_b = b.rounds_played;
    res.capture_a = std::move(a.capture);
    res.capture_b = std::move(b.capture);
    return res;
}

CampaignResult attack_campaign_sm(Passkey true_passkey, int n_known, int max_sessions,
                                  uint32_t space_bound, Rng& rng) {
    if (n_known < 1 || n_known > 20) throw std::invalid_argument("n_known out of range");

    CampaignResult res;
    CandidateSet candidates = full_candidate_space(space_bound);
    for (int s = 1; s <= max_sessions; ++s) {
        // fresh SM session: new DH secret and seed nonces each time
        DHKey dh{rng.bytes(coord_width(CurveId::P256)), CurveId::P256};
        Nonce128 n_a0 = rng.nonce128();
        Nonce128 n_b0 = rng.nonce128();
        uint32_t rstar_true = sm_derive_rstar(dh, n_a0, n_b0, true_passkey);
        uint32_t observed = top_bits20(rstar_true, n_known);

        candidates = bruteforce_filter(dh, n_a0, n_b0, observed, n_known, candidates);
        res.sessions_used = s;
        res.candidate_history.push_back(candidates.size());
        if (candidates.size() == 1) {
            res.recovered = candidates.front();
            res.final_candidates = 1;
            return res;
        }
    }
    res.max_sessions_exceeded = true;
    res.final_candidates = candidates.size();
    return res;
}

CampaignResult attack_campaign_enhanced(Passkey true_passkey, int max_sessions,
                                        uint32_t space_bound, Rng& rng, bool grant_dhkeys,
                                        GuessSource guess_source) {
    CampaignResult res;
    CandidateSet candidates = full_candidate_space(space_bound);
    DeviceIdentity id_a = default_device_a();
    DeviceIdentity id_b = default_device_b();

    for (int s = 1; s <= max_sessions; ++s) {
        uint32_t guess = guess_source == GuessSource::Oracle ? true_passkey.value
                                                             : candidates.front();
        MitmSideResult side =
            mitm_side(Variant::Enhanced, CurveId::P256, id_a, id_b, true_passkey, guess, rng);
        res.sessions_used = s;

        if (side.reached_phase4) {
            res.recovered = guess;
            res.candidate_history.push_back(1);
            res.final_candidates = 1;
            return res;
        }

        if (grant_dhkeys && side.capture.dhkey) {
            const DHKey& dh = *side.capture.dhkey;
            HmacSha256 keyed(dh.x);
            CandidateSet kept;
            kept.reserve(candidates.size());
            for (uint32_t p : candidates) {
                Bytes pk = be32(p);
                Digest256 rp = keyed.compute(pk);
                bool ok = true;
                for (const auto& obs : side.enhanced_obs) {
                    uint8_t block = rprime_block(rp, obs.round);
                    // bit the victim would have committed to under candidate p
                    uint8_t q = mask_position(obs.mask_sent, block);
                    int bit_p = committed_bit_at(rp, q);
                    if (obs.victim_nonce_seen) {
                        Commitment128 c = f1(side.victim_pub_x, side.attacker_pub_x,
                                             obs.victim_nonce, encode_bit(bit_p));
                        if (c != obs.victim_commit) {
                            ok = false;
                            break;
                        }
                    }
                    // the victim's accept/abort decision on our commitment
                    uint8_t nprime_v = mask_position(obs.mask_received, block);
                    if (nprime_v == 0) {
                        ok = false;  // honest devices draw positions in 1..255
                        break;
                    }
                    bool pred_pass = rprime_bit(rp, nprime_v) == obs.attacker_bit;
                    if (pred_pass != obs.victim_continued) {
                        ok = false;
                        break;
                    }
                }
                if (ok) kept.push_back(p);
            }
            candidates = std::move(kept);
        }
        res.candidate_history.push_back(candidates.size());
        if (candidates.size() == 1) {
            res.recovered = candidates.front();
            res.final_candidates = 1;
            return res;
        }
        if (candidates.empty()) break;  // cannot happen while the true key is in space
    }
    res.max_sessions_exceeded = true;
    res.final_candidates = candidates.size();
    return res;
}

}  // namespace ssplab
