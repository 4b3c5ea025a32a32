// End-to-end acceptance checks. Each numbered check prints one [PASS]/[FAIL]
// line; the exit code is the number of failed checks. argv[1] must be the
// path to the command-line binary (used by the determinism check).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ssplab/adversary.hpp"
#include "ssplab/sim.hpp"

using namespace ssplab;

namespace {

int g_failures = 0;

void report(int number, const char* what, bool ok, const std::string& detail = "") {
    std::printf("[%s] %d. %s%s%s\n", ok ? "PASS" : "FAIL", number, what,
                detail.empty() ? "" : " — ", detail.c_str());
    if (!ok) ++g_failures;
}

// ---------- 1. cost exactness ----------

void check_costs() {
    struct {
        Variant v;
        uint64_t bits, hashes, st192, st256;
    } expect[] = {
        {Variant::Original, 10240, 80, 212, 276},
        {Variant::SM, 10496, 82, 232, 296},
        {Variant::Enhanced, 5280, 42, 468, 532},
    };
    bool ok = true;
    std::string detail;
    try {
        for (auto& e : expect)
            for (CurveId c : {CurveId::P192, CurveId::P256}) {
                CostReport r = account_costs(e.v, c);
                uint64_t st = c == CurveId::P192 ? e.st192 : e.st256;
                if (r.bits_exchanged != e.bits || r.hash_invocations != e.hashes ||
                    r.storage_bits != st) {
                    ok = false;
                    detail = std::string(variant_name(e.v)) + "/" + curve_name(c) + " mismatch";
                }
            }
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    report(1, "cost accounting matches the published totals bit-for-bit", ok, detail);
}

// ---------- 2. honest completion ----------

void check_honest() {
    int failures = 0;
    for (Variant v : {Variant::Original, Variant::SM, Variant::Enhanced})
        for (int i = 0; i < 1000; ++i) {
            Rng rng(200000 + i * 3 + static_cast<int>(v));
            Passkey pk(rng.passkey());
            SessionOutcome o = run_session(v, pk, CurveId::P256, rng);
            if (o.status != SessionStatus::Success || !o.link_key_a || !o.link_key_b ||
                *o.link_key_a != *o.link_key_b)
                ++failures;
        }
    report(2, "1000 honest sessions per variant all derive identical link keys", failures == 0,
           failures ? std::to_string(failures) + " failures" : "");
}

// ---------- 3. passive break of the original variant ----------

void check_passive() {
    int exact = 0;
    uint64_t worst_f1 = 0;
    for (int i = 0; i < 100; ++i) {
        Rng rng(300000 + i);
        Passkey pk(rng.passkey());
        SessionOutcome o = run_session(Variant::Original, pk, CurveId::P256, rng);
        if (o.status != SessionStatus::Success) continue;
        uint64_t before = f_invocations();
        Passkey rec = passive_recover_original({o.transcript, Variant::Original, std::nullopt});
        uint64_t spent = f_invocations() - before;
        if (spent > worst_f1) worst_f1 = spent;
        if (rec.value == pk.value) ++exact;
    }
    bool ok = exact == 100 && worst_f1 <= 40;
    report(3, "single-capture passive recovery is exact 100/100 within 40 commitment replays", ok,
           std::to_string(exact) + "/100 exact, worst " + std::to_string(worst_f1) + " replays");
}

// ---------- 4. MITM guessing odds ----------

void check_mitm_odds() {
    MatrixSpec odds;
    odds.variant = Variant::Original;
    odds.mode = MatrixMode::MitmFixedGuess;
    odds.trials = 10000;
    odds.seed = 400000;
    odds.space_bound = 100;
    MatrixSummary s = run_matrix(odds);
    bool rate_ok = s.success_rate >= 0.007 && s.success_rate <= 0.013;

    MatrixSpec survival;
    survival.variant = Variant::Original;
    survival.mode = MatrixMode::MitmFixedGuess;
    survival.trials = 5000;
    survival.seed = 410000;
    survival.space_bound = 1000000;  // full space: guessed bits are coin flips
    MatrixSummary t = run_matrix(survival);
    double ratio =
        t.rounds_checked ? static_cast<double>(t.rounds_survived) / t.rounds_checked : 0.0;
    bool survival_ok = t.rounds_checked >= 10000 && ratio >= 0.45 && ratio <= 0.55;

    char detail[128];
    std::snprintf(detail, sizeof detail, "success rate %.4f, per-round survival %.4f over %llu rounds",
                  s.success_rate, ratio, static_cast<unsigned long long>(t.rounds_checked));
    report(4, "MITM success odds and per-round survival sit in their statistical bands",
           rate_ok && survival_ok, detail);
}

// ---------- 5. sessions-to-recovery experiment ----------

void check_fig4() {
    bool ok = true;
    std::string detail;
    try {
        ExperimentSpec spec;
        spec.trials = 50;
        spec.seed = 500000;
        spec.space_bound = 1000000;
        spec.known_bits = {4, 5, 6, 7};
        spec.max_sessions = 50;
        std::vector<Fig4Row> rows = run_fig4(spec);  // throws on any wrong recovery

        const double oracle[] = {6, 5, 5, 4};  // 1 + ceil(log2(10^6) / n)
        std::ostringstream averages;
        for (size_t i = 0; i < rows.size(); ++i) {
            averages << (i ? ", " : "") << rows[i].avg_sessions;
            if (rows[i].exceeded != 0) ok = false;
            if (std::fabs(rows[i].avg_sessions - oracle[i]) > 1.0) ok = false;
            if (i > 0 && rows[i].avg_sessions > rows[i - 1].avg_sessions) ok = false;
        }
        detail = "averages " + averages.str();

        auto t0 = std::chrono::steady_clock::now();
        spec.space_bound = 10000;
        spec.seed = 510000;
        run_fig4(spec);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs >= 10.0) ok = false;
        char buf[64];
        std::snprintf(buf, sizeof buf, "; reduced-space smoke %.1fs", secs);
        detail += buf;
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    report(5, "sessions-to-recovery averages are monotone and within one session of the model", ok,
           detail);
}

// ---------- 6. comparative resistance ----------

void check_comparative() {
    const uint32_t space = 10000;
    double sm_total = 0, enh_total = 0;
    for (int trial = 0; trial < 50; ++trial) {
        uint64_t seed = 600000 + trial;
        uint32_t pk_value;
        {
            Rng pick(seed);
            pk_value = pick.below(space);
        }
        Rng r1(seed * 2 + 1);
        CampaignResult sm = attack_campaign_sm(Passkey(pk_value), 7, 50, space, r1);
        sm_total += sm.max_sessions_exceeded ? 50 : sm.sessions_used;
        Rng r2(seed * 2 + 1);
        CampaignResult enh = attack_campaign_enhanced(Passkey(pk_value), 50, space, r2);
        enh_total += enh.max_sessions_exceeded ? 50 : enh.sessions_used;
    }
    double sm_mean = sm_total / 50, enh_mean = enh_total / 50;
    bool comparative_ok = enh_mean > sm_mean;

    Rng rng(610000);
    CampaignResult passive = attack_campaign_enhanced(Passkey(rng.below(space)), 10, space, rng,
                                                      /*grant_dhkeys=*/false);
    bool passive_ok = passive.final_candidates == space && !passive.recovered.has_value();
    for (size_t size : passive.candidate_history)
        if (size != space) passive_ok = false;

    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "enhanced mean %.2f vs %.2f sessions; passive capture leaves %zu of %u candidates",
                  enh_mean, sm_mean, passive.final_candidates, space);
    report(6, "the position-masked variant resists the cross-session attack better, and passively leaks nothing",
           comparative_ok && passive_ok, detail);
}

// ---------- 7. CLI determinism ----------

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void check_cli_determinism(const std::string& cli) {
    struct {
        const char* args;
    } cases[] = {
        {"pair --variant sm --passkey 123456 --seed 9"},
        {"costs --variant all --curve p192 --format csv"},
        {"fig4 --trials 3 --space 100 --known-bits 4 7 --seed 3 --format csv"},
        {"attack --variant enhanced --space 1000 --seed 11"},
    };
    bool ok = true;
    std::string detail;
    for (auto& c : cases) {
        std::string out1 = "accept_cli_a.out", out2 = "accept_cli_b.out";
        for (const std::string& out : {out1, out2}) {
            std::string cmd = "\"" + cli + "\" " + c.args + " --out " + out;
            int rc = std::system(cmd.c_str());
            if (rc != 0) {
                ok = false;
                detail = std::string("nonzero exit for: ") + c.args;
            }
        }
        if (slurp(out1) != slurp(out2)) {
            ok = false;
            detail = std::string("outputs differ for: ") + c.args;
        }
        std::remove(out1.c_str());
        std::remove(out2.c_str());
    }
    report(7, "repeated CLI invocations with the same seed produce byte-identical output files", ok,
           detail);
}

// ---------- 8. one-time-pad discipline ----------

void check_otp() {
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 1000 && ok; ++i) {
        Rng rng(800000 + i);
        Passkey pk(rng.passkey());
        SessionOutcome o = run_session(Variant::Enhanced, pk, CurveId::P256, rng);
        if (o.status != SessionStatus::Success || !o.dhkey) {
            ok = false;
            detail = "session failed";
            break;
        }
        Digest256 rp = enhanced_derive_rprime(*o.dhkey, pk);
        // per side: exactly one mask per round 1..10, i.e. each pad block
        // masks exactly one position; unmasking must land in [1, 255]
        int seen[2][11] = {};
        for (const auto& m : o.transcript) {
            if (m.kind != MessageKind::MaskedPosition) continue;
            if (m.round < 1 || m.round > 10 || m.payload.size() != 1) {
                ok = false;
                detail = "malformed masked-position message";
                break;
            }
            seen[m.sender == Role::Initiator ? 0 : 1][m.round] += 1;
            uint8_t nprime = mask_position(m.payload[0], rprime_block(rp, m.round));
            if (nprime < 1) {
                ok = false;
                detail = "unmasked position out of range";
                break;
            }
        }
        for (int side = 0; side < 2 && ok; ++side)
            for (int round = 1; round <= 10; ++round)
                if (seen[side][round] != 1) {
                    ok = false;
                    detail = "pad block reused or skipped";
                }
    }
    report(8, "each pad block masks exactly one position per side and round-trips exactly", ok,
           detail);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <path-to-cli-binary>\n", argv[0]);
        return 64;
    }
    check_costs();
    check_honest();
    check_passive();
    check_mitm_odds();
    check_fig4();
    check_comparative();
    check_cli_determinism(argv[1]);
    check_otp();
    if (g_failures == 0) std::printf("all acceptance checks passed\n");
    return g_failures;
}
