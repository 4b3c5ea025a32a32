#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssplab/adversary.hpp"
#include "ssplab/sim.hpp"
#include "ssplab/transcript.hpp"

using nlohmann::ordered_json;
using namespace ssplab;

namespace {

struct CommonOpts {
    std::string variant = "original";
    std::string curve = "p256";
    std::optional<uint64_t> seed;
    std::string out;
    std::string format = "json";
};

uint64_t resolve_seed(const CommonOpts& c) {
    if (c.seed) return *c.seed;
    if (const char* env = std::getenv("SSPLAB_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

CurveId parse_curve(const std::string& s) {
    if (s == "p192") return CurveId::P192;
    if (s == "p256") return CurveId::P256;
    throw CLI::ValidationError("--curve", "must be p192 or p256");
}

Variant parse_variant(const std::string& s) {
    auto v = variant_from_name(s);
    if (!v) throw CLI::ValidationError("--variant", "must be original, sm or enhanced");
    return *v;
}

void emit(const CommonOpts& c, const std::string& text) {
    if (c.out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        std::ofstream f(c.out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + c.out);
        f << text;
    }
}

std::string csv_escape(const std::string& s) { return s; }  // fields here never need quoting

void add_common(CLI::App* cmd, CommonOpts& c, bool with_variant = true) {
    if (with_variant) cmd->add_option("--variant", c.variant, "original|sm|enhanced|all");
    cmd->add_option("--curve", c.curve, "p192|p256");
    cmd->add_option("--seed", c.seed, "PRNG seed (fallback: SSPLAB_SEED env var)");
    cmd->add_option("--out", c.out, "write results to a file instead of stdout");
    cmd->add_option("--format", c.format, "json|csv");
}

ordered_json campaign_json(const CampaignResult& r) {
    ordered_json j;
    j["sessions_used"] = r.sessions_used;
    if (r.recovered)
        j["recovered"] = Passkey(*r.recovered).to_string();
    else
        j["recovered"] = nullptr;
    j["candidate_history"] = r.candidate_history;
    j["max_sessions_exceeded"] = r.max_sessions_exceeded;
    j["final_candidates"] = r.final_candidates;
    return j;
}

int cmd_pair(const CommonOpts& c, const std::string& passkey, const std::string& passkey_b,
             const std::string& transcript_path) {
    Variant variant = parse_variant(c.variant);
    CurveId curve = parse_curve(c.curve);
    Passkey pk_a = Passkey::parse(passkey);
    Passkey pk_b = passkey_b.empty() ? pk_a : Passkey::parse(passkey_b);
    Rng rng(resolve_seed(c));

    SessionOutcome o = run_session(variant, pk_a, pk_b, default_device_a(), default_device_b(),
                                   curve, rng);
    if (!transcript_path.empty()) write_transcript_file(o.transcript, transcript_path);

    ordered_json j;
    j["variant"] = variant_name(variant);
    j["curve"] = curve_name(curve);
    j["status"] = session_status_name(o.status);
    if (o.status == SessionStatus::Success) {
        j["link_key_a"] = to_hex(*o.link_key_a);
        j["link_key_b"] = to_hex(*o.link_key_b);
    } else {
        j["abort_reason"] = abort_reason_name(o.abort_reason);
        j["abort_round"] = o.abort_round;
        j["abort_side"] = role_name(o.abort_side);
    }
    j["messages"] = o.transcript.size();
    emit(c, j.dump(2) + "\n");
    return o.status == SessionStatus::Success ? 0 : 1;
}

int cmd_costs(const CommonOpts& c) {
    CurveId curve = parse_curve(c.curve);
    std::vector<Variant> variants;
    if (c.variant == "all")
        variants = {Variant::Original, Variant::SM, Variant::Enhanced};
    else
        variants = {parse_variant(c.variant)};

    std::vector<CostReport> reports;
    for (Variant v : variants) reports.push_back(account_costs(v, curve));

    if (c.format == "csv") {
        std::string text =
            "variant,curve,bits_exchanged,hash_invocations,storage_bits,phase1_bits,phase3_bits\n";
        for (const auto& r : reports) {
            char line[160];
            std::snprintf(line, sizeof line, "%s,%s,%llu,%llu,%llu,%llu,%llu\n",
                          variant_name(r.variant), curve_name(r.curve),
                          (unsigned long long)r.bits_exchanged, (unsigned long long)r.hash_invocations,
                          (unsigned long long)r.storage_bits, (unsigned long long)r.phase1_bits,
                          (unsigned long long)r.phase3_bits);
            text += line;
        }
        emit(c, text);
    } else {
        ordered_json arr = ordered_json::array();
        for (const auto& r : reports) {
            ordered_json j;
            j["variant"] = variant_name(r.variant);
            j["curve"] = curve_name(r.curve);
            j["bits_exchanged"] = r.bits_exchanged;
            j["hash_invocations"] = r.hash_invocations;
            j["storage_bits"] = r.storage_bits;
            j["phase1_bits"] = r.phase1_bits;
            j["phase3_bits"] = r.phase3_bits;
            arr.push_back(j);
        }
        emit(c, arr.dump(2) + "\n");
    }
    return 0;
}

int cmd_attack(const CommonOpts& c, const std::string& passkey, const std::string& transcript_path,
               const std::vector<int>& known_bits, int max_sessions, uint32_t space, bool passive) {
    Variant variant = parse_variant(c.variant);
    uint64_t seed = resolve_seed(c);
    Rng rng(seed);

    if (variant == Variant::Original) {
        CapturedSession cap;
        cap.variant = Variant::Original;
        std::optional<Passkey> truth;
        if (!transcript_path.empty()) {
            cap.transcript = read_transcript_file(transcript_path);
        } else {
            Passkey pk = passkey.empty() ? Passkey(rng.passkey()) : Passkey::parse(passkey);
            truth = pk;
            SessionOutcome o = run_session(Variant::Original, pk, parse_curve(c.curve), rng);
            cap.transcript = o.transcript;
        }
        Passkey recovered = passive_recover_original(cap);
        ordered_json j;
        j["attack"] = "passive_recover";
        j["recovered"] = recovered.to_string();
        if (truth) j["matches_true_passkey"] = recovered.value == truth->value;
        emit(c, j.dump(2) + "\n");
        return 0;
    }

    Passkey pk = passkey.empty() ? Passkey(rng.below(space)) : Passkey::parse(passkey);
    CampaignResult r;
    if (variant == Variant::SM) {
        int n = known_bits.empty() ? 7 : known_bits.front();
        r = attack_campaign_sm(pk, n, max_sessions, space, rng);
    } else {
        r = attack_campaign_enhanced(pk, max_sessions, space, rng, !passive);
    }
    ordered_json j = campaign_json(r);
    j["true_passkey"] = pk.to_string();
    emit(c, j.dump(2) + "\n");
    return 0;
}

int cmd_fig4(const CommonOpts& c, int trials, uint32_t space, const std::vector<int>& known_bits,
             int max_sessions, const std::string& config) {
    ExperimentSpec spec;
    if (!config.empty()) spec = load_experiment_spec(config);
    spec.seed = resolve_seed(c);
    if (trials > 0) spec.trials = trials;
    if (space > 0) spec.space_bound = space;
    if (!known_bits.empty()) spec.known_bits = known_bits;
    if (max_sessions > 0) spec.max_sessions = max_sessions;

    auto rows = run_fig4(spec);
    if (c.format == "json") {
        ordered_json arr = ordered_json::array();
        for (const auto& r : rows) {
            ordered_json j;
            j["known_bits"] = r.known_bits;
            j["avg_sessions"] = r.avg_sessions;
            j["stddev_sessions"] = r.stddev_sessions;
            j["exceeded"] = r.exceeded;
            j["trials"] = r.trials;
            arr.push_back(j);
        }
        emit(c, arr.dump(2) + "\n");
    } else {
        std::string text = "known_bits,avg_sessions,stddev_sessions,exceeded,trials\n";
        for (const auto& r : rows) {
            char line[128];
            std::snprintf(line, sizeof line, "%d,%.4f,%.4f,%d,%d\n", r.known_bits, r.avg_sessions,
                          r.stddev_sessions, r.exceeded, r.trials);
            text += line;
        }
        emit(c, text);
    }
    return 0;
}

int cmd_matrix(const CommonOpts& c, int trials, uint32_t space, const std::string& mode) {
    MatrixSpec spec;
    spec.variant = parse_variant(c.variant);
    spec.curve = parse_curve(c.curve);
    spec.seed = resolve_seed(c);
    spec.trials = trials;
    spec.space_bound = space;
    if (mode == "honest")
        spec.mode = MatrixMode::Honest;
    else if (mode == "mitm")
        spec.mode = MatrixMode::MitmFixedGuess;
    else
        throw CLI::ValidationError("--mode", "must be honest or mitm");

    MatrixSummary s = run_matrix(spec);
    if (c.format == "csv") {
        std::string text = "variant,mode,trials,success_rate,link_key_agreement,phase3_aborts\n";
        char line[160];
        std::snprintf(line, sizeof line, "%s,%s,%d,%.6f,%.6f,%d\n", variant_name(s.variant), mode.c_str(),
                      s.trials, s.success_rate, s.link_key_agreement, s.phase3_aborts);
        text += line;
        emit(c, text);
    } else {
        ordered_json j;
        j["variant"] = variant_name(s.variant);
        j["mode"] = mode;
        j["trials"] = s.trials;
        j["success_rate"] = s.success_rate;
        j["link_key_agreement"] = s.link_key_agreement;
        ordered_json aborts = ordered_json::object();
        for (const auto& [round, count] : s.abort_rounds) aborts[std::to_string(round)] = count;
        j["abort_rounds"] = aborts;
        j["phase3_aborts"] = s.phase3_aborts;
        if (s.rounds_checked) {
            j["rounds_survived"] = s.rounds_survived;
            j["rounds_checked"] = s.rounds_checked;
            j["round_survival_rate"] =
                static_cast<double>(s.rounds_survived) / static_cast<double>(s.rounds_checked);
        }
        emit(c, j.dump(2) + "\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Passkey-entry pairing laboratory: sessions, attacks, costs"};
    app.require_subcommand(1);

    CommonOpts pair_opts, costs_opts, attack_opts, fig4_opts, matrix_opts;
    std::string passkey, passkey_b, transcript_path, attack_passkey, attack_transcript;
    std::vector<int> attack_known_bits, fig4_known_bits;
    int attack_max_sessions = 50, fig4_trials = 0, fig4_max_sessions = 0, matrix_trials = 1000;
    uint32_t attack_space = 1000000, fig4_space = 0, matrix_space = 1000000;
    bool attack_passive = false;
    std::string fig4_config, matrix_mode = "honest";

    auto* pair = app.add_subcommand("pair", "run one pairing session");
    add_common(pair, pair_opts);
    pair->add_option("--passkey", passkey, "6-digit passkey for both sides")->required();
    pair->add_option("--passkey-b", passkey_b, "responder passkey, if different");
    pair->add_option("--transcript", transcript_path, "write the session transcript (JSON lines)");

    auto* costs = app.add_subcommand("costs", "per-variant cost accounting");
    add_common(costs, costs_opts);

    auto* attack = app.add_subcommand("attack", "run an attack against the chosen variant");
    add_common(attack, attack_opts);
    attack->add_option("--passkey", attack_passkey, "true passkey (default: drawn from seed)");
    attack->add_option("--transcript", attack_transcript,
                       "read a captured transcript instead of simulating (original only)");
    attack->add_option("--known-bits", attack_known_bits, "granted r* bits per session (sm)");
    attack->add_option("--max-sessions", attack_max_sessions, "campaign session cap");
    attack->add_option("--space", attack_space, "passkey space bound");
    attack->add_flag("--passive", attack_passive, "withhold DH keys (enhanced only)");

    auto* fig4 = app.add_subcommand("fig4", "brute-force sessions-to-recovery experiment");
    add_common(fig4, fig4_opts, false);
    fig4->add_option("--trials", fig4_trials, "campaigns per known-bits value");
    fig4->add_option("--space", fig4_space, "passkey space bound");
    fig4->add_option("--known-bits", fig4_known_bits, "list of granted bit counts");
    fig4->add_option("--max-sessions", fig4_max_sessions, "campaign session cap");
    fig4->add_option("--config", fig4_config, "experiment spec file (key=value or JSON)");

    auto* matrix = app.add_subcommand("matrix", "batch session statistics");
    add_common(matrix, matrix_opts);
    matrix->add_option("--trials", matrix_trials, "number of sessions");
    matrix->add_option("--space", matrix_space, "passkey space bound");
    matrix->add_option("--mode", matrix_mode, "honest|mitm");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (pair->parsed()) return cmd_pair(pair_opts, passkey, passkey_b, transcript_path);
        if (costs->parsed()) return cmd_costs(costs_opts);
        if (attack->parsed())
            return cmd_attack(attack_opts, attack_passkey, attack_transcript, attack_known_bits,
                              attack_max_sessions, attack_space, attack_passive);
        if (fig4->parsed())
            return cmd_fig4(fig4_opts, fig4_trials, fig4_space, fig4_known_bits, fig4_max_sessions,
                            fig4_config);
        if (matrix->parsed()) return cmd_matrix(matrix_opts, matrix_trials, matrix_space, matrix_mode);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
