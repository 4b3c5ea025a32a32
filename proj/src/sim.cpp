#include "ssplab/sim.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ssplab {

CostReport account_costs(Variant variant, CurveId curve) {
    CostReport r;
    r.variant = variant;
    r.curve = curve;
    const uint64_t dh_bits = coord_width(curve) * 8;  // 192 or 256
    const uint64_t rounds = rounds_for(variant);

    // commitments + nonce reveals, two per side per round
    uint64_t bits = rounds * 2 * 128 + rounds * 2 * 128;
    uint64_t hashes = rounds * 4;
    uint64_t storage = dh_bits + 20;  // DH secret + passkey
    switch (variant) {
        case Variant::Original:
            break;
        case Variant::SM:
            bits += 2 * 128;  // seed nonce exchange
            hashes += 2;      // one r* derivation per side
            storage += 20;    // r*
            break;
        case Variant::Enhanced:
            bits += rounds * 2 * 8;  // masked position bytes
            hashes += 2;             // one r' derivation per side
            storage += 256;          // r'
            break;
    }
    r.bits_exchanged = bits;
    r.hash_invocations = hashes;
    r.storage_bits = storage;

    // cross-check against an instrumented live session
    Rng rng(0x5e55104c057ull + static_cast<uint64_t>(variant) * 131 +
            static_cast<uint64_t>(curve));
    SessionOutcome o = run_session(variant, Passkey(123456), curve, rng);
    if (o.status != SessionStatus::Success)
        throw CostMismatch("instrumented session failed to complete");
    uint64_t measured_bits = phase2_bits(o.transcript);
    if (measured_bits != bits || o.phase2_hashes != hashes) {
        std::ostringstream msg;
        msg << "analytic/measured cost drift for " << variant_name(variant) << ": bits " << bits
            << " vs " << measured_bits << ", hashes " << hashes << " vs " << o.phase2_hashes;
        throw CostMismatch(msg.str());
    }
    r.phase1_bits = phase1_bits(o.transcript);
    r.phase3_bits = phase3_bits(o.transcript);
    return r;
}

namespace {

uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b) {
    // splitmix64-style stir so nearby trial indices do not correlate
    uint64_t z = seed + 0x9e3779b97f4a7c15ull * (a + 1);
    z ^= (b + 1) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

std::vector<Fig4Row> run_fig4(const ExperimentSpec& spec) {
    if (!spec.reuse_passkey)
        throw std::invalid_argument("fig4 experiment requires a reused passkey");
    std::vector<Fig4Row> rows;
    for (int n : spec.known_bits) {
        Fig4Row row;
        row.known_bits = n;
        row.trials = spec.trials;
        std::vector<int> sessions;
        for (int trial = 0; trial < spec.trials; ++trial) {
            Rng rng(mix_seed(spec.seed, static_cast<uint64_t>(n), static_cast<uint64_t>(trial)));
            Passkey true_pk(rng.below(spec.space_bound));
            CampaignResult c =
                attack_campaign_sm(true_pk, n, spec.max_sessions, spec.space_bound, rng);
            if (c.max_sessions_exceeded) {
                row.exceeded += 1;
            } else {
                sessions.push_back(c.sessions_used);
                if (!c.recovered || *c.recovered != true_pk.value)
                    throw std::runtime_error("campaign recovered a wrong passkey");
            }
        }
        if (!sessions.empty()) {
            double sum = 0;
            for (int s : sessions) sum += s;
            row.avg_sessions = sum / sessions.size();
            double var = 0;
            for (int s : sessions) var += (s - row.avg_sessions) * (s - row.avg_sessions);
            row.stddev_sessions = sessions.size() > 1 ? std::sqrt(var / (sessions.size() - 1)) : 0.0;
        }
        rows.push_back(row);
    }
    return rows;
}

MatrixSummary run_matrix(const MatrixSpec& spec) {
    MatrixSummary sum;
    sum.variant = spec.variant;
    sum.mode = spec.mode;
    sum.trials = spec.trials;

    int successes = 0;
    int equal_keys = 0;
    DeviceIdentity id_a = default_device_a();
    DeviceIdentity id_b = default_device_b();

    for (int trial = 0; trial < spec.trials; ++trial) {
        Rng rng(spec.seed ^ static_cast<uint64_t>(trial));
        Passkey pk(rng.below(spec.space_bound));

        if (spec.mode == MatrixMode::Honest) {
            SessionOutcome o = run_session(spec.variant, pk, spec.curve, rng);
            if (o.status == SessionStatus::Success) {
                ++successes;
                if (o.link_key_a && o.link_key_b && *o.link_key_a == *o.link_key_b) ++equal_keys;
            } else if (o.status == SessionStatus::AbortPhase2) {
                sum.abort_rounds[o.abort_round] += 1;
            } else {
                sum.phase3_aborts += 1;
            }
        } else {
            MitmStrategy strat{GuessSource::Fixed, rng.below(spec.space_bound)};
            MitmResult m = mitm_run(spec.variant, strat, id_a, id_b, pk, spec.curve, rng);
            if (m.success) {
                ++successes;
                ++equal_keys;
            } else {
                sum.abort_rounds[m.rounds_played_a] += 1;
            }
            sum.rounds_survived += static_cast<uint64_t>(m.rounds_survived_a) + m.rounds_survived_b;
            sum.rounds_checked += static_cast<uint64_t>(m.rounds_played_a) + m.rounds_played_b;
        }
    }
    sum.success_rate = spec.trials ? static_cast<double>(successes) / spec.trials : 0.0;
    sum.link_key_agreement = successes ? static_cast<double>(equal_keys) / successes : 0.0;
    return sum;
}

namespace {

void apply_spec_key(ExperimentSpec& spec, const std::string& key, const nlohmann::json& value) {
    if (key == "name") {
        spec.name = value.get<std::string>();
    } else if (key == "variant") {
        auto v = variant_from_name(value.get<std::string>());
        if (!v) throw std::runtime_error("unknown variant in experiment spec");
        spec.variant = *v;
    } else if (key == "trials") {
        spec.trials = value.get<int>();
    } else if (key == "seed") {
        spec.seed = value.get<uint64_t>();
    } else if (key == "passkey_policy") {
        std::string p = value.get<std::string>();
        if (p == "reused") spec.reuse_passkey = true;
        else if (p == "fresh") spec.reuse_passkey = false;
        else throw std::runtime_error("passkey_policy must be reused or fresh");
    } else if (key == "known_bits") {
        spec.known_bits.clear();
        for (const auto& v : value) spec.known_bits.push_back(v.get<int>());
    } else if (key == "space") {
        spec.space_bound = value.get<uint32_t>();
    } else if (key == "max_sessions") {
        spec.max_sessions = value.get<int>();
    } else {
        throw std::runtime_error("unknown experiment spec key: " + key);
    }
}

}  // namespace

ExperimentSpec load_experiment_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();

    ExperimentSpec spec;
    size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        auto j = nlohmann::json::parse(text);
        for (auto it = j.begin(); it != j.end(); ++it) apply_spec_key(spec, it.key(), it.value());
        return spec;
    }

    // key = value lines; '#' starts a comment
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        if (key == "known_bits") {
            nlohmann::json arr = nlohmann::json::array();
            std::istringstream vs(value);
            std::string item;
            while (std::getline(vs, item, ',')) arr.push_back(std::stoi(item));
            apply_spec_key(spec, key, arr);
        } else if (key == "name" || key == "variant" || key == "passkey_policy") {
            apply_spec_key(spec, key, nlohmann::json(value));
        } else {
            apply_spec_key(spec, key, nlohmann::json::parse(value));
        }
    }
    return spec;
}

}  // namespace ssplab
