#ifndef SSPLAB_SIM_HPP
#define SSPLAB_SIM_HPP

#include <map>
#include <string>
#include <vector>

#include "ssplab/adversary.hpp"
#include "ssplab/protocol.hpp"

namespace ssplab {

struct CostReport {
    Variant variant;
    CurveId curve;
    uint64_t bits_exchanged = 0;    // phase-2 payload bits (headline number)
    uint64_t hash_invocations = 0;  // phase-2 f-function calls
    uint64_t storage_bits = 0;      // per device
    // extended columns, outside the headline accounting
    uint64_t phase1_bits = 0;
    uint64_t phase3_bits = 0;
};

struct CostMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Analytic cost model cross-checked against an instrumented live session;
// throws CostMismatch if the two disagree.
CostReport account_costs(Variant variant, CurveId curve);

struct ExperimentSpec {
    std::string name = "experiment";
    Variant variant = Variant::SM;
    int trials = 50;
    uint64_t seed = 0;
    bool reuse_passkey = true;  // passkey kept across sessions of a campaign
    std::vector<int> known_bits = {4, 5, 6, 7};
    uint32_t space_bound = 1000000;
    int max_sessions = 50;
};

// key = value text or a JSON object; unknown keys are rejected.
ExperimentSpec load_experiment_spec(const std::string& path);

struct Fig4Row {
    int known_bits = 0;
    double avg_sessions = 0.0;
    double stddev_sessions = 0.0;
    int exceeded = 0;  // campaigns that hit max_sessions
    int trials = 0;
};

std::vector<Fig4Row> run_fig4(const ExperimentSpec& spec);

enum class MatrixMode { Honest, MitmFixedGuess };

struct MatrixSpec {
    Variant variant = Variant::Original;
    MatrixMode mode = MatrixMode::Honest;
    int trials = 1000;
    uint64_t seed = 0;
    uint32_t space_bound = 1000000;
    CurveId curve = CurveId::P256;
};

struct MatrixSummary {
    Variant variant;
    MatrixMode mode;
    int trials = 0;
    double success_rate = 0.0;
    std::map<int, int> abort_rounds;  // phase-2 abort round -> count
    int phase3_aborts = 0;
    double link_key_agreement = 0.0;  // fraction of successes with equal keys
    // MITM mode only: commitment checks the attacker survived / faced
    uint64_t rounds_survived = 0, rounds_checked = 0;
};

MatrixSummary run_matrix(const MatrixSpec& spec);

}  // namespace ssplab

#endif
