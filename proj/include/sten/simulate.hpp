#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sten/protocol.hpp"

namespace sten {

// Adversary families for audit simulation. Every model is deterministic
// given its seed, so runs replay exactly.
struct ServerModel {
    enum class Kind : std::uint8_t { Honest, Amnesiac, Partial, Collude, Silent };

    Kind kind = Kind::Honest;
    std::uint64_t seed = 0;

    // Amnesiac: stores nothing. Answers are either a frozen constant or a
    // fresh pseudorandom field value per (challenge, trial).
    std::optional<std::uint64_t> fixed_answer;

    // Partial: keeps the leading `fraction` of its shard (symbols for the
    // polynomial family, bytes for the residue family) and answers honestly
    // over that prefix with a frozen seeded guess for the discarded tail.
    double fraction = 1.0;

    // Collude: members pool their shards into one store of at most
    // budget_bits bits (leading prefix kept, tail replaced by frozen seeded
    // guesses) and each member answers honestly over the reconstruction,
    // plus an optional additive offset (for probing the sum check).
    std::vector<std::uint16_t> members;
    std::uint64_t budget_bits = 0;
    std::vector<std::uint64_t> offsets;

    // Silent: never answers when silence_prob >= 1, otherwise drops each
    // answer with that probability (seeded per challenge/trial) and answers
    // honestly the rest of the time.
    double silence_prob = 1.0;

    static ServerModel honest();
    static ServerModel amnesiac(std::uint64_t seed);
    static ServerModel amnesiac_constant(std::uint64_t value);
    static ServerModel partial(double fraction, std::uint64_t seed);
    static ServerModel silent();
    static ServerModel silent_with_prob(double p, std::uint64_t seed);
    static ServerModel collude(std::vector<std::uint16_t> members,
                               std::uint64_t budget_bits, std::uint64_t seed,
                               std::vector<std::uint64_t> offsets = {});
};

// (server, beta, trial) -> answer or silence. trial feeds per-trial
// randomness (amnesiac answers, probabilistic silence); exhaustive sweeps
// use trial = 0.
using AnswerFn =
    std::function<ServerAnswer(std::uint16_t server, std::uint32_t beta,
                               std::uint64_t trial)>;

// Materializes the models against a concrete message. Shared coalition
// state is reconstructed here once.
AnswerFn build_answerers(const Message& x, const CodeParams& code,
                         Scheme scheme, const std::vector<ServerModel>& models);

struct PassProbability {
    std::uint64_t passes = 0;
    std::uint64_t n = 0;
    double value() const {
        return n ? static_cast<double>(passes) / static_cast<double>(n) : 0.0;
    }
};

// Exact acceptance probability by sweeping every challenge once (trial = 0).
// Guarded to n <= 2^20.
PassProbability exhaustive_pass_probability(const Message& x, Scheme scheme,
                                            const std::vector<ServerModel>& models,
                                            const CodeParams& code,
                                            std::uint16_t r, std::uint16_t e);
// Same sweep against an arbitrary answer function (used by tests that model
// responders outside the ServerModel families).
PassProbability exhaustive_pass_probability_fn(const Message& x, Scheme scheme,
                                               std::uint16_t s,
                                               const AnswerFn& answers,
                                               const CodeParams& code,
                                               std::uint16_t r, std::uint16_t e);

struct TrialReport {
    std::uint64_t trials = 0;
    std::uint64_t passes = 0;
    double pass_rate = 0;
    double std_error = 0; // sqrt(p(1-p)/trials)
    std::map<std::string, std::uint64_t> verdicts;
    std::vector<std::uint64_t> server_flag_counts; // times server i was implicated
};

// Monte Carlo audits: every trial draws a fresh challenge from the seeded
// generator and runs the scheme's verification. Deterministic given seed.
TrialReport run_audit_trials(const Message& x, Scheme scheme,
                             const std::vector<ServerModel>& models,
                             const CodeParams& code, std::uint16_t r,
                             std::uint16_t e, std::uint64_t trials,
                             std::uint64_t seed);

struct SweepRow {
    double fraction = 0;
    std::uint64_t stored_bits = 0;
    PassProbability prob;
};

// Storage/acceptance trade-off: one Partial server family per fraction,
// exact probability per row. stored_bits counts kept symbols at
// ceil(log2 q) bits each (bytes * 8 for the residue family).
std::vector<SweepRow> storage_tradeoff_sweep(const Message& x, Scheme scheme,
                                             const std::vector<double>& fractions,
                                             const CodeParams& code,
                                             std::uint64_t seed);

// Reports: line-oriented key=value, plus a CSV with the fixed column set
// scheme,q,k,n,s,r,e,model,stored_bits,pass_prob,trials.
void write_kv(std::ostream& os, const std::string& key, const std::string& value);
void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, Scheme scheme, const CodeParams& code,
                   std::uint16_t s, std::uint16_t r, std::uint16_t e,
                   const std::string& model, std::uint64_t stored_bits,
                   double pass_prob, std::uint64_t trials);

const char* scheme_name(Scheme scheme);
const char* verdict_name(AuditVerdict::Kind kind);

} // namespace sten
