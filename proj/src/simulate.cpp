#include "sten/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "sten/rng.hpp"

namespace sten {

ServerModel ServerModel::honest() { return {}; }

ServerModel ServerModel::amnesiac(std::uint64_t seed) {
    ServerModel m;
    m.kind = Kind::Amnesiac;
    m.seed = seed;
    return m;
}

ServerModel ServerModel::amnesiac_constant(std::uint64_t value) {
    ServerModel m;
    m.kind = Kind::Amnesiac;
    m.fixed_answer = value;
    return m;
}

ServerModel ServerModel::partial(double fraction, std::uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0)
        throw std::invalid_argument("partial model: fraction outside [0,1]");
    ServerModel m;
    m.kind = Kind::Partial;
    m.fraction = fraction;
    m.seed = seed;
    return m;
}

ServerModel ServerModel::silent() {
    ServerModel m;
    m.kind = Kind::Silent;
    return m;
}

ServerModel ServerModel::silent_with_prob(double p, std::uint64_t seed) {
    if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("silent model: probability outside [0,1]");
    ServerModel m;
    m.kind = Kind::Silent;
    m.silence_prob = p;
    m.seed = seed;
    return m;
}

ServerModel ServerModel::collude(std::vector<std::uint16_t> members,
                                 std::uint64_t budget_bits, std::uint64_t seed,
                                 std::vector<std::uint64_t> offsets) {
    if (members.empty())
        throw std::invalid_argument("collude model: empty member set");
    if (!offsets.empty() && offsets.size() != members.size())
        throw std::invalid_argument("collude model: one offset per member");
    ServerModel m;
    m.kind = Kind::Collude;
    m.members = std::move(members);
    m.budget_bits = budget_bits;
    m.seed = seed;
    m.offsets = std::move(offsets);
    return m;
}

namespace {

unsigned stored_bits_per_symbol(std::uint64_t q) {
    return std::bit_width(q - 1); // ceil(log2 q)
}

// Keeps the first `kept` entries of shard `server`, replaces the rest with
// frozen seeded guesses below `bound`.
std::vector<std::uint64_t> degraded_symbols(std::span<const std::uint64_t> shard,
                                            std::size_t kept,
                                            std::uint64_t bound,
                                            std::uint64_t seed,
                                            std::uint16_t server) {
    std::vector<std::uint64_t> out(shard.begin(), shard.end());
    for (std::size_t j = kept; j < out.size(); ++j) {
        SplitMix64 g(mix_seed({seed, server, j, 0x67cc5533}));
        out[j] = g.uniform_below(bound);
    }
    return out;
}

std::vector<std::uint8_t> degraded_bytes(std::span<const std::uint8_t> shard,
                                         std::size_t kept, std::uint64_t seed,
                                         std::uint16_t server) {
    std::vector<std::uint8_t> out(shard.begin(), shard.end());
    for (std::size_t j = kept; j < out.size(); ++j) {
        SplitMix64 g(mix_seed({seed, server, j, 0x67cc5533}));
        out[j] = static_cast<std::uint8_t>(g.uniform_below(256));
    }
    return out;
}

std::size_t kept_count(double fraction, std::size_t len) {
    double k = fraction * static_cast<double>(len);
    std::size_t kept = static_cast<std::size_t>(std::floor(k + 1e-9));
    return kept > len ? len : kept;
}

// A message whose shard `server` was substituted; reused by Partial and
// Collude to answer via the honest code path.
Message substituted(const Message& x, std::uint16_t server,
                    std::vector<std::uint64_t> symbols,
                    std::vector<std::uint8_t> bytes) {
    Message m = x;
    if (x.scheme == CodeScheme::RS) {
        std::copy(symbols.begin(), symbols.end(),
                  m.symbols.begin() +
                      static_cast<std::size_t>(server) * x.shard_len());
    } else {
        std::copy(bytes.begin(), bytes.end(),
                  m.bytes.begin() +
                      static_cast<std::size_t>(server) * x.shard_byte_len());
    }
    return m;
}

} // namespace

AnswerFn build_answerers(const Message& x, const CodeParams& code,
                         Scheme scheme, const std::vector<ServerModel>& models) {
    if (models.size() != x.s)
        throw std::invalid_argument("build_answerers: one model per server");

    // Precompute every degraded view once; answering is then a pure hash.
    struct Prepared {
        ServerModel model;
        std::optional<Message> view; // substituted message for honest-ish kinds
        std::uint64_t offset = 0;    // collude additive offset
    };
    auto prepared = std::make_shared<std::vector<Prepared>>();
    prepared->resize(models.size());

    for (std::uint16_t i = 0; i < models.size(); ++i) {
        const ServerModel& m = models[i];
        (*prepared)[i].model = m;
        switch (m.kind) {
        case ServerModel::Kind::Honest:
        case ServerModel::Kind::Amnesiac:
        case ServerModel::Kind::Silent:
            break;
        case ServerModel::Kind::Partial: {
            if (x.scheme == CodeScheme::RS) {
                auto shard = x.shard(i);
                std::size_t kept = kept_count(m.fraction, shard.size());
                (*prepared)[i].view = substituted(
                    x, i, degraded_symbols(shard, kept, code.q, m.seed, i), {});
            } else {
                std::size_t len = x.shard_byte_len();
                std::span<const std::uint8_t> shard{
                    x.bytes.data() + static_cast<std::size_t>(i) * len, len};
                std::size_t kept = kept_count(m.fraction, len);
                (*prepared)[i].view = substituted(
                    x, i, {}, degraded_bytes(shard, kept, m.seed, i));
            }
            break;
        }
        case ServerModel::Kind::Collude:
            break; // handled below, needs the full member set
        }
    }

    // Coalitions: pool the members' shards into one prefix-kept store and
    // hand every member its reconstructed slice.
    for (std::uint16_t i = 0; i < models.size(); ++i) {
        const ServerModel& m = models[i];
        if (m.kind != ServerModel::Kind::Collude) continue;
        if ((*prepared)[i].view) continue; // member already filled in
        for (std::uint16_t member : m.members) {
            if (member >= models.size() ||
                models[member].kind != ServerModel::Kind::Collude)
                throw std::invalid_argument(
                    "collude model: every coalition member needs the collude model");
        }
        if (x.scheme == CodeScheme::RS) {
            std::vector<std::uint64_t> pooled;
            for (std::uint16_t member : m.members) {
                auto shard = x.shard(member);
                pooled.insert(pooled.end(), shard.begin(), shard.end());
            }
            unsigned per = stored_bits_per_symbol(code.q);
            std::size_t kept = std::min<std::uint64_t>(
                pooled.size(), m.budget_bits / per);
            pooled = degraded_symbols(pooled, kept, code.q, m.seed, 0xffff);
            std::size_t len = x.shard_len();
            for (std::size_t mi = 0; mi < m.members.size(); ++mi) {
                std::uint16_t member = m.members[mi];
                std::vector<std::uint64_t> slice(
                    pooled.begin() + mi * len, pooled.begin() + (mi + 1) * len);
                (*prepared)[member].view = substituted(x, member, slice, {});
                (*prepared)[member].offset =
                    m.offsets.empty() ? 0 : m.offsets[mi] % code.q;
            }
        } else {
            std::vector<std::uint8_t> pooled;
            std::size_t len = x.shard_byte_len();
            for (std::uint16_t member : m.members) {
                pooled.insert(pooled.end(),
                              x.bytes.begin() + static_cast<std::size_t>(member) * len,
                              x.bytes.begin() + static_cast<std::size_t>(member + 1) * len);
            }
            std::size_t kept = std::min<std::uint64_t>(pooled.size(),
                                                       m.budget_bits / 8);
            pooled = degraded_bytes(pooled, kept, m.seed, 0xffff);
            for (std::size_t mi = 0; mi < m.members.size(); ++mi) {
                std::uint16_t member = m.members[mi];
                std::vector<std::uint8_t> slice(
                    pooled.begin() + mi * len, pooled.begin() + (mi + 1) * len);
                (*prepared)[member].view = substituted(x, member, {}, slice);
            }
        }
    }

    Message base = x;
    return [prepared, base, code, scheme](std::uint16_t server,
                                          std::uint32_t beta,
                                          std::uint64_t trial) -> ServerAnswer {
        const Prepared& p = prepared->at(server);
        const ServerModel& m = p.model;
        switch (m.kind) {
        case ServerModel::Kind::Honest:
            return honest_shard_response(base, server, beta, code, scheme);
        case ServerModel::Kind::Amnesiac: {
            if (m.fixed_answer) return *m.fixed_answer;
            SplitMix64 g(mix_seed({m.seed, server, beta, trial}));
            return g.uniform_below(code.alphabet_at(beta));
        }
        case ServerModel::Kind::Silent: {
            if (m.silence_prob >= 1.0) return std::nullopt;
            SplitMix64 g(mix_seed({m.seed, server, beta, trial, 0x51}));
            double coin = static_cast<double>(g.next() >> 11) * 0x1.0p-53;
            if (coin < m.silence_prob) return std::nullopt;
            return honest_shard_response(base, server, beta, code, scheme);
        }
        case ServerModel::Kind::Partial:
            return honest_shard_response(*p.view, server, beta, code, scheme);
        case ServerModel::Kind::Collude: {
            std::uint64_t a =
                honest_shard_response(*p.view, server, beta, code, scheme);
            if (p.offset) {
                PrimeField f(code.alphabet_at(beta));
                a = f.add(a % f.modulus(), p.offset % f.modulus());
            }
            return a;
        }
        }
        return std::nullopt;
    };
}

namespace {

constexpr std::uint32_t kExhaustiveLimit = 1u << 20;

AuditToken token_for_beta(const Message& x, const CodeParams& code,
                          Scheme scheme, std::uint16_t r, std::uint16_t e,
                          std::uint32_t beta) {
    AuditToken t;
    t.scheme = scheme;
    t.code = code;
    t.s = x.s;
    t.r = r;
    t.e = e;
    t.original_byte_length = x.original_byte_length;
    t.records.push_back({beta, false, payload_for_beta(x, code, scheme, r, e, beta)});
    return t;
}

AuditVerdict run_one(const AuditToken& t, const AnswerFn& answers,
                     std::uint16_t s, std::uint32_t beta, std::uint64_t trial) {
    std::vector<ServerAnswer> a(s);
    for (std::uint16_t i = 0; i < s; ++i) a[i] = answers(i, beta, trial);
    try {
        return verify(t, 0, a);
    } catch (const std::runtime_error&) {
        // Linear with a missing response: the scheme cannot evaluate, which
        // the harness counts as a failed audit.
        AuditVerdict v;
        v.kind = AuditVerdict::Kind::Fail;
        return v;
    }
}

} // namespace

PassProbability exhaustive_pass_probability_fn(const Message& x, Scheme scheme,
                                               std::uint16_t s,
                                               const AnswerFn& answers,
                                               const CodeParams& code,
                                               std::uint16_t r, std::uint16_t e) {
    if (code.n > kExhaustiveLimit)
        throw std::invalid_argument("exhaustive sweep: n exceeds 2^20");
    if (s != x.s)
        throw std::invalid_argument("exhaustive sweep: s mismatch");
    PassProbability p;
    p.n = code.n;
    for (std::uint32_t beta = 0; beta < code.n; ++beta) {
        AuditToken t = token_for_beta(x, code, scheme, r, e, beta);
        if (run_one(t, answers, s, beta, 0).pass()) ++p.passes;
    }
    return p;
}

PassProbability exhaustive_pass_probability(const Message& x, Scheme scheme,
                                            const std::vector<ServerModel>& models,
                                            const CodeParams& code,
                                            std::uint16_t r, std::uint16_t e) {
    return exhaustive_pass_probability_fn(x, scheme, x.s,
                                          build_answerers(x, code, scheme, models),
                                          code, r, e);
}

TrialReport run_audit_trials(const Message& x, Scheme scheme,
                             const std::vector<ServerModel>& models,
                             const CodeParams& code, std::uint16_t r,
                             std::uint16_t e, std::uint64_t trials,
                             std::uint64_t seed) {
    if (trials == 0)
        throw std::invalid_argument("run_audit_trials: zero trials");
    AnswerFn answers = build_answerers(x, code, scheme, models);
    TrialReport rep;
    rep.trials = trials;
    rep.server_flag_counts.assign(x.s, 0);
    SplitMix64 rng(seed);
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::uint32_t beta = static_cast<std::uint32_t>(rng.uniform_below(code.n));
        AuditToken tok = token_for_beta(x, code, scheme, r, e, beta);
        AuditVerdict v = run_one(tok, answers, x.s, beta, t);
        ++rep.verdicts[verdict_name(v.kind)];
        if (v.pass()) ++rep.passes;
        for (std::uint16_t i : v.cheaters)
            if (i < x.s) ++rep.server_flag_counts[i];
    }
    rep.pass_rate = static_cast<double>(rep.passes) / static_cast<double>(trials);
    rep.std_error = std::sqrt(rep.pass_rate * (1.0 - rep.pass_rate) /
                              static_cast<double>(trials));
    return rep;
}

std::vector<SweepRow> storage_tradeoff_sweep(const Message& x, Scheme scheme,
                                             const std::vector<double>& fractions,
                                             const CodeParams& code,
                                             std::uint64_t seed) {
    std::vector<SweepRow> rows;
    rows.reserve(fractions.size());
    for (double f : fractions) {
        std::vector<ServerModel> models;
        std::uint64_t stored = 0;
        for (std::uint16_t i = 0; i < x.s; ++i) {
            models.push_back(ServerModel::partial(f, seed));
            if (x.scheme == CodeScheme::RS) {
                std::size_t kept = kept_count(f, x.shard_len());
                stored += kept * stored_bits_per_symbol(code.q);
            } else {
                stored += 8 * kept_count(f, x.shard_byte_len());
            }
        }
        SweepRow row;
        row.fraction = f;
        row.stored_bits = stored;
        row.prob = exhaustive_pass_probability(x, scheme, models, code, 0, 0);
        rows.push_back(row);
    }
    return rows;
}

void write_kv(std::ostream& os, const std::string& key, const std::string& value) {
    os << key << "=" << value << "\n";
}

void write_csv_header(std::ostream& os) {
    os << "scheme,q,k,n,s,r,e,model,stored_bits,pass_prob,trials\n";
}

void write_csv_row(std::ostream& os, Scheme scheme, const CodeParams& code,
                   std::uint16_t s, std::uint16_t r, std::uint16_t e,
                   const std::string& model, std::uint64_t stored_bits,
                   double pass_prob, std::uint64_t trials) {
    std::uint64_t q = code.scheme == CodeScheme::RS ? code.q : code.primes.back();
    os << scheme_name(scheme) << ',' << q << ',' << code.k << ',' << code.n
       << ',' << s << ',' << r << ',' << e << ',' << model << ','
       << stored_bits << ',' << pass_prob << ',' << trials << "\n";
}

const char* scheme_name(Scheme scheme) {
    switch (scheme) {
    case Scheme::Single: return "single";
    case Scheme::Trivial: return "trivial";
    case Scheme::Linear: return "linear";
    case Scheme::RsParity: return "rs-parity";
    }
    return "unknown";
}

const char* verdict_name(AuditVerdict::Kind kind) {
    switch (kind) {
    case AuditVerdict::Kind::Pass: return "pass";
    case AuditVerdict::Kind::Fail: return "fail";
    case AuditVerdict::Kind::DecodingFailure: return "decoding_failure";
    }
    return "unknown";
}

} // namespace sten
