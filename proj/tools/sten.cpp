// sten: storage-enforcement audit toolkit CLI.
//
// Subcommands: params, store, audit, simulate, extract, bound, enforce-demo,
// serve. Exit codes: 0 ok/pass, 1 audit fail, 2 usage, 3 token bundle
// exhausted, 4 endpoint unreachable where the scheme cannot treat it as
// NO_RESPONSE, 5 I/O or format error.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sten/codes.hpp"
#include "sten/field.hpp"
#include "sten/net.hpp"
#include "sten/protocol.hpp"
#include "sten/rng.hpp"
#include "sten/rsdecode.hpp"
#include "sten/security.hpp"
#include "sten/simulate.hpp"
#include "sten/wire.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitExhausted = 3;
constexpr int kExitUnreachable = 4;
constexpr int kExitIo = 5;

struct ExitWith {
    int code;
    std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) {
    throw ExitWith{code, message};
}

// --- small file / data helpers ---

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(kExitIo, "cannot open " + path);
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (in.bad()) fail(kExitIo, "read error on " + path);
    return data;
}

void write_file_atomic(const std::string& path,
                       std::span<const std::uint8_t> data) {
    auto tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(kExitIo, "cannot write " + tmp);
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size()));
        if (!out) fail(kExitIo, "write error on " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(kExitIo, "cannot replace " + path + ": " + ec.message());
}

std::vector<std::uint8_t> random_bytes(std::size_t len, std::uint64_t seed) {
    sten::SplitMix64 rng(sten::mix_seed({seed, 0x62797465u}));
    std::vector<std::uint8_t> out(len);
    for (std::size_t i = 0; i < len; i += 8) {
        std::uint64_t w = rng.next();
        for (std::size_t j = 0; j < 8 && i + j < len; ++j)
            out[i + j] = static_cast<std::uint8_t>(w >> (8 * j));
    }
    return out;
}

// --- enum parsing ---

sten::Scheme parse_scheme(const std::string& name) {
    if (name == "single") return sten::Scheme::Single;
    if (name == "trivial") return sten::Scheme::Trivial;
    if (name == "linear") return sten::Scheme::Linear;
    if (name == "rs-parity") return sten::Scheme::RsParity;
    fail(kExitUsage, "unknown scheme '" + name +
                         "' (expected single|trivial|linear|rs-parity)");
}

sten::CodeScheme parse_code(const std::string& name) {
    if (name == "rs") return sten::CodeScheme::RS;
    if (name == "crt") return sten::CodeScheme::CRT;
    fail(kExitUsage, "unknown code family '" + name + "' (expected rs|crt)");
}

std::vector<std::uint16_t> parse_u16_list(const std::string& text) {
    std::vector<std::uint16_t> out;
    std::stringstream ss(text);
    std::string piece;
    while (std::getline(ss, piece, ',')) {
        if (piece.empty()) continue;
        out.push_back(static_cast<std::uint16_t>(std::stoul(piece)));
    }
    return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string piece;
    while (std::getline(ss, piece, ',')) {
        if (piece.empty()) continue;
        out.push_back(std::stoull(piece));
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string piece;
    while (std::getline(ss, piece, ',')) {
        if (piece.empty()) continue;
        out.push_back(std::stod(piece));
    }
    return out;
}

// --- output ---

struct Printer {
    bool porcelain = false;

    void kv(const std::string& key, const std::string& value) const {
        if (porcelain) {
            sten::write_kv(std::cout, key, value);
        } else {
            std::cout << "  " << key << ": " << value << "\n";
        }
    }
    void kv(const std::string& key, std::uint64_t value) const {
        kv(key, std::to_string(value));
    }
    void kv(const std::string& key, double value) const {
        std::ostringstream os;
        os.precision(12);
        os << value;
        kv(key, os.str());
    }
    void head(const std::string& text) const {
        if (!porcelain) std::cout << text << "\n";
    }
};

std::string join_u16(std::span<const std::uint16_t> xs) {
    std::string out;
    for (auto v : xs) {
        if (!out.empty()) out += ",";
        out += std::to_string(v);
    }
    return out;
}

void print_params(const Printer& pr, const sten::CodeParams& p) {
    pr.kv("code", p.scheme == sten::CodeScheme::RS ? "rs" : "crt");
    pr.kv("k", static_cast<std::uint64_t>(p.k));
    pr.kv("n", static_cast<std::uint64_t>(p.n));
    if (p.scheme == sten::CodeScheme::RS) {
        pr.kv("q", p.q);
        pr.kv("bits_per_symbol",
              static_cast<std::uint64_t>(std::bit_width(p.q) - 1));
    } else {
        pr.kv("prime_count", static_cast<std::uint64_t>(p.n));
        pr.kv("largest_prime", p.primes.back());
    }
    pr.kv("d", static_cast<std::uint64_t>(p.d));
    pr.kv("delta", p.delta);
    pr.kv("rho", p.rho);
    pr.kv("radius", static_cast<std::uint64_t>(sten::decoding_radius(p.rho, p.n)));
    pr.kv("list_bound", p.list_bound);
    pr.kv("epsilon", p.epsilon);
}

// --- parameter construction shared by store / bound / enforce-demo ---

struct DataPlan {
    sten::Message x;
    sten::CodeParams code; // the code challenges are drawn from
};

sten::CodeParams rs_params_with_override(std::uint32_t k, double epsilon,
                                         std::uint64_t q_override) {
    auto p = sten::choose_params(k, epsilon, sten::CodeScheme::RS);
    if (q_override != 0) {
        if (!sten::is_prime_u64(q_override))
            fail(kExitUsage, "--q must be prime");
        if (q_override < p.n)
            fail(kExitUsage, "--q must be at least n=" + std::to_string(p.n));
        p.q = q_override;
    }
    return p;
}

// Smallest total symbol count k (a multiple of s) whose derived field can
// hold the payload: the field grows with k, so feasibility is monotone and
// binary search applies.
std::uint32_t derive_rs_k(std::uint64_t byte_len, double epsilon,
                          std::uint16_t s, bool shard_level,
                          std::uint64_t q_override) {
    auto feasible = [&](std::uint64_t units) -> bool {
        std::uint64_t k_total = units * s;
        if (k_total > (1u << 26)) return true; // cap; rejected later if unreal
        std::uint32_t k_param = static_cast<std::uint32_t>(
            shard_level ? k_total / s : k_total);
        try {
            auto p = rs_params_with_override(k_param, epsilon, q_override);
            return sten::rs_symbols_needed(p.q, byte_len) <= k_total;
        } catch (const ExitWith&) {
            throw;
        } catch (const std::exception&) {
            return false; // parameter guards reject this k; move on
        }
    };
    std::uint64_t hi = 1;
    while (!feasible(hi)) {
        hi *= 2;
        if (hi * s > (1u << 26))
            fail(kExitUsage, "payload too large for this tool's parameter search");
    }
    std::uint64_t lo = 1;
    while (lo < hi) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if (feasible(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return static_cast<std::uint32_t>(lo * s);
}

DataPlan plan_message(std::span<const std::uint8_t> data, sten::Scheme scheme,
                      sten::CodeScheme family, double epsilon, std::uint16_t s,
                      std::uint32_t k_explicit, std::uint64_t q_override) {
    if (scheme == sten::Scheme::Single && s != 1)
        fail(kExitUsage, "scheme single uses exactly one server");
    if (family == sten::CodeScheme::CRT &&
        (scheme == sten::Scheme::Linear || scheme == sten::Scheme::RsParity))
        fail(kExitUsage, "linear and rs-parity require --code rs");
    if (family == sten::CodeScheme::CRT && q_override != 0)
        fail(kExitUsage, "--q applies only to --code rs");

    DataPlan plan;
    bool shard_level = scheme == sten::Scheme::Trivial;
    if (family == sten::CodeScheme::RS) {
        std::uint32_t k_total = k_explicit;
        if (k_total == 0) {
            k_total = derive_rs_k(data.size(), epsilon, s, shard_level, q_override);
        } else if (k_total % s != 0) {
            fail(kExitUsage, "--k must be a multiple of the server count");
        }
        std::uint32_t k_param = shard_level ? k_total / s : k_total;
        plan.code = rs_params_with_override(k_param, epsilon, q_override);
        if (sten::rs_symbols_needed(plan.code.q, data.size()) > k_total)
            fail(kExitUsage, "--k too small for the payload at this field size");
        plan.x = sten::message_from_bytes_rs(data, plan.code.q, k_total, s);
    } else {
        if (k_explicit != 0)
            fail(kExitUsage, "--k is derived from the payload for --code crt");
        plan.x = sten::message_from_bytes_crt(data, s);
        std::uint32_t k_param =
            shard_level ? sten::crt_primes_needed(plan.x.shard_byte_len())
                        : plan.x.k;
        plan.code = sten::choose_params(k_param, epsilon, sten::CodeScheme::CRT);
    }
    return plan;
}

sten::AuditToken preprocess(const DataPlan& plan, sten::Scheme scheme,
                            std::uint16_t r, std::uint16_t e,
                            std::uint64_t seed, std::uint16_t t) {
    switch (scheme) {
        case sten::Scheme::Single:
            return sten::preprocess_single(plan.x, plan.code, seed, t);
        case sten::Scheme::Trivial:
            return sten::preprocess_trivial(plan.x, plan.code, seed, t);
        case sten::Scheme::Linear:
            return sten::preprocess_linear(plan.x, plan.code, seed, t);
        case sten::Scheme::RsParity:
            return sten::preprocess_rs_parity(plan.x, plan.code, r, e, seed, t);
    }
    fail(kExitUsage, "unknown scheme");
}

// --- subcommand options ---

struct CommonOpts {
    std::string scheme = "single";
    std::string code = "rs";
    double epsilon = 0.25;
    std::uint32_t k = 0;
    std::uint64_t q = 0;
    std::uint16_t r = 0;
    std::uint16_t e = 0;
    std::uint64_t seed = 1;
    bool porcelain = false;
};

int run_params(std::uint32_t k, double epsilon, const std::string& family,
               bool porcelain) {
    Printer pr{porcelain};
    auto p = sten::choose_params(k, epsilon, parse_code(family));
    pr.head("derived code parameters");
    print_params(pr, p);
    return kExitOk;
}

int run_store(const CommonOpts& opt, const std::string& file,
              const std::string& servers, const std::string& token_path,
              std::uint16_t audits, int timeout_ms) {
    Printer pr{opt.porcelain};
    auto scheme = parse_scheme(opt.scheme);
    auto family = parse_code(opt.code);
    auto endpoints = sten::parse_endpoints(servers);
    auto s = static_cast<std::uint16_t>(endpoints.size());
    auto data = read_file(file);

    auto plan = plan_message(data, scheme, family, opt.epsilon, s, opt.k, opt.q);
    auto token = preprocess(plan, scheme, opt.r, opt.e, opt.seed, audits);
    auto bodies = sten::store_bodies(plan.x, plan.code, scheme, opt.r, opt.e);

    for (std::size_t i = 0; i < bodies.size(); ++i) {
        auto res = sten::rpc_store(endpoints[i], bodies[i], timeout_ms);
        if (res.status != sten::ClientResult::Status::Ok)
            fail(kExitUnreachable, "store to " + endpoints[i].host + ":" +
                                       std::to_string(endpoints[i].port) +
                                       " failed: " + res.detail);
        pr.kv("stored_shard_" + std::to_string(i),
              std::to_string(bodies[i].payload.size()) + " payload bytes");
    }

    auto bytes = sten::serialize_token(token);
    write_file_atomic(token_path, bytes);
    pr.head("stored " + std::to_string(data.size()) + " bytes across " +
            std::to_string(bodies.size()) + " server(s)");
    print_params(pr, plan.code);
    pr.kv("scheme", opt.scheme);
    pr.kv("s", static_cast<std::uint64_t>(s));
    if (scheme == sten::Scheme::RsParity) {
        pr.kv("r", static_cast<std::uint64_t>(opt.r));
        pr.kv("e", static_cast<std::uint64_t>(opt.e));
    }
    pr.kv("audits", static_cast<std::uint64_t>(audits));
    pr.kv("token", token_path);
    pr.kv("token_bytes", static_cast<std::uint64_t>(bytes.size()));
    return kExitOk;
}

int run_audit(const std::string& token_path, const std::string& servers,
              int timeout_ms, bool porcelain) {
    Printer pr{porcelain};
    sten::AuditToken token;
    try {
        token = sten::parse_token(read_file(token_path));
    } catch (const ExitWith&) {
        throw;
    } catch (const std::exception& ex) {
        fail(kExitIo, std::string("token: ") + ex.what());
    }

    auto rec = sten::next_unconsumed(token);
    if (!rec) fail(kExitExhausted, "no unconsumed audits left in " + token_path);

    auto endpoints = sten::parse_endpoints(servers);
    std::size_t expected =
        token.scheme == sten::Scheme::Single ? 1 : token.s;
    if (endpoints.size() != expected)
        fail(kExitUsage, "token expects " + std::to_string(expected) +
                             " endpoint(s), got " +
                             std::to_string(endpoints.size()));

    // Burn the record before any challenge leaves the process: a crashed
    // audit must not reuse its beta.
    token.records[*rec].consumed = true;
    write_file_atomic(token_path, sten::serialize_token(token));

    std::uint32_t beta = token.records[*rec].beta;
    auto width = sten::wire_symbol_width(token.code);
    bool silence_fatal = token.scheme == sten::Scheme::Single ||
                         token.scheme == sten::Scheme::Linear;

    std::vector<sten::ServerAnswer> answers(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        auto res = sten::rpc_challenge(endpoints[i],
                                       static_cast<std::uint16_t>(i), beta,
                                       width, timeout_ms);
        if (res.status == sten::ClientResult::Status::Ok) {
            answers[i] = res.value;
            pr.kv("server_" + std::to_string(i), res.value);
        } else {
            if (silence_fatal)
                fail(kExitUnreachable,
                     "server " + std::to_string(i) + " gave no answer (" +
                         res.detail + ") and scheme " +
                         sten::scheme_name(token.scheme) +
                         " cannot audit without it");
            answers[i] = std::nullopt;
            pr.kv("server_" + std::to_string(i), "NO_RESPONSE (" + res.detail + ")");
        }
    }

    auto verdict = sten::verify(token, *rec, answers);
    auto left = std::count_if(token.records.begin(), token.records.end(),
                              [](const auto& record) { return !record.consumed; });
    pr.kv("record", static_cast<std::uint64_t>(*rec));
    pr.kv("beta", static_cast<std::uint64_t>(beta));
    pr.kv("verdict", sten::verdict_name(verdict.kind));
    if (!verdict.cheaters.empty()) pr.kv("cheaters", join_u16(verdict.cheaters));
    if (!verdict.erased.empty()) pr.kv("erased", join_u16(verdict.erased));
    pr.kv("audits_left", static_cast<std::uint64_t>(left));
    if (!porcelain)
        std::cout << (verdict.pass() ? "PASS" : "FAIL") << "\n";
    return verdict.pass() ? kExitOk : kExitFail;
}

sten::Message simulate_message(sten::CodeScheme family, const sten::CodeParams& code,
                               std::uint32_t k, std::uint16_t s,
                               std::uint64_t bytes, std::uint64_t seed) {
    if (family == sten::CodeScheme::RS) {
        auto bits = static_cast<std::uint64_t>(std::bit_width(code.q) - 1);
        auto len = static_cast<std::size_t>(k * bits / 8);
        return sten::message_from_bytes_rs(random_bytes(len, seed), code.q, k, s);
    }
    return sten::message_from_bytes_crt(random_bytes(bytes, seed), s);
}

int run_simulate(const CommonOpts& opt, std::uint16_t s, std::uint64_t bytes,
                 const std::string& model_name, std::uint16_t target,
                 double fraction, std::uint64_t value, double silence_prob,
                 const std::string& members_text, std::uint64_t budget_bits,
                 const std::string& offsets_text, std::uint64_t trials,
                 bool exhaustive, const std::string& sweep_text,
                 const std::string& csv_path) {
    Printer pr{opt.porcelain};
    auto scheme = parse_scheme(opt.scheme);
    auto family = parse_code(opt.code);
    if (scheme == sten::Scheme::Single && s != 1)
        fail(kExitUsage, "scheme single uses --s 1");

    std::uint32_t k = opt.k != 0 ? opt.k : 8;
    if (k % s != 0) fail(kExitUsage, "--k must be a multiple of --s");

    sten::CodeParams code;
    if (family == sten::CodeScheme::RS) {
        std::uint32_t k_param = scheme == sten::Scheme::Trivial ? k / s : k;
        code = rs_params_with_override(k_param, opt.epsilon, opt.q);
    }
    sten::Message x;
    if (family == sten::CodeScheme::RS) {
        x = simulate_message(family, code, k, s, bytes, opt.seed);
    } else {
        x = sten::message_from_bytes_crt(random_bytes(bytes, opt.seed), s);
        std::uint32_t k_param =
            scheme == sten::Scheme::Trivial
                ? sten::crt_primes_needed(x.shard_byte_len())
                : x.k;
        code = sten::choose_params(k_param, opt.epsilon, sten::CodeScheme::CRT);
    }

    // One model applied to the target server (or the coalition members);
    // everyone else is honest.
    std::vector<sten::ServerModel> models(s, sten::ServerModel::honest());
    std::string model_label = model_name;
    if (model_name == "honest") {
        // nothing to do
    } else if (model_name == "amnesiac") {
        if (target >= s) fail(kExitUsage, "--target out of range");
        models[target] = sten::ServerModel::amnesiac(opt.seed);
    } else if (model_name == "amnesiac-const") {
        if (target >= s) fail(kExitUsage, "--target out of range");
        models[target] = sten::ServerModel::amnesiac_constant(value);
        model_label += "(" + std::to_string(value) + ")";
    } else if (model_name == "partial") {
        if (target >= s) fail(kExitUsage, "--target out of range");
        models[target] = sten::ServerModel::partial(fraction, opt.seed);
        model_label += "(" + std::to_string(fraction) + ")";
    } else if (model_name == "silent") {
        if (target >= s) fail(kExitUsage, "--target out of range");
        models[target] = sten::ServerModel::silent();
    } else if (model_name == "silent-prob") {
        if (target >= s) fail(kExitUsage, "--target out of range");
        models[target] = sten::ServerModel::silent_with_prob(silence_prob, opt.seed);
        model_label += "(" + std::to_string(silence_prob) + ")";
    } else if (model_name == "collude") {
        auto members = parse_u16_list(members_text);
        if (members.empty()) fail(kExitUsage, "--members required for collude");
        std::vector<std::uint64_t> offsets;
        if (!offsets_text.empty()) offsets = parse_u64_list(offsets_text);
        auto m = sten::ServerModel::collude(members, budget_bits, opt.seed, offsets);
        for (auto idx : members) {
            if (idx >= s) fail(kExitUsage, "--members index out of range");
            models[idx] = m;
        }
        model_label += "(" + members_text + "@" +
                       std::to_string(budget_bits) + "b)";
    } else {
        fail(kExitUsage, "unknown --model '" + model_name + "'");
    }

    std::ofstream csv;
    bool with_csv = !csv_path.empty();
    if (with_csv) {
        csv.open(csv_path, std::ios::trunc);
        if (!csv) fail(kExitIo, "cannot write " + csv_path);
        sten::write_csv_header(csv);
    }

    pr.head("simulation");
    pr.kv("scheme", opt.scheme);
    print_params(pr, code);
    pr.kv("s", static_cast<std::uint64_t>(s));
    pr.kv("model", model_label);

    if (!sweep_text.empty()) {
        auto fractions = parse_double_list(sweep_text);
        auto rows = sten::storage_tradeoff_sweep(x, scheme, fractions, code,
                                                 opt.seed);
        for (const auto& row : rows) {
            std::ostringstream key;
            key << "sweep_" << row.fraction;
            std::ostringstream val;
            val.precision(10);
            val << "stored_bits=" << row.stored_bits
                << " pass_prob=" << row.prob.value() << " (" << row.prob.passes
                << "/" << row.prob.n << ")";
            pr.kv(key.str(), val.str());
            if (with_csv)
                sten::write_csv_row(csv, scheme, code, s, opt.r, opt.e,
                                    "partial(" + std::to_string(row.fraction) + ")",
                                    row.stored_bits, row.prob.value(),
                                    row.prob.n);
        }
        return kExitOk;
    }

    if (exhaustive) {
        auto prob = sten::exhaustive_pass_probability(x, scheme, models, code,
                                                      opt.r, opt.e);
        pr.kv("pass_count", prob.passes);
        pr.kv("challenge_count", prob.n);
        pr.kv("pass_prob", prob.value());
        if (with_csv)
            sten::write_csv_row(csv, scheme, code, s, opt.r, opt.e, model_label,
                                0, prob.value(), prob.n);
        return kExitOk;
    }

    auto report = sten::run_audit_trials(x, scheme, models, code, opt.r, opt.e,
                                         trials, opt.seed);
    pr.kv("trials", report.trials);
    pr.kv("passes", report.passes);
    pr.kv("pass_rate", report.pass_rate);
    pr.kv("std_error", report.std_error);
    for (const auto& [name, count] : report.verdicts)
        pr.kv("verdict_" + name, count);
    for (std::size_t i = 0; i < report.server_flag_counts.size(); ++i)
        if (report.server_flag_counts[i] > 0)
            pr.kv("flagged_server_" + std::to_string(i),
                  report.server_flag_counts[i]);
    if (with_csv)
        sten::write_csv_row(csv, scheme, code, s, opt.r, opt.e, model_label, 0,
                            report.pass_rate, report.trials);
    return kExitOk;
}

int run_extract(const CommonOpts& opt, std::uint32_t flips) {
    Printer pr{opt.porcelain};
    auto family = parse_code(opt.code);
    std::uint32_t k = opt.k != 0 ? opt.k : 3;

    auto params = sten::choose_params(k, opt.epsilon, family);
    if (family == sten::CodeScheme::RS && opt.q != 0)
        params = rs_params_with_override(k, opt.epsilon, opt.q);

    sten::SplitMix64 rng(sten::mix_seed({opt.seed, 0x657874u}));
    std::uint32_t radius = sten::decoding_radius(params.rho, params.n);

    // Corrupted positions: `flips` distinct challenges answered off-by-one.
    std::vector<bool> corrupt(params.n, false);
    for (std::uint32_t placed = 0; placed < std::min(flips, params.n);) {
        auto beta = static_cast<std::uint32_t>(rng.uniform_below(params.n));
        if (corrupt[beta]) continue;
        corrupt[beta] = true;
        ++placed;
    }

    sten::Responder responder;
    std::vector<std::uint64_t> true_x;
    if (family == sten::CodeScheme::RS) {
        if (!sten::message_space_size(params.q, params.k, 1u << 24))
            fail(kExitUsage, "q^k too large to enumerate (guard 2^24)");
        true_x.resize(params.k);
        for (auto& v : true_x) v = rng.uniform_below(params.q);
        responder.stored = sten::pack_shard_symbols(true_x, params.q);
        auto code_copy = params;
        responder.answer = [code_copy, corrupt](std::uint32_t beta,
                                                const std::vector<std::uint8_t>& y) {
            auto symbols = sten::unpack_shard_symbols(y, code_copy.q);
            sten::PrimeField f(code_copy.q);
            auto a = sten::rs_eval_span(symbols, beta, 0, f);
            return corrupt[beta] ? f.add(a, 1) : a;
        };
    } else {
        auto primes = sten::first_primes(params.k);
        std::uint64_t space = 1;
        for (auto p : primes) {
            if (space > (1u << 24) / p)
                fail(kExitUsage, "residue message space too large (guard 2^24)");
            space *= p;
        }
        std::uint64_t secret = rng.uniform_below(space);
        true_x = {secret};
        responder.stored.resize(8);
        for (int i = 0; i < 8; ++i)
            responder.stored[7 - i] = static_cast<std::uint8_t>(secret >> (8 * i));
        auto code_copy = params;
        responder.answer = [code_copy, corrupt](std::uint32_t beta,
                                                const std::vector<std::uint8_t>& y) {
            auto v = sten::BigNat::from_be_bytes(y);
            auto p = code_copy.primes.at(beta);
            auto a = v.mod_u64(p);
            return corrupt[beta] ? (a + 1) % p : a;
        };
    }

    auto result = sten::extract_list(responder, params, params.rho, true_x);
    pr.head("list extraction");
    print_params(pr, params);
    pr.kv("flips", static_cast<std::uint64_t>(flips));
    pr.kv("within_radius", flips <= radius ? "yes" : "no");
    pr.kv("list_size", static_cast<std::uint64_t>(result.candidates.size()));
    pr.kv("list_bound", result.list_bound);
    pr.kv("true_message_found", result.advice_index ? "yes" : "no");
    if (result.advice_index)
        pr.kv("advice_index", static_cast<std::uint64_t>(*result.advice_index));
    if (flips <= radius && !result.advice_index)
        fail(kExitFail, "true message missing from list despite in-radius responder");
    return kExitOk;
}

int run_bound(const CommonOpts& opt, std::uint16_t s, const std::string& file,
              std::uint64_t bytes, double c0) {
    Printer pr{opt.porcelain};
    auto scheme = parse_scheme(opt.scheme);
    auto family = parse_code(opt.code);
    auto data = file.empty() ? random_bytes(bytes, opt.seed) : read_file(file);

    auto plan = plan_message(data, scheme, family, opt.epsilon, s, opt.k, opt.q);
    auto c_est = sten::kolmogorov_upper_estimate(data);
    auto sb = sten::storage_bound(scheme, plan.code, s,
                                  static_cast<double>(c_est), c0);

    pr.head("storage lower bound (bits)");
    print_params(pr, plan.code);
    pr.kv("scheme", opt.scheme);
    pr.kv("s", static_cast<std::uint64_t>(s));
    pr.kv("data_bits", static_cast<std::uint64_t>(8 * data.size()));
    pr.kv("c_upper_estimate", sb.c_estimate);
    pr.kv("s_term", sb.s_term);
    pr.kv("slack_main", sb.slack_main);
    pr.kv("slack_loglog", sb.slack_loglog);
    pr.kv("c0", sb.c0);
    pr.kv("f_value", sb.f_value);
    if (!opt.porcelain)
        std::cout << "a server family passing with probability at least 1-rho"
                     " must jointly store at least f_value bits\n";
    return kExitOk;
}

int run_enforce_demo(const CommonOpts& opt, std::uint64_t size,
                     const std::string& server, std::string storage_dir,
                     int timeout_ms) {
    Printer pr{opt.porcelain};
    auto family = parse_code(opt.code);
    auto data = random_bytes(size, opt.seed);

    auto plan = plan_message(data, sten::Scheme::Single, family, opt.epsilon, 1,
                             opt.k, opt.q);
    auto token = preprocess(plan, sten::Scheme::Single, 0, 0, opt.seed, 1);

    std::optional<sten::AuditServer> local;
    sten::Endpoint ep;
    if (server.empty()) {
        if (storage_dir.empty()) {
            storage_dir = (std::filesystem::temp_directory_path() /
                           ("sten-demo-" + std::to_string(::getpid())))
                              .string();
        }
        sten::ServerConfig cfg;
        cfg.storage_dir = storage_dir;
        local.emplace(cfg);
        local->start();
        ep = {"127.0.0.1", local->port()};
        pr.kv("spawned_server", ep.host + ":" + std::to_string(ep.port));
        pr.kv("storage_dir", storage_dir);
    } else {
        ep = sten::parse_endpoint(server);
    }

    auto bodies = sten::store_bodies(plan.x, plan.code, sten::Scheme::Single, 0, 0);
    auto sres = sten::rpc_store(ep, bodies[0], timeout_ms);
    if (sres.status != sten::ClientResult::Status::Ok)
        fail(kExitUnreachable, "store failed: " + sres.detail);

    std::uint32_t beta = token.records[0].beta;
    auto cres = sten::rpc_challenge(ep, 0, beta,
                                    sten::wire_symbol_width(plan.code),
                                    timeout_ms);
    if (cres.status != sten::ClientResult::Status::Ok)
        fail(kExitUnreachable, "challenge failed: " + cres.detail);

    bool pass = sten::verify_single(token, 0, cres.value);
    auto c_est = sten::kolmogorov_upper_estimate(data);
    auto sb = sten::storage_bound(sten::Scheme::Single, plan.code, 1,
                                  static_cast<double>(c_est), 0.0);

    pr.head("enforcement demo: one seeded-random payload, one audit round");
    print_params(pr, plan.code);
    pr.kv("payload_bytes", size);
    pr.kv("beta", static_cast<std::uint64_t>(beta));
    pr.kv("answer", cres.value);
    pr.kv("expected", token.records[0].payload.at(0));
    pr.kv("c_upper_estimate_bits", c_est);
    pr.kv("storage_bound_bits", sb.f_value);
    pr.kv("verdict", pass ? "PASS" : "FAIL");
    if (!opt.porcelain) {
        std::cout << (pass ? "PASS" : "FAIL")
                  << ": a responder passing such audits with probability at"
                     " least 1-rho must store at least "
                  << sb.f_value
                  << " bits; a fresh random payload is incompressible, so"
                     " honest storage is effectively the whole payload\n";
    }
    if (local) local->stop();
    return pass ? kExitOk : kExitFail;
}

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop.store(true); }

int run_serve(const std::string& listen, const std::string& storage_dir,
              bool silent) {
    auto ep = sten::parse_endpoint(listen);
    sten::ServerConfig cfg;
    cfg.host = ep.host;
    cfg.port = ep.port;
    cfg.storage_dir = storage_dir;
    cfg.silent = silent;
    sten::AuditServer srv(cfg);
    srv.start();
    std::cout << "listening on " << cfg.host << ":" << srv.port()
              << (silent ? " (silent mode: declines every challenge)" : "")
              << std::endl;

    struct sigaction sa {};
    sa.sa_handler = handle_signal;
    sigaction(SIGINT, &sa, nullptr);
    sigaction(SIGTERM, &sa, nullptr);
    while (!g_stop.load())
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    srv.stop();
    std::cout << "stopped\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"storage-enforcement audit toolkit"};
    app.require_subcommand(1);

    int rc = kExitOk;

    // params
    auto* cmd_params = app.add_subcommand("params",
                                          "derive code parameters from (k, epsilon)");
    std::uint32_t p_k = 4;
    double p_eps = 0.5;
    std::string p_family = "rs";
    bool p_porcelain = false;
    cmd_params->add_option("--k", p_k, "message length in symbols")->required();
    cmd_params->add_option("--epsilon", p_eps, "slack parameter in (0,1)")
        ->required();
    cmd_params->add_option("--scheme", p_family, "code family: rs|crt");
    cmd_params->add_flag("--porcelain", p_porcelain, "key=value output");
    cmd_params->callback(
        [&] { rc = run_params(p_k, p_eps, p_family, p_porcelain); });

    // shared option block builder
    auto add_common = [](CLI::App* cmd, CommonOpts& o, bool with_scheme = true) {
        if (with_scheme)
            cmd->add_option("--scheme", o.scheme,
                            "audit scheme: single|trivial|linear|rs-parity");
        cmd->add_option("--code", o.code, "code family: rs|crt");
        cmd->add_option("--epsilon", o.epsilon, "slack parameter in (0,1)");
        cmd->add_option("--k", o.k, "message length in symbols (0 = derive)");
        cmd->add_option("--q", o.q, "field prime override (rs only)");
        cmd->add_option("--seed", o.seed, "PRNG seed");
        cmd->add_flag("--porcelain", o.porcelain, "key=value output");
    };

    // store
    auto* cmd_store = app.add_subcommand(
        "store", "shard a file to servers and write the audit token");
    CommonOpts store_opt;
    std::string store_file, store_servers, store_token = "audit.token";
    std::uint16_t store_audits = sten::kDefaultAuditCount;
    int store_timeout = sten::kDefaultTimeoutMs;
    add_common(cmd_store, store_opt);
    cmd_store->add_option("--file", store_file, "payload file")->required();
    cmd_store->add_option("--servers", store_servers,
                          "comma-separated host:port list, one per shard")
        ->required();
    cmd_store->add_option("--r", store_opt.r, "rs-parity error budget");
    cmd_store->add_option("--e", store_opt.e, "rs-parity erasure budget");
    cmd_store->add_option("--audits", store_audits, "token records to mint");
    cmd_store->add_option("--token", store_token, "token output path");
    cmd_store->add_option("--timeout-ms", store_timeout, "per-RPC deadline");
    cmd_store->callback([&] {
        rc = run_store(store_opt, store_file, store_servers, store_token,
                       store_audits, store_timeout);
    });

    // audit
    auto* cmd_audit = app.add_subcommand(
        "audit", "consume one token record and challenge the servers");
    std::string audit_token = "audit.token", audit_servers;
    int audit_timeout = sten::kDefaultTimeoutMs;
    bool audit_porcelain = false;
    cmd_audit->add_option("--token", audit_token, "token path");
    cmd_audit->add_option("--servers", audit_servers,
                          "comma-separated host:port list, one per shard")
        ->required();
    cmd_audit->add_option("--timeout-ms", audit_timeout, "per-RPC deadline");
    cmd_audit->add_flag("--porcelain", audit_porcelain, "key=value output");
    cmd_audit->callback([&] {
        rc = run_audit(audit_token, audit_servers, audit_timeout, audit_porcelain);
    });

    // simulate
    auto* cmd_sim = app.add_subcommand(
        "simulate", "run adversary models against the audit schemes");
    CommonOpts sim_opt;
    sim_opt.epsilon = 0.5;
    std::uint16_t sim_s = 1, sim_target = 0;
    std::uint64_t sim_bytes = 64, sim_value = 0, sim_budget = 0,
                  sim_trials = 10000;
    double sim_fraction = 0.5, sim_silence = 0.5;
    std::string sim_model = "honest", sim_members, sim_offsets, sim_sweep,
                sim_csv;
    bool sim_exhaustive = false;
    add_common(cmd_sim, sim_opt);
    cmd_sim->add_option("--s", sim_s, "server count");
    cmd_sim->add_option("--r", sim_opt.r, "rs-parity error budget");
    cmd_sim->add_option("--e", sim_opt.e, "rs-parity erasure budget");
    cmd_sim->add_option("--bytes", sim_bytes, "payload size (crt)");
    cmd_sim->add_option(
        "--model", sim_model,
        "honest|amnesiac|amnesiac-const|partial|silent|silent-prob|collude");
    cmd_sim->add_option("--target", sim_target, "server the model applies to");
    cmd_sim->add_option("--fraction", sim_fraction, "partial: kept fraction");
    cmd_sim->add_option("--value", sim_value, "amnesiac-const: fixed answer");
    cmd_sim->add_option("--silence-prob", sim_silence,
                        "silent-prob: drop probability");
    cmd_sim->add_option("--members", sim_members, "collude: index list");
    cmd_sim->add_option("--budget-bits", sim_budget,
                        "collude: pooled storage budget");
    cmd_sim->add_option("--offsets", sim_offsets,
                        "collude: per-member additive answer offsets");
    cmd_sim->add_option("--trials", sim_trials, "Monte Carlo trial count");
    cmd_sim->add_flag("--exhaustive", sim_exhaustive,
                      "sweep every challenge once instead of sampling");
    cmd_sim->add_option("--sweep", sim_sweep,
                        "partial-storage fractions for a trade-off table");
    cmd_sim->add_option("--csv", sim_csv, "also write a CSV report");
    cmd_sim->callback([&] {
        rc = run_simulate(sim_opt, sim_s, sim_bytes, sim_model, sim_target,
                          sim_fraction, sim_value, sim_silence, sim_members,
                          sim_budget, sim_offsets, sim_trials, sim_exhaustive,
                          sim_sweep, sim_csv);
    });

    // extract
    auto* cmd_extract = app.add_subcommand(
        "extract", "desk-scale list extraction from a responder");
    CommonOpts ext_opt;
    ext_opt.epsilon = 0.5;
    std::uint32_t ext_flips = 0;
    add_common(cmd_extract, ext_opt, /*with_scheme=*/false);
    cmd_extract->add_option("--flips", ext_flips,
                            "challenges the responder answers wrongly");
    cmd_extract->callback([&] { rc = run_extract(ext_opt, ext_flips); });

    // bound
    auto* cmd_bound = app.add_subcommand(
        "bound", "itemized storage lower bound for a payload");
    CommonOpts bound_opt;
    std::uint16_t bound_s = 1;
    std::string bound_file;
    std::uint64_t bound_bytes = 4096;
    double bound_c0 = 0.0;
    add_common(cmd_bound, bound_opt);
    cmd_bound->add_option("--s", bound_s, "server count");
    cmd_bound->add_option("--file", bound_file, "payload file (else seeded random)");
    cmd_bound->add_option("--bytes", bound_bytes, "random payload size");
    cmd_bound->add_option("--c0", bound_c0, "machine-constant allowance in bits");
    cmd_bound->callback([&] {
        rc = run_bound(bound_opt, bound_s, bound_file, bound_bytes, bound_c0);
    });

    // enforce-demo
    auto* cmd_demo = app.add_subcommand(
        "enforce-demo",
        "store a seeded random payload and audit it once end to end");
    CommonOpts demo_opt;
    std::uint64_t demo_size = 4096;
    std::string demo_server, demo_dir;
    int demo_timeout = sten::kDefaultTimeoutMs;
    add_common(cmd_demo, demo_opt, /*with_scheme=*/false);
    cmd_demo->add_option("--size", demo_size, "payload bytes to generate");
    cmd_demo->add_option("--server", demo_server,
                         "existing endpoint (default: spawn one in-process)");
    cmd_demo->add_option("--storage-dir", demo_dir,
                         "spawned server's storage directory");
    cmd_demo->add_option("--timeout-ms", demo_timeout, "per-RPC deadline");
    cmd_demo->callback([&] {
        rc = run_enforce_demo(demo_opt, demo_size, demo_server, demo_dir,
                              demo_timeout);
    });

    // serve
    auto* cmd_serve =
        app.add_subcommand("serve", "run a storage server until SIGINT");
    std::string serve_listen = "127.0.0.1:0", serve_dir;
    bool serve_silent = false;
    cmd_serve->add_option("--listen", serve_listen, "host:port (port 0 = pick)");
    cmd_serve->add_option("--storage-dir", serve_dir, "shard directory")
        ->required();
    cmd_serve->add_flag("--silent", serve_silent,
                        "decline every challenge with NO_RESPONSE");
    cmd_serve->callback(
        [&] { rc = run_serve(serve_listen, serve_dir, serve_silent); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const ExitWith& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return rc;
}
