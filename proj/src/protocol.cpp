#include "sten/protocol.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "sten/rng.hpp"
#include "sten/rsdecode.hpp"

namespace sten {

namespace {

void check_rs_only(const CodeParams& code, const char* what) {
    if (code.scheme != CodeScheme::RS)
        throw std::invalid_argument(std::string(what) +
                                    ": requires a linear (RS) code");
}

void check_record(const AuditToken& t, std::size_t record) {
    if (record >= t.records.size())
        throw std::invalid_argument("audit record index out of range");
}

std::uint64_t shard_hash_rs(const Message& x, std::uint16_t server,
                            std::uint32_t beta, const CodeParams& code,
                            bool embedded) {
    PrimeField f(code.q);
    std::span<const std::uint64_t> shard =
        x.s == 1 ? std::span<const std::uint64_t>(x.symbols) : x.shard(server);
    std::uint64_t offset =
        embedded ? static_cast<std::uint64_t>(server) * x.shard_len() : 0;
    return rs_eval_span(shard, beta, offset, f);
}

} // namespace

std::vector<std::uint64_t> payload_for_beta(const Message& x,
                                            const CodeParams& code,
                                            Scheme scheme, std::uint16_t r,
                                            std::uint16_t e,
                                            std::uint32_t beta) {
    if (beta >= code.n)
        throw std::invalid_argument("payload_for_beta: beta out of range");
    switch (scheme) {
    case Scheme::Single: {
        if (x.s != 1)
            throw std::invalid_argument("single scheme expects one shard");
        if (code.scheme == CodeScheme::RS)
            return {rs_hash(x, beta, code).value};
        return {crt_hash(x, beta, code).value};
    }
    case Scheme::Trivial: {
        std::vector<std::uint64_t> payload;
        payload.reserve(x.s);
        for (std::uint16_t i = 0; i < x.s; ++i) {
            if (code.scheme == CodeScheme::RS) {
                PrimeField f(code.q);
                payload.push_back(rs_eval_span(x.shard(i), beta, 0, f));
            } else {
                payload.push_back(
                    crt_hash_value(x.shard_value(i), beta, code).value);
            }
        }
        return payload;
    }
    case Scheme::Linear: {
        check_rs_only(code, "payload_for_beta(linear)");
        return {rs_hash(x, beta, code).value};
    }
    case Scheme::RsParity: {
        check_rs_only(code, "payload_for_beta(rs-parity)");
        std::uint32_t ell = 2u * r + e + x.s;
        PrimeField f(code.q);
        std::vector<std::uint64_t> v(x.s);
        for (std::uint16_t i = 0; i < x.s; ++i)
            v[i] = shard_hash_rs(x, i, beta, code, true);
        std::vector<std::uint64_t> cw = systematic_rs_encode(v, ell, f);
        return {cw.begin() + x.s, cw.end()};
    }
    }
    throw std::invalid_argument("payload_for_beta: unknown scheme");
}

namespace {

AuditToken make_token(const Message& x, const CodeParams& code, Scheme scheme,
                      std::uint16_t r, std::uint16_t e, std::uint64_t seed,
                      std::uint16_t t) {
    if (t == 0) throw std::invalid_argument("preprocess: audit count is zero");
    AuditToken tok;
    tok.scheme = scheme;
    tok.code = code;
    tok.s = x.s;
    tok.r = r;
    tok.e = e;
    tok.original_byte_length = x.original_byte_length;
    tok.records.reserve(t);
    SplitMix64 rng(seed);
    for (std::uint16_t i = 0; i < t; ++i) {
        TokenRecord rec;
        rec.beta = static_cast<std::uint32_t>(rng.uniform_below(code.n));
        rec.consumed = false;
        rec.payload = payload_for_beta(x, code, scheme, r, e, rec.beta);
        tok.records.push_back(std::move(rec));
    }
    return tok;
}

} // namespace

AuditToken preprocess_single(const Message& x, const CodeParams& code,
                             std::uint64_t seed, std::uint16_t t) {
    if (x.s != 1)
        throw std::invalid_argument("preprocess_single: message must have s = 1");
    return make_token(x, code, Scheme::Single, 0, 0, seed, t);
}

AuditToken preprocess_trivial(const Message& x, const CodeParams& shard_code,
                              std::uint64_t seed, std::uint16_t t) {
    if (x.scheme == CodeScheme::RS && shard_code.k != x.shard_len())
        throw std::invalid_argument(
            "preprocess_trivial: code message length must match shard length");
    if (x.scheme == CodeScheme::CRT &&
        shard_code.k < crt_primes_needed(x.shard_byte_len()))
        throw std::invalid_argument(
            "preprocess_trivial: code has too few prime slots for a shard");
    return make_token(x, shard_code, Scheme::Trivial, 0, 0, seed, t);
}

AuditToken preprocess_linear(const Message& x, const CodeParams& code,
                             std::uint64_t seed, std::uint16_t t) {
    check_rs_only(code, "preprocess_linear");
    if (code.k != x.k)
        throw std::invalid_argument(
            "preprocess_linear: code message length must match message");
    return make_token(x, code, Scheme::Linear, 0, 0, seed, t);
}

AuditToken preprocess_rs_parity(const Message& x, const CodeParams& code,
                                std::uint16_t r, std::uint16_t e,
                                std::uint64_t seed, std::uint16_t t) {
    check_rs_only(code, "preprocess_rs_parity");
    if (code.k != x.k)
        throw std::invalid_argument(
            "preprocess_rs_parity: code message length must match message");
    std::uint32_t ell = 2u * r + e + x.s;
    if (ell > code.q)
        throw std::invalid_argument(
            "preprocess_rs_parity: 2r+e+s exceeds the parity field size");
    return make_token(x, code, Scheme::RsParity, r, e, seed, t);
}

std::uint64_t honest_shard_response(const Message& x, std::uint16_t server,
                                    std::uint32_t beta, const CodeParams& code,
                                    Scheme scheme) {
    if (server >= x.s)
        throw std::invalid_argument("honest_shard_response: server out of range");
    if (beta >= code.n)
        throw std::invalid_argument("honest_shard_response: beta out of range");
    switch (scheme) {
    case Scheme::Single:
        if (code.scheme == CodeScheme::CRT)
            return crt_hash_value(x.whole_value(), beta, code).value;
        return shard_hash_rs(x, server, beta, code, false);
    case Scheme::Trivial:
        if (code.scheme == CodeScheme::CRT)
            return crt_hash_value(x.shard_value(server), beta, code).value;
        return shard_hash_rs(x, server, beta, code, false);
    case Scheme::Linear:
    case Scheme::RsParity:
        check_rs_only(code, "honest_shard_response");
        return shard_hash_rs(x, server, beta, code, true);
    }
    throw std::invalid_argument("honest_shard_response: unknown scheme");
}

bool verify_single(const AuditToken& t, std::size_t record,
                   std::uint64_t answer) {
    check_record(t, record);
    return answer == t.records[record].payload.at(0);
}

AuditVerdict verify_trivial(const AuditToken& t, std::size_t record,
                            std::span<const ServerAnswer> answers) {
    check_record(t, record);
    if (answers.size() != t.s)
        throw std::invalid_argument("verify_trivial: need one answer slot per server");
    const TokenRecord& rec = t.records[record];
    AuditVerdict v;
    for (std::uint16_t i = 0; i < t.s; ++i) {
        // A server that stays silent fails its own audit; others are
        // unaffected (independent per-shard checks).
        if (!answers[i] || *answers[i] != rec.payload.at(i))
            v.cheaters.push_back(i);
    }
    v.kind = v.cheaters.empty() ? AuditVerdict::Kind::Pass
                                : AuditVerdict::Kind::Fail;
    return v;
}

bool verify_linear(const AuditToken& t, std::size_t record,
                   std::span<const ServerAnswer> answers) {
    check_record(t, record);
    if (answers.size() != t.s)
        throw std::invalid_argument("verify_linear: need one answer per server");
    PrimeField f(t.code.q);
    std::uint64_t sum = 0;
    for (const ServerAnswer& a : answers) {
        if (!a)
            throw std::runtime_error(
                "verify_linear: missing response; the sum check needs all servers");
        sum = f.add(sum, *a % f.modulus());
    }
    return sum == t.records[record].payload.at(0);
}

AuditVerdict verify_rs_parity(const AuditToken& t, std::size_t record,
                              std::span<const ServerAnswer> answers) {
    check_record(t, record);
    if (answers.size() != t.s)
        throw std::invalid_argument("verify_rs_parity: need one answer slot per server");
    const TokenRecord& rec = t.records[record];
    AuditVerdict v;
    for (std::uint16_t i = 0; i < t.s; ++i)
        if (!answers[i]) v.erased.push_back(i);
    if (v.erased.size() > t.e) {
        // More silence than the parity material was provisioned for; the
        // decode contract is void.
        v.kind = AuditVerdict::Kind::DecodingFailure;
        return v;
    }

    ReceivedWord w;
    w.q = t.code.q;
    w.m = t.s;
    w.positions.resize(t.ell());
    for (std::uint16_t i = 0; i < t.s; ++i)
        w.positions[i] = answers[i] ? std::optional<std::uint64_t>(*answers[i] % w.q)
                                    : std::nullopt;
    for (std::size_t i = 0; i < rec.payload.size(); ++i)
        w.positions[t.s + i] = rec.payload[i];

    std::optional<DecodeResult> dec = decode_errors_erasures(w);
    if (!dec) {
        v.kind = AuditVerdict::Kind::DecodingFailure;
        return v;
    }
    for (std::uint32_t loc : dec->error_locations) {
        if (loc >= t.s) {
            // The decode accuses verifier-local parity symbols, which cannot
            // be wrong; only an out-of-budget adversary produces this.
            v.kind = AuditVerdict::Kind::DecodingFailure;
            v.cheaters.clear();
            return v;
        }
        v.cheaters.push_back(static_cast<std::uint16_t>(loc));
    }
    v.kind = v.cheaters.empty() ? AuditVerdict::Kind::Pass
                                : AuditVerdict::Kind::Fail;
    return v;
}

AuditVerdict verify(const AuditToken& t, std::size_t record,
                    std::span<const ServerAnswer> answers) {
    AuditVerdict v;
    switch (t.scheme) {
    case Scheme::Single: {
        if (answers.size() != 1)
            throw std::invalid_argument("verify: single scheme expects one answer");
        bool ok = answers[0] && verify_single(t, record, *answers[0]);
        v.kind = ok ? AuditVerdict::Kind::Pass : AuditVerdict::Kind::Fail;
        if (!ok) v.cheaters.push_back(0);
        return v;
    }
    case Scheme::Trivial:
        return verify_trivial(t, record, answers);
    case Scheme::Linear: {
        bool ok = verify_linear(t, record, answers);
        v.kind = ok ? AuditVerdict::Kind::Pass : AuditVerdict::Kind::Fail;
        return v;
    }
    case Scheme::RsParity:
        return verify_rs_parity(t, record, answers);
    }
    throw std::invalid_argument("verify: unknown scheme");
}

std::size_t payload_symbol_count(Scheme scheme, std::uint16_t s,
                                 std::uint16_t r, std::uint16_t e) {
    switch (scheme) {
    case Scheme::Single:
    case Scheme::Linear:
        return 1;
    case Scheme::Trivial:
        return s;
    case Scheme::RsParity:
        return 2u * r + e;
    }
    throw std::invalid_argument("payload_symbol_count: unknown scheme");
}

std::size_t token_symbol_width(const AuditToken& t) {
    std::uint64_t q = t.code.scheme == CodeScheme::RS ? t.code.q
                                                      : t.code.primes.back();
    return symbol_byte_width(q);
}

namespace {

constexpr std::uint8_t kTokenVersion = 0x01;
const char kTokenMagic[4] = {'S', 'T', 'E', 'N'};

void append_u16_le(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void append_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint16_t read_u16_le(std::span<const std::uint8_t> in, std::size_t off) {
    return static_cast<std::uint16_t>(in[off] |
                                      (static_cast<std::uint16_t>(in[off + 1]) << 8));
}

std::uint32_t read_u32_le(std::span<const std::uint8_t> in, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(in[off + i]) << (8 * i);
    return v;
}

std::uint64_t read_u64_le(std::span<const std::uint8_t> in, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(in[off + i]) << (8 * i);
    return v;
}

} // namespace

std::vector<std::uint8_t> serialize_token(const AuditToken& t) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kTokenMagic, kTokenMagic + 4);
    out.push_back(kTokenVersion);
    out.push_back(static_cast<std::uint8_t>(t.scheme));
    append_code_params(out, t.code);
    append_u16_le(out, t.s);
    append_u16_le(out, t.r);
    append_u16_le(out, t.e);
    append_u16_le(out, static_cast<std::uint16_t>(t.records.size()));
    append_u64_le(out, t.original_byte_length);
    std::size_t width = token_symbol_width(t);
    std::size_t count = payload_symbol_count(t.scheme, t.s, t.r, t.e);
    for (const TokenRecord& rec : t.records) {
        if (rec.payload.size() != count)
            throw std::invalid_argument("serialize_token: malformed payload");
        append_u32_le(out, rec.beta);
        out.push_back(rec.consumed ? 1 : 0);
        for (std::uint64_t sym : rec.payload)
            append_symbol_le(out, sym, width);
    }
    return out;
}

AuditToken parse_token(std::span<const std::uint8_t> bytes) {
    std::size_t off = 0;
    auto need = [&](std::size_t nbytes) {
        if (bytes.size() < off + nbytes)
            throw std::runtime_error("token truncated");
    };
    need(6);
    if (!std::equal(kTokenMagic, kTokenMagic + 4, bytes.begin()))
        throw std::runtime_error("token: bad magic");
    if (bytes[4] != kTokenVersion)
        throw std::runtime_error("token: unsupported version");
    std::uint8_t scheme_byte = bytes[5];
    if (scheme_byte < 1 || scheme_byte > 4)
        throw std::runtime_error("token: unknown scheme byte");
    off = 6;

    AuditToken t;
    t.scheme = static_cast<Scheme>(scheme_byte);
    t.code = parse_code_params(bytes, off);
    need(2 * 4 + 8);
    t.s = read_u16_le(bytes, off);
    t.r = read_u16_le(bytes, off + 2);
    t.e = read_u16_le(bytes, off + 4);
    std::uint16_t count = read_u16_le(bytes, off + 6);
    t.original_byte_length = read_u64_le(bytes, off + 8);
    off += 16;
    if (t.s == 0) throw std::runtime_error("token: s == 0");
    if (t.scheme != Scheme::RsParity && (t.r != 0 || t.e != 0))
        throw std::runtime_error("token: r/e only valid for rs-parity");

    std::size_t width = token_symbol_width(t);
    std::size_t syms = payload_symbol_count(t.scheme, t.s, t.r, t.e);
    for (std::uint16_t i = 0; i < count; ++i) {
        need(4 + 1 + syms * width);
        TokenRecord rec;
        rec.beta = read_u32_le(bytes, off);
        off += 4;
        if (rec.beta >= t.code.n)
            throw std::runtime_error("token: challenge index out of range");
        std::uint8_t consumed = bytes[off++];
        if (consumed > 1) throw std::runtime_error("token: bad consumed flag");
        rec.consumed = consumed == 1;
        rec.payload.reserve(syms);
        for (std::size_t j = 0; j < syms; ++j) {
            rec.payload.push_back(read_symbol_le(bytes.data() + off, width));
            off += width;
        }
        t.records.push_back(std::move(rec));
    }
    if (off != bytes.size())
        throw std::runtime_error("token: trailing bytes");
    return t;
}

std::optional<std::size_t> next_unconsumed(const AuditToken& t) {
    for (std::size_t i = 0; i < t.records.size(); ++i)
        if (!t.records[i].consumed) return i;
    return std::nullopt;
}

} // namespace sten
