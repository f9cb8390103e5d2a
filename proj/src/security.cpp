#include "sten/security.hpp"

#include <cmath>
#include <stdexcept>

#include <zlib.h>

namespace sten {

namespace {

constexpr std::uint64_t kEnumerationLimit = 1ULL << 24;

std::vector<std::uint64_t> answer_vector(const Responder& responder,
                                         std::uint32_t n) {
    if (!responder.answer)
        throw std::invalid_argument("extract: responder has no answer function");
    std::vector<std::uint64_t> z(n);
    for (std::uint32_t beta = 0; beta < n; ++beta)
        z[beta] = responder.answer(beta, responder.stored);
    return z;
}

// Enumerates messages as base-q odometers in canonical (numeric) order and
// keeps those whose codeword is within `radius` of z.
ExtractionResult sweep_messages(
    std::uint64_t space, std::uint64_t q, std::uint32_t k,
    const std::function<void(std::span<const std::uint64_t>,
                             std::vector<std::uint64_t>&)>& encode,
    std::span<const std::uint64_t> z, std::uint32_t radius,
    std::uint64_t list_bound,
    const std::optional<std::vector<std::uint64_t>>& true_x) {
    ExtractionResult res;
    res.list_bound = list_bound;
    res.radius = radius;
    std::vector<std::uint64_t> msg(k, 0);
    std::vector<std::uint64_t> cw;
    for (std::uint64_t idx = 0; idx < space; ++idx) {
        std::uint64_t t = idx;
        for (std::uint32_t i = 0; i < k; ++i) {
            msg[i] = t % q;
            t /= q;
        }
        encode(msg, cw);
        std::uint32_t dist = 0;
        for (std::size_t j = 0; j < z.size() && dist <= radius; ++j)
            dist += cw[j] != z[j];
        if (dist <= radius) {
            if (true_x && *true_x == msg)
                res.advice_index = res.candidates.size();
            res.candidates.push_back(msg);
        }
    }
    return res;
}

} // namespace

ExtractionResult extract_list(const Responder& responder,
                              const CodeParams& code, double rho,
                              std::optional<std::vector<std::uint64_t>> true_x) {
    std::uint32_t radius = decoding_radius(rho, code.n);
    std::vector<std::uint64_t> z = answer_vector(responder, code.n);

    if (code.scheme == CodeScheme::RS) {
        std::optional<std::uint64_t> space =
            message_space_size(code.q, code.k, kEnumerationLimit);
        if (!space)
            throw std::invalid_argument("extract_list: q^k exceeds the 2^24 guard");
        PrimeField f(code.q);
        auto encode = [&](std::span<const std::uint64_t> msg,
                          std::vector<std::uint64_t>& cw) {
            cw.resize(code.n);
            for (std::uint32_t b = 0; b < code.n; ++b)
                cw[b] = rs_eval_span(msg, b, 0, f);
        };
        return sweep_messages(*space, code.q, code.k, encode, z, radius,
                              code.list_bound, true_x);
    }

    // Residue family: the message space is the integers below the product of
    // the first k primes; "digits" collapse to the integer itself.
    std::uint64_t space = 1;
    for (std::uint32_t i = 0; i < code.k; ++i) {
        std::uint64_t p = code.primes.at(i);
        if (space > kEnumerationLimit / p)
            throw std::invalid_argument(
                "extract_list: message space exceeds the 2^24 guard");
        space *= p;
    }
    auto encode = [&](std::span<const std::uint64_t> msg,
                      std::vector<std::uint64_t>& cw) {
        cw.resize(code.n);
        for (std::uint32_t b = 0; b < code.n; ++b)
            cw[b] = msg[0] % code.primes[b];
    };
    return sweep_messages(space, space, 1, encode, z, radius, code.list_bound,
                          true_x);
}

ExtractionResult extract_list_linear(const Responder& responder,
                                     const LinearCode& code, double rho,
                                     std::uint64_t list_bound,
                                     std::optional<std::vector<std::uint64_t>>
                                         true_x) {
    std::optional<std::uint64_t> space =
        message_space_size(code.q, code.k, kEnumerationLimit);
    if (!space)
        throw std::invalid_argument("extract_list_linear: q^k exceeds the 2^24 guard");
    std::uint32_t radius = decoding_radius(rho, code.n);
    std::vector<std::uint64_t> z = answer_vector(responder, code.n);
    auto encode = [&](std::span<const std::uint64_t> msg,
                      std::vector<std::uint64_t>& cw) {
        cw = code.encode(msg);
    };
    return sweep_messages(*space, code.q, code.k, encode, z, radius, list_bound,
                          true_x);
}

ExtractionResult extract_coalition(
    const std::map<std::uint16_t, Responder>& coalition,
    const std::map<std::uint16_t, std::vector<std::uint64_t>>& honest_shards,
    const CodeParams& code, std::uint16_t s, double rho,
    std::optional<std::vector<std::uint64_t>> true_xhat) {
    if (code.scheme != CodeScheme::RS)
        throw std::invalid_argument("extract_coalition: requires the linear code");
    if (coalition.empty())
        throw std::invalid_argument("extract_coalition: empty coalition");
    // The two index sets must tile [0, s) with no overlap; the argument is
    // about a coalition inside a fixed shard layout.
    for (std::uint16_t i = 0; i < s; ++i) {
        bool in_c = coalition.count(i) > 0;
        bool in_h = honest_shards.count(i) > 0;
        if (in_c == in_h)
            throw std::invalid_argument(
                "extract_coalition: coalition and honest shards must partition the servers");
    }

    std::optional<std::uint64_t> space =
        message_space_size(code.q, code.k, kEnumerationLimit);
    if (!space)
        throw std::invalid_argument("extract_coalition: q^k exceeds the 2^24 guard");

    // z = coalition answer sum per challenge. Honest shards stay out of it;
    // linearity is what lets the verifier's sum check transfer to this sum.
    PrimeField f(code.q);
    std::vector<std::uint64_t> z(code.n, 0);
    for (const auto& [idx, responder] : coalition) {
        if (!responder.answer)
            throw std::invalid_argument("extract_coalition: responder has no answer function");
        for (std::uint32_t beta = 0; beta < code.n; ++beta)
            z[beta] = f.add(z[beta], responder.answer(beta, responder.stored) %
                                         code.q);
    }

    std::uint32_t radius = decoding_radius(rho, code.n);
    auto encode = [&](std::span<const std::uint64_t> msg,
                      std::vector<std::uint64_t>& cw) {
        cw.resize(code.n);
        for (std::uint32_t b = 0; b < code.n; ++b)
            cw[b] = rs_eval_span(msg, b, 0, f);
    };
    return sweep_messages(*space, code.q, code.k, encode, z, radius,
                          code.list_bound, true_xhat);
}

std::vector<std::vector<std::uint64_t>> filter_candidates(
    const std::vector<std::vector<std::uint64_t>>& candidates,
    const CodeParams& code, std::uint32_t beta, std::uint64_t gamma) {
    std::vector<std::vector<std::uint64_t>> kept;
    for (const auto& msg : candidates) {
        std::uint64_t h;
        if (code.scheme == CodeScheme::RS) {
            PrimeField f(code.q);
            h = rs_eval_span(msg, beta, 0, f);
        } else {
            h = msg.at(0) % code.primes.at(beta);
        }
        if (h == gamma) kept.push_back(msg);
    }
    return kept;
}

StorageBound storage_bound(Scheme scheme, const CodeParams& code,
                           std::uint16_t s, double c_estimate_bits, double c0) {
    if (s == 0) throw std::invalid_argument("storage_bound: s == 0");
    double q = static_cast<double>(code.scheme == CodeScheme::RS
                                       ? code.q
                                       : code.primes.back());
    double n = static_cast<double>(code.n);
    double L = static_cast<double>(code.list_bound);
    if (L < 1.0)
        throw std::invalid_argument("storage_bound: list bound not set");
    if (q * n <= 2.0)
        throw std::invalid_argument("storage_bound: log log(qn) undefined");

    StorageBound b;
    b.scheme = scheme;
    b.c_estimate = c_estimate_bits;
    b.c0 = c0;
    double lg_q = std::log2(q);
    double lg_n = std::log2(n);
    double lg_L = std::log2(L);
    double lg_s = std::log2(static_cast<double>(s));
    switch (scheme) {
    case Scheme::Single:
        b.s_term = 0;
        b.slack_main = lg_q + lg_L + 3.0 * lg_n;
        break;
    case Scheme::Trivial:
        b.s_term = static_cast<double>(s);
        b.slack_main = 2.0 * lg_s + lg_q +
                       static_cast<double>(s) * lg_L + 4.0 * lg_n;
        break;
    case Scheme::Linear:
    case Scheme::RsParity:
        b.s_term = static_cast<double>(s);
        b.slack_main = 2.0 * lg_s + lg_q + lg_L + 4.0 * lg_n;
        break;
    }
    b.slack_loglog = 2.0 * std::log2(std::log2(q * n));
    b.f_value = c_estimate_bits - b.s_term - b.slack_main - b.slack_loglog - c0;
    return b;
}

std::uint64_t kolmogorov_upper_estimate(std::span<const std::uint8_t> data) {
    if (data.empty()) return kDecoderStubBits;
    uLongf bound = compressBound(static_cast<uLong>(data.size()));
    std::vector<std::uint8_t> buf(bound);
    int rc = compress2(buf.data(), &bound, data.data(),
                       static_cast<uLong>(data.size()), 9);
    if (rc != Z_OK)
        throw std::runtime_error("kolmogorov_upper_estimate: deflate failed");
    return kDecoderStubBits + 8ULL * bound;
}

} // namespace sten
