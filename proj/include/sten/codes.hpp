#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sten/bignat.hpp"
#include "sten/field.hpp"

namespace sten {

enum class CodeScheme : std::uint8_t { RS = 1, CRT = 2 };

// A hash family realized as an error-correcting code: the data is a message,
// a challenge picks one codeword position, and the hash value is the symbol
// at that position. Distance between codewords bounds how often two distinct
// messages can answer identically.
struct CodeParams {
    CodeScheme scheme = CodeScheme::RS;
    std::uint32_t k = 0; // message length (symbols / prime slots)
    std::uint32_t n = 0; // block length (number of possible challenges)

    // RS: prime alphabet, evaluation points are 0..n-1 (requires n <= q).
    std::uint64_t q = 0;
    // CRT: position i holds the residue modulo primes[i]; first n primes.
    std::vector<std::uint64_t> primes;

    std::uint32_t d = 0;        // minimum distance, n - k + 1 for both families
    double delta = 0.0;         // d / n
    double rho = 0.0;           // 1 - sqrt(1 - d/n) (Johnson radius fraction)
    std::uint64_t list_bound = 0; // list size L at radius rho
    double epsilon = 0.0;       // design slack the parameters were derived from

    std::uint64_t alphabet_at(std::uint32_t beta) const {
        return scheme == CodeScheme::RS ? q : primes.at(beta);
    }
};

// Integer decoding radius: floor(rho * n), rounded down so the claim stays
// conservative under floating point.
std::uint32_t decoding_radius(double rho, std::uint32_t n);

struct JohnsonBound {
    double rho;               // 1 - sqrt(1 - d/n)
    std::uint64_t list_bound; // 2 * sum of per-position alphabet sizes
};

// Alphabet sizes may differ per position (the residue family uses a distinct
// prime per position). Throws std::invalid_argument when d > n or sizes is
// not n long.
JohnsonBound johnson_radius(std::uint32_t n, std::uint32_t d,
                            std::span<const std::uint64_t> alphabet_sizes);
JohnsonBound johnson_radius_uniform(std::uint32_t n, std::uint32_t d,
                                    std::uint64_t q);

// Parameter selection for a target slack epsilon in (0,1): n = ceil(k/eps^2),
// RS picks the smallest prime q >= n and L = ceil(2 k^2 / eps^4); CRT takes
// the first n primes and L = ceil(k^2 (log2 k - log2 eps^2) / eps^4).
CodeParams choose_params(std::uint32_t k, double epsilon, CodeScheme scheme);

// Bit-exact CodeParams block used inside tokens and wire bodies:
// scheme byte (0x01 RS, 0x02 CRT), k and n as 32-bit LE, then one 64-bit LE
// word holding q (RS) or the prime count n (CRT; primes are regenerated on
// parse, never stored).
void append_code_params(std::vector<std::uint8_t>& out, const CodeParams& p);
CodeParams parse_code_params(std::span<const std::uint8_t> in, std::size_t& off);
constexpr std::size_t kCodeParamsWireSize = 1 + 4 + 4 + 8;

// User data mapped into the message space, zero-padded so the shard layout
// divides evenly. original_byte_length remembers where padding begins.
struct Message {
    CodeScheme scheme = CodeScheme::RS;
    std::uint16_t s = 1; // shard count; shard i is an equal slice

    // RS: k symbols, each holding floor(log2 q) input bits (big-endian bit
    // order over the byte stream), zero-padded to k.
    std::uint64_t q = 0;
    std::vector<std::uint64_t> symbols;

    // CRT: the raw byte string, zero-padded at the tail to a multiple of s;
    // a shard is the big-endian integer of its byte slice.
    std::vector<std::uint8_t> bytes;

    std::uint32_t k = 0; // RS: total symbols; CRT: prime slots for the whole value
    std::uint64_t original_byte_length = 0;

    std::uint32_t shard_len() const { return k / s; } // RS symbols per shard
    std::span<const std::uint64_t> shard(std::uint16_t i) const;
    BigNat shard_value(std::uint16_t i) const; // CRT
    BigNat whole_value() const;                // CRT
    std::uint32_t shard_byte_len() const {
        return static_cast<std::uint32_t>(bytes.size() / s);
    }
};

// How many symbols (RS over GF(q)) or prime slots (CRT) are needed to hold
// byte_len bytes of payload.
std::uint32_t rs_symbols_needed(std::uint64_t q, std::uint64_t byte_len);
std::uint32_t crt_primes_needed(std::uint64_t byte_len);

// Packs bytes into an RS message of exactly k_total symbols (s | k_total).
// Throws std::invalid_argument when the data does not fit.
Message message_from_bytes_rs(std::span<const std::uint8_t> data,
                              std::uint64_t q, std::uint32_t k_total,
                              std::uint16_t s);
// CRT message: pads to a multiple of s bytes; k covers the whole value.
Message message_from_bytes_crt(std::span<const std::uint8_t> data,
                               std::uint16_t s);

// --- Polynomial utilities over GF(q) (shared by the encoder and decoder) ---

// Horner evaluation of coefficients c[0] + c[1] X + ... at x.
std::uint64_t poly_eval(std::span<const std::uint64_t> coeffs, std::uint64_t x,
                        const PrimeField& f);
// Unique degree < m interpolant through (xs[i], ys[i]); xs must be distinct.
std::vector<std::uint64_t> interpolate_coeffs(std::span<const std::uint64_t> xs,
                                              std::span<const std::uint64_t> ys,
                                              const PrimeField& f);

// --- Hashes-as-code-positions ---

// RS position hash: P_x(beta) with P_x(Y) = sum_i x_i Y^i and evaluation
// point equal to beta itself (canonical evaluation set 0,1,...,n-1).
// beta_index >= n is a usage error.
FieldElement rs_hash(const Message& x, std::uint32_t beta_index,
                     const CodeParams& params);

// One-pass evaluation over a symbol stream: the only state is (accumulator,
// running power). next() yields symbols x_0 first and returns nullopt at
// end-of-stream; a stream shorter or longer than k is a format error.
using SymbolSource = std::function<std::optional<std::uint64_t>()>;
FieldElement rs_hash_stream(const SymbolSource& next, std::size_t k,
                            FieldElement beta);

// Same one-pass loop for a shard embedded at a symbol offset: the power
// accumulator starts at beta^offset, so the result is the shard's
// contribution to the full-length evaluation.
std::uint64_t rs_eval_span(std::span<const std::uint64_t> coeffs,
                           std::uint64_t beta, std::uint64_t offset_exponent,
                           const PrimeField& f);

// CRT position hash: value mod primes[beta]. The value must be below the
// product of the first k primes (std::domain_error otherwise).
FieldElement crt_hash_value(const BigNat& value, std::uint32_t beta_index,
                            const CodeParams& params);
FieldElement crt_hash(const Message& x, std::uint32_t beta_index,
                      const CodeParams& params);

// --- Systematic RS code over the evaluation set 0..ell-1 ---
// Output positions 0..m-1 carry v verbatim; positions m..ell-1 evaluate the
// degree < m interpolant of v. Requires m <= ell <= q.
std::vector<std::uint64_t> systematic_rs_encode(std::span<const std::uint64_t> v,
                                                std::uint32_t ell,
                                                const PrimeField& f);

// --- Desk-scale generator-matrix code ---
// Small linear codes over GF(q) for parameter regimes plain RS cannot reach
// (n > q). Used by the extraction and list-decoding checks; the true
// distance is computed by enumerating all q^k codewords.
struct LinearCode {
    std::uint64_t q = 0;
    std::uint32_t k = 0;
    std::uint32_t n = 0;
    std::vector<std::uint64_t> gen; // row-major k x n

    std::vector<std::uint64_t> encode(std::span<const std::uint64_t> msg) const;
    std::uint32_t min_distance() const; // guard: q^k <= 2^24

    static LinearCode seeded(std::uint64_t q, std::uint32_t k, std::uint32_t n,
                             std::uint64_t seed);
};

// q^k if it fits below limit, nullopt otherwise (enumeration guards).
std::optional<std::uint64_t> message_space_size(std::uint64_t q, std::uint32_t k,
                                                std::uint64_t limit);

} // namespace sten
