#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sten/codes.hpp"

namespace sten {

// Audit protocol flavors. Single audits one server holding everything;
// Trivial stores one expected hash per shard; Linear stores a single hash of
// the whole message and checks the sum of shard contributions; RsParity
// stores parity symbols of the expected answer vector so individual cheaters
// can be pinpointed and up to e silent servers tolerated.
enum class Scheme : std::uint8_t {
    Single = 1,
    Trivial = 2,
    Linear = 3,
    RsParity = 4,
};

// nullopt = NO_RESPONSE.
using ServerAnswer = std::optional<std::uint64_t>;

struct TokenRecord {
    std::uint32_t beta = 0;
    bool consumed = false;
    std::vector<std::uint64_t> payload;
};

// Verifier-local state for a series of audits. Each record is one challenge
// worth of material; a record is burned after use (consumed flag), so a
// bundle of t records supports exactly t audits. Single-writer: the process
// running the audit owns the file between read and rewrite.
struct AuditToken {
    Scheme scheme = Scheme::Single;
    CodeParams code;
    std::uint16_t s = 1;
    std::uint16_t r = 0; // RsParity error budget
    std::uint16_t e = 0; // RsParity erasure budget
    std::uint64_t original_byte_length = 0;
    std::vector<TokenRecord> records;

    std::uint32_t ell() const {
        return 2u * r + e + s; // RsParity codeword length
    }
};

struct AuditVerdict {
    enum class Kind : std::uint8_t { Pass, Fail, DecodingFailure };
    Kind kind = Kind::Fail;
    // Trivial: servers whose answer was wrong or missing. RsParity: T', the
    // identified cheater set (disjoint from `erased` by construction).
    std::vector<std::uint16_t> cheaters;
    // RsParity: E, the servers that did not answer.
    std::vector<std::uint16_t> erased;

    bool pass() const { return kind == Kind::Pass; }
};

constexpr std::uint16_t kDefaultAuditCount = 16;

// Expected payload for one challenge. Single/Linear: the one stored hash;
// Trivial: per-shard hashes; RsParity: the 2r+e parity symbols of the
// systematic RS encoding of the expected answer vector.
std::vector<std::uint64_t> payload_for_beta(const Message& x,
                                            const CodeParams& code,
                                            Scheme scheme, std::uint16_t r,
                                            std::uint16_t e, std::uint32_t beta);

// Preprocessing: draws t challenges from the seeded generator (rejection
// sampled, so unbiased over [0, n)) and materializes their payloads.
AuditToken preprocess_single(const Message& x, const CodeParams& code,
                             std::uint64_t seed,
                             std::uint16_t t = kDefaultAuditCount);
AuditToken preprocess_trivial(const Message& x, const CodeParams& shard_code,
                              std::uint64_t seed,
                              std::uint16_t t = kDefaultAuditCount);
AuditToken preprocess_linear(const Message& x, const CodeParams& code,
                             std::uint64_t seed,
                             std::uint16_t t = kDefaultAuditCount);
AuditToken preprocess_rs_parity(const Message& x, const CodeParams& code,
                                std::uint16_t r, std::uint16_t e,
                                std::uint64_t seed,
                                std::uint16_t t = kDefaultAuditCount);

// What a correct server holding shard `server` answers for challenge beta.
// Single/Trivial hash the shard under its own code; Linear/RsParity hash the
// zero-padded embedding of the shard in the full message (one pass over the
// shard, power accumulator starting at beta^offset), so honest answers sum
// to the full-message hash.
std::uint64_t honest_shard_response(const Message& x, std::uint16_t server,
                                    std::uint32_t beta, const CodeParams& code,
                                    Scheme scheme);

bool verify_single(const AuditToken& t, std::size_t record,
                   std::uint64_t answer);
AuditVerdict verify_trivial(const AuditToken& t, std::size_t record,
                            std::span<const ServerAnswer> answers);
// Throws std::runtime_error if any answer is missing: the sum check is
// undefined without all terms.
bool verify_linear(const AuditToken& t, std::size_t record,
                   std::span<const ServerAnswer> answers);
AuditVerdict verify_rs_parity(const AuditToken& t, std::size_t record,
                              std::span<const ServerAnswer> answers);

// Scheme dispatch used by the simulator and the CLI. Missing answers under
// Single become Fail; under Linear they still throw.
AuditVerdict verify(const AuditToken& t, std::size_t record,
                    std::span<const ServerAnswer> answers);

// --- Token file format v1 (bit-exact) ---
// magic "STEN", version 0x01, scheme byte (0x01..0x04), CodeParams block,
// s/r/e as 16-bit LE, record count t as 16-bit LE, original_byte_length as
// 64-bit LE, then t records of [beta 32-bit LE, consumed byte, payload
// symbols in field serialization order]. Symbol width: ceil(ceil(log2 q)/8)
// bytes for RS; the width of the largest prime for CRT.
std::vector<std::uint8_t> serialize_token(const AuditToken& t);
AuditToken parse_token(std::span<const std::uint8_t> bytes);

std::size_t token_symbol_width(const AuditToken& t);
std::size_t payload_symbol_count(Scheme scheme, std::uint16_t s,
                                 std::uint16_t r, std::uint16_t e);

std::optional<std::size_t> next_unconsumed(const AuditToken& t);

} // namespace sten
