#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace sten {

// A received word for the systematic RS code over evaluation points
// 0..ell-1: position i carries a symbol or is erased (nullopt). m is the
// message length of the code (degree bound).
struct ReceivedWord {
    std::uint64_t q = 0;
    std::uint32_t m = 0;
    std::vector<std::optional<std::uint64_t>> positions;
};

struct DecodeResult {
    std::vector<std::uint64_t> message;          // recovered v (length m)
    std::vector<std::uint32_t> error_locations;  // non-erased disagreements
};

// Errors-and-erasures decoding by exhaustive error-locator search: with e
// erasures, every candidate error set of size r with 2r + e <= ell - m is
// tried in increasing r; a surviving interpolant is verified against all
// remaining positions. Within that budget the codeword is unique, so the
// first hit is the answer. Returns nullopt when no codeword fits the budget
// (the caller treats that as "adversary exceeded the contract").
//
// Exhaustive search is intentional at this block length (ell <= 16 guard,
// throws std::invalid_argument beyond it). A syndrome-based locator
// (Berlekamp-Massey with an erasure polynomial) is the upgrade path if ell
// ever needs to grow past that.
std::optional<DecodeResult> decode_errors_erasures(const ReceivedWord& z);

} // namespace sten
