#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sten {

// Arbitrary-precision nonnegative integer. Deliberately small surface: the
// residue hashing path needs comparison, reduction by a word-sized prime,
// multiplication by a word, and big-endian digit ingestion. Nothing else.
class BigNat {
public:
    BigNat() = default;
    explicit BigNat(std::uint64_t v);

    // Interprets bytes as a big-endian base-256 integer. Empty input is 0.
    static BigNat from_be_bytes(std::span<const std::uint8_t> bytes);

    bool is_zero() const { return limbs_.empty(); }
    std::size_t bit_length() const;

    // value <- value * 256 + digit (streaming ingestion step).
    void push_be_byte(std::uint8_t digit);

    BigNat& mul_u64(std::uint64_t m);
    BigNat& add_u64(std::uint64_t a);
    std::uint64_t mod_u64(std::uint64_t m) const;

    std::strong_ordering operator<=>(const BigNat& other) const;
    bool operator==(const BigNat& other) const = default;

private:
    // Little-endian 64-bit limbs, normalized (no high zero limb).
    std::vector<std::uint64_t> limbs_;
    void trim();
};

} // namespace sten
