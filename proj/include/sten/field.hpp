#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sten {

// Deterministic Miller-Rabin over the fixed witness set that decides
// primality for every 64-bit integer. No probabilistic path.
bool is_prime_u64(std::uint64_t n);

// Smallest prime >= n. Throws std::invalid_argument when n < 2 or no prime
// fits in 64 bits.
std::uint64_t next_prime_at_least(std::uint64_t n);

// First n primes in order (2, 3, 5, ...). Sieve-backed.
// Throws std::invalid_argument for n == 0.
std::vector<std::uint64_t> first_primes(std::size_t n);

// Value in a prime field, carrying its modulus. Mixed-modulus arithmetic is
// a usage error, not a silent reduction.
struct FieldElement {
    std::uint64_t value = 0;
    std::uint64_t modulus = 0;

    bool operator==(const FieldElement&) const = default;
};

FieldElement operator+(FieldElement a, FieldElement b);
FieldElement operator-(FieldElement a, FieldElement b);
FieldElement operator*(FieldElement a, FieldElement b);
// Multiplicative inverse; std::domain_error on zero.
FieldElement inverse(FieldElement a);
FieldElement pow(FieldElement base, std::uint64_t exponent);

// GF(q) for prime q up to 64 bits. Construction validates primality once;
// the arithmetic methods work on raw residues in [0, q) so hot loops avoid
// carrying FieldElement around. Instances are immutable and freely shareable
// across threads.
class PrimeField {
public:
    explicit PrimeField(std::uint64_t q);

    std::uint64_t modulus() const { return q_; }
    FieldElement element(std::uint64_t v) const { return {v % q_, q_}; }

    std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
        std::uint64_t t = q_ - b; // b < q, so no overflow on either branch
        return a >= t ? a - t : a + b;
    }
    std::uint64_t sub(std::uint64_t a, std::uint64_t b) const {
        return a >= b ? a - b : a + q_ - b;
    }
    std::uint64_t neg(std::uint64_t a) const { return a == 0 ? 0 : q_ - a; }
    std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(a) * b) % q_);
    }
    std::uint64_t pow(std::uint64_t base, std::uint64_t e) const;
    // Extended-Euclid inverse; std::domain_error on zero.
    std::uint64_t inv(std::uint64_t a) const;

private:
    std::uint64_t q_;
};

// Fixed-width symbol serialization: ceil(ceil(log2 q) / 8) bytes,
// little-endian. Every residue of GF(q) fits exactly.
std::size_t symbol_byte_width(std::uint64_t q);
void append_symbol_le(std::vector<std::uint8_t>& out, std::uint64_t value,
                      std::size_t width);
std::uint64_t read_symbol_le(const std::uint8_t* p, std::size_t width);

} // namespace sten
