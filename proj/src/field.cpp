#include "sten/field.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace sten {

namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(a) * b) % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    base %= m;
    while (e) {
        if (e & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        e >>= 1;
    }
    return r;
}

} // namespace

bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL,
                            19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int s = std::countr_zero(d);
    d >>= s;
    // This witness set decides primality for all n < 3.3e24, which covers
    // the full 64-bit range.
    for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL,
                            19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

std::uint64_t next_prime_at_least(std::uint64_t n) {
    if (n < 2) throw std::invalid_argument("next_prime_at_least: n < 2");
    for (std::uint64_t c = n;; ++c) {
        if (is_prime_u64(c)) return c;
        if (c == UINT64_MAX)
            throw std::invalid_argument("next_prime_at_least: out of range");
    }
}

std::vector<std::uint64_t> first_primes(std::size_t n) {
    if (n == 0) throw std::invalid_argument("first_primes: n == 0");
    std::vector<std::uint64_t> primes;
    primes.reserve(n);
    // p_n < n(ln n + ln ln n) for n >= 6; grow the sieve if the estimate
    // ever falls short.
    std::size_t bound = 16;
    if (n >= 6) {
        double dn = static_cast<double>(n);
        double ln = std::log(dn);
        bound = static_cast<std::size_t>(dn * (ln + std::log(ln))) + 16;
    }
    for (;;) {
        primes.clear();
        std::vector<bool> composite(bound + 1, false);
        for (std::size_t i = 2; i <= bound && primes.size() < n; ++i) {
            if (composite[i]) continue;
            primes.push_back(i);
            for (std::size_t j = i * i; j <= bound; j += i) composite[j] = true;
        }
        if (primes.size() == n) return primes;
        bound *= 2;
    }
}

namespace {

void require_same_field(FieldElement a, FieldElement b) {
    if (a.modulus != b.modulus)
        throw std::invalid_argument("field elements from different fields");
}

} // namespace

FieldElement operator+(FieldElement a, FieldElement b) {
    require_same_field(a, b);
    std::uint64_t t = a.modulus - b.value;
    return {a.value >= t ? a.value - t : a.value + b.value, a.modulus};
}

FieldElement operator-(FieldElement a, FieldElement b) {
    require_same_field(a, b);
    return {a.value >= b.value ? a.value - b.value
                               : a.value + a.modulus - b.value,
            a.modulus};
}

FieldElement operator*(FieldElement a, FieldElement b) {
    require_same_field(a, b);
    return {mulmod(a.value, b.value, a.modulus), a.modulus};
}

FieldElement inverse(FieldElement a) {
    if (a.value == 0) throw std::domain_error("inverse of zero");
    // Fermat: a^(q-2) mod q. Valid for any prime modulus, no sign juggling.
    return {powmod(a.value, a.modulus - 2, a.modulus), a.modulus};
}

FieldElement pow(FieldElement base, std::uint64_t exponent) {
    return {powmod(base.value, exponent, base.modulus), base.modulus};
}

PrimeField::PrimeField(std::uint64_t q) : q_(q) {
    if (!is_prime_u64(q))
        throw std::invalid_argument("PrimeField: modulus is not prime");
}

std::uint64_t PrimeField::pow(std::uint64_t base, std::uint64_t e) const {
    return powmod(base, e, q_);
}

std::uint64_t PrimeField::inv(std::uint64_t a) const {
    return inverse(FieldElement{a, q_}).value;
}

std::size_t symbol_byte_width(std::uint64_t q) {
    if (q < 2) throw std::invalid_argument("symbol_byte_width: q < 2");
    unsigned bits = std::bit_width(q - 1); // ceil(log2 q) for q >= 2
    return (bits + 7) / 8;
}

void append_symbol_le(std::vector<std::uint8_t>& out, std::uint64_t value,
                      std::size_t width) {
    for (std::size_t i = 0; i < width; ++i)
        out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

std::uint64_t read_symbol_le(const std::uint8_t* p, std::size_t width) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i)
        v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

} // namespace sten
