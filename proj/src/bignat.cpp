#include "sten/bignat.hpp"

#include <bit>
#include <stdexcept>

namespace sten {

BigNat::BigNat(std::uint64_t v) {
    if (v) limbs_.push_back(v);
}

BigNat BigNat::from_be_bytes(std::span<const std::uint8_t> bytes) {
    BigNat r;
    // Pack 8 bytes per limb from the tail (least significant end) instead of
    // byte-at-a-time Horner; same value, linear time.
    std::size_t n = bytes.size();
    std::size_t limbs = (n + 7) / 8;
    r.limbs_.assign(limbs, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t sig = n - 1 - i; // significance of bytes[i] in bytes
        r.limbs_[sig / 8] |= static_cast<std::uint64_t>(bytes[i])
                             << (8 * (sig % 8));
    }
    r.trim();
    return r;
}

std::size_t BigNat::bit_length() const {
    if (limbs_.empty()) return 0;
    return 64 * (limbs_.size() - 1) + std::bit_width(limbs_.back());
}

void BigNat::push_be_byte(std::uint8_t digit) {
    mul_u64(256);
    add_u64(digit);
}

BigNat& BigNat::mul_u64(std::uint64_t m) {
    if (m == 0) {
        limbs_.clear();
        return *this;
    }
    unsigned __int128 carry = 0;
    for (auto& limb : limbs_) {
        unsigned __int128 cur = static_cast<unsigned __int128>(limb) * m + carry;
        limb = static_cast<std::uint64_t>(cur);
        carry = cur >> 64;
    }
    if (carry) limbs_.push_back(static_cast<std::uint64_t>(carry));
    return *this;
}

BigNat& BigNat::add_u64(std::uint64_t a) {
    std::uint64_t carry = a;
    for (std::size_t i = 0; carry && i < limbs_.size(); ++i) {
        std::uint64_t s = limbs_[i] + carry;
        carry = s < carry ? 1 : 0;
        limbs_[i] = s;
    }
    if (carry) limbs_.push_back(carry);
    return *this;
}

std::uint64_t BigNat::mod_u64(std::uint64_t m) const {
    if (m == 0) throw std::invalid_argument("BigNat: modulo zero");
    unsigned __int128 rem = 0;
    for (std::size_t i = limbs_.size(); i-- > 0;) {
        rem = ((rem << 64) | limbs_[i]) % m;
    }
    return static_cast<std::uint64_t>(rem);
}

std::strong_ordering BigNat::operator<=>(const BigNat& other) const {
    if (limbs_.size() != other.limbs_.size())
        return limbs_.size() <=> other.limbs_.size();
    for (std::size_t i = limbs_.size(); i-- > 0;) {
        if (limbs_[i] != other.limbs_[i]) return limbs_[i] <=> other.limbs_[i];
    }
    return std::strong_ordering::equal;
}

void BigNat::trim() {
    while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
}

} // namespace sten
