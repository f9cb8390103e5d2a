#include "sten/rsdecode.hpp"

#include <stdexcept>

#include "sten/codes.hpp"
#include "sten/field.hpp"

namespace sten {

namespace {

// Advances `combo` to the next k-subset of {0..n-1} in lexicographic order;
// returns false after the last one.
bool next_combination(std::vector<std::uint32_t>& combo, std::uint32_t n) {
    std::size_t k = combo.size();
    if (k == 0) return false;
    std::size_t i = k;
    while (i-- > 0) {
        if (combo[i] + 1 <= n - (k - i)) {
            ++combo[i];
            for (std::size_t j = i + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
            return true;
        }
    }
    return false;
}

} // namespace

std::optional<DecodeResult> decode_errors_erasures(const ReceivedWord& z) {
    std::uint32_t ell = static_cast<std::uint32_t>(z.positions.size());
    if (ell == 0 || z.m == 0 || z.m > ell)
        throw std::invalid_argument("decode: need 1 <= m <= ell");
    if (ell > 16)
        throw std::invalid_argument("decode: exhaustive search supports ell <= 16");
    if (ell > z.q)
        throw std::invalid_argument("decode: ell exceeds field size");
    PrimeField f(z.q);

    std::vector<std::uint32_t> present;
    present.reserve(ell);
    for (std::uint32_t i = 0; i < ell; ++i)
        if (z.positions[i]) present.push_back(i);
    std::uint32_t e = ell - static_cast<std::uint32_t>(present.size());
    if (ell - z.m < e) return std::nullopt; // even r = 0 would blow the budget
    std::uint32_t rmax = (ell - z.m - e) / 2;

    std::vector<std::uint64_t> xs(z.m), ys(z.m);
    for (std::uint32_t r = 0; r <= rmax; ++r) {
        std::vector<std::uint32_t> combo(r);
        for (std::uint32_t i = 0; i < r; ++i) combo[i] = i;
        // combo indexes into `present`; it enumerates candidate error sets.
        do {
            // good = present minus hypothesized errors; need the first m.
            std::size_t taken = 0, ci = 0;
            for (std::size_t pi = 0; pi < present.size() && taken < z.m; ++pi) {
                if (ci < r && combo[ci] == pi) {
                    ++ci;
                    continue;
                }
                xs[taken] = present[pi];
                ys[taken] = *z.positions[present[pi]];
                ++taken;
            }
            if (taken < z.m) break; // not enough agreeing positions left
            std::vector<std::uint64_t> coeffs = interpolate_coeffs(xs, ys, f);
            // The interpolant must match every position outside the
            // hypothesized error set.
            bool ok = true;
            ci = 0;
            for (std::size_t pi = 0; pi < present.size() && ok; ++pi) {
                if (ci < r && combo[ci] == pi) {
                    ++ci;
                    continue;
                }
                std::uint32_t pos = present[pi];
                ok = poly_eval(coeffs, pos, f) == *z.positions[pos];
            }
            if (!ok) continue;
            DecodeResult res;
            res.message.resize(z.m);
            for (std::uint32_t i = 0; i < z.m; ++i)
                res.message[i] = poly_eval(coeffs, i, f);
            for (std::uint32_t pos : present) {
                if (poly_eval(coeffs, pos, f) != *z.positions[pos])
                    res.error_locations.push_back(pos);
            }
            return res;
        } while (next_combination(combo, static_cast<std::uint32_t>(present.size())));
    }
    return std::nullopt;
}

} // namespace sten
