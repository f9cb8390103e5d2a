#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "sten/codes.hpp"
#include "sten/field.hpp"
#include "sten/rng.hpp"

using namespace sten;

namespace {

CodeParams tiny_rs(std::uint32_t k, std::uint32_t n, std::uint64_t q) {
    CodeParams p;
    p.scheme = CodeScheme::RS;
    p.k = k;
    p.n = n;
    p.q = q;
    p.d = n - k + 1;
    p.delta = static_cast<double>(p.d) / n;
    p.rho = 1.0 - std::sqrt(1.0 - p.delta);
    return p;
}

CodeParams tiny_crt(std::uint32_t k, std::uint32_t n) {
    CodeParams p;
    p.scheme = CodeScheme::CRT;
    p.k = k;
    p.n = n;
    p.primes = first_primes(n);
    p.d = n - k + 1;
    p.delta = static_cast<double>(p.d) / n;
    p.rho = 1.0 - std::sqrt(1.0 - p.delta);
    return p;
}

} // namespace

TEST_CASE("choose_params: frozen RS examples") {
    auto p = choose_params(4, 0.5, CodeScheme::RS);
    CHECK(p.n == 16);
    CHECK(p.q == 17);
    CHECK(p.d == 13);
    CHECK(p.list_bound == 512); // 2 k^2 / eps^4
    CHECK(p.delta == doctest::Approx(13.0 / 16.0));
    CHECK(p.rho == doctest::Approx(1.0 - std::sqrt(3.0 / 16.0)));

    auto big = choose_params(64, 0.25, CodeScheme::RS);
    CHECK(big.n == 1024);
    CHECK(big.q == 1031);
    CHECK(big.list_bound == 2097152);
}

TEST_CASE("choose_params: frozen CRT examples") {
    auto p = choose_params(4, 0.5, CodeScheme::CRT);
    CHECK(p.n == 16);
    REQUIRE(p.primes.size() == 16);
    CHECK(p.primes.front() == 2);
    CHECK(p.primes.back() == 53);
    // k^2 (log2 k - log2 eps^2) / eps^4 = 16 * (2 + 2) / 0.0625
    CHECK(p.list_bound == 1024);
    CHECK(p.d == 13);
}

TEST_CASE("choose_params: guards") {
    CHECK_THROWS_AS(choose_params(0, 0.5, CodeScheme::RS), std::invalid_argument);
    CHECK_THROWS_AS(choose_params(4, 0.0, CodeScheme::RS), std::invalid_argument);
    CHECK_THROWS_AS(choose_params(4, 1.0, CodeScheme::RS), std::invalid_argument);
    CHECK_THROWS_AS(choose_params(4, -0.2, CodeScheme::RS), std::invalid_argument);
}

TEST_CASE("decoding_radius rounds down") {
    CHECK(decoding_radius(0.5, 3) == 1);
    CHECK(decoding_radius(0.5, 4) == 2);
    CHECK(decoding_radius(1.0 - std::sqrt(3.0 / 16.0), 16) == 9);
    CHECK(decoding_radius(0.0, 100) == 0);
}

TEST_CASE("johnson_radius: frozen uniform example") {
    auto jb = johnson_radius_uniform(16, 13, 17);
    CHECK(jb.rho == doctest::Approx(1.0 - std::sqrt(3.0 / 16.0)));
    CHECK(jb.list_bound == 2 * 16 * 17);
}

TEST_CASE("johnson_radius: per-position alphabets and validation") {
    auto primes = first_primes(5);
    auto jb = johnson_radius(5, 4, primes);
    CHECK(jb.rho == doctest::Approx(1.0 - std::sqrt(1.0 - 4.0 / 5.0)));
    CHECK(jb.list_bound == 2 * (2 + 3 + 5 + 7 + 11));

    CHECK_THROWS_AS(johnson_radius(5, 6, primes), std::invalid_argument);
    std::vector<std::uint64_t> short_sizes{2, 3};
    CHECK_THROWS_AS(johnson_radius(5, 3, short_sizes), std::invalid_argument);
}

TEST_CASE("RS message packing: frozen big-endian bit layout") {
    std::vector<std::uint8_t> data{0xAB, 0xCD};
    auto m = message_from_bytes_rs(data, 17, 4, 2);
    CHECK(m.symbols == std::vector<std::uint64_t>{10, 11, 12, 13});
    CHECK(m.k == 4);
    CHECK(m.shard_len() == 2);
    CHECK(m.original_byte_length == 2);
    CHECK(m.shard(0)[0] == 10);
    CHECK(m.shard(1)[1] == 13);

    auto padded = message_from_bytes_rs(data, 17, 6, 2);
    CHECK(padded.symbols == std::vector<std::uint64_t>{10, 11, 12, 13, 0, 0});
}

TEST_CASE("RS message packing: capacity and layout validation") {
    std::vector<std::uint8_t> data{0xAB, 0xCD};
    CHECK(rs_symbols_needed(17, 2) == 4);
    CHECK(rs_symbols_needed(17, 0) == 1); // a message is never empty
    CHECK(rs_symbols_needed(2147483647ull, 31) == 9); // ceil(248 bits / 30)
    CHECK_THROWS_AS(message_from_bytes_rs(data, 17, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(message_from_bytes_rs(data, 17, 5, 2), std::invalid_argument);
    CHECK_THROWS_AS(message_from_bytes_rs(data, 17, 4, 0), std::invalid_argument);
}

TEST_CASE("CRT message packing: tail padding and shard values") {
    std::vector<std::uint8_t> data{1, 2, 3};
    auto m = message_from_bytes_crt(data, 2);
    CHECK(m.bytes == std::vector<std::uint8_t>{1, 2, 3, 0});
    CHECK(m.shard_byte_len() == 2);
    CHECK(m.original_byte_length == 3);
    CHECK(m.shard_value(0).mod_u64(100000) == 258);  // 0x0102
    CHECK(m.shard_value(1).mod_u64(100000) == 768);  // 0x0300
    CHECK(m.k == crt_primes_needed(4));
    CHECK(BigNat::from_be_bytes(m.bytes) == m.whole_value());
}

TEST_CASE("crt_primes_needed: exact product thresholds") {
    // 2*3*5*7 = 210 < 256 <= 2*3*5*7*11, so one byte still needs k where
    // the product first clears 256^len.
    CHECK(crt_primes_needed(0) == 1);
    CHECK(crt_primes_needed(1) == 5); // 2*3*5*7 = 210 < 256, 210*11 clears it
    for (std::uint64_t len = 0; len <= 16; ++len) {
        std::uint32_t k = crt_primes_needed(len);
        auto primes = first_primes(k + 1);
        BigNat prod(1), want(1);
        for (std::uint32_t i = 0; i < k; ++i) prod.mul_u64(primes[i]);
        for (std::uint64_t i = 0; i < len; ++i) want.mul_u64(256);
        CHECK(prod >= want);
        if (k > 1) {
            BigNat smaller(1);
            for (std::uint32_t i = 0; i + 1 < k; ++i) smaller.mul_u64(primes[i]);
            CHECK(smaller < want);
        }
    }
}

TEST_CASE("rs_hash: frozen GF(7) example") {
    auto m = message_from_bytes_rs({}, 7, 2, 1);
    m.symbols = {1, 2};
    auto p = tiny_rs(2, 7, 7);
    CHECK(rs_hash(m, 3, p).value == 0); // 1 + 2*3 = 7 = 0 mod 7
    CHECK(rs_hash(m, 0, p).value == 1);
    CHECK(rs_hash(m, 1, p).value == 3);
    CHECK_THROWS_AS(rs_hash(m, 7, p), std::invalid_argument);
}

TEST_CASE("rs_hash_stream: equals batch hashing, one pass, exact length") {
    SplitMix64 rng(404);
    for (int trial = 0; trial < 1000; ++trial) {
        std::uint64_t q = trial % 2 == 0 ? 257 : 2147483647ull;
        std::uint32_t k = 1 + static_cast<std::uint32_t>(rng.uniform_below(24));
        auto p = tiny_rs(k, k + 4, q);
        Message m;
        m.scheme = CodeScheme::RS;
        m.q = q;
        m.k = k;
        m.s = 1;
        m.symbols.resize(k);
        for (auto& v : m.symbols) v = rng.uniform_below(q);
        std::uint32_t beta = static_cast<std::uint32_t>(rng.uniform_below(p.n));

        std::size_t cursor = 0;
        SymbolSource src = [&]() -> std::optional<std::uint64_t> {
            if (cursor >= m.symbols.size()) return std::nullopt;
            return m.symbols[cursor++];
        };
        PrimeField f(q);
        auto streamed = rs_hash_stream(src, k, f.element(beta));
        REQUIRE(streamed.value == rs_hash(m, beta, p).value);
    }
}

TEST_CASE("rs_hash_stream: stream length mismatches are format errors") {
    PrimeField f(7);
    std::vector<std::uint64_t> vals{1, 2};
    std::size_t cursor = 0;
    SymbolSource short_src = [&]() -> std::optional<std::uint64_t> {
        if (cursor >= vals.size()) return std::nullopt;
        return vals[cursor++];
    };
    CHECK_THROWS_AS(rs_hash_stream(short_src, 3, f.element(2)),
                    std::runtime_error);

    std::size_t pos = 0;
    SymbolSource long_src = [&]() -> std::optional<std::uint64_t> {
        return pos++ < 5 ? std::optional<std::uint64_t>(1) : std::nullopt;
    };
    CHECK_THROWS_AS(rs_hash_stream(long_src, 3, f.element(2)),
                    std::runtime_error);
}

TEST_CASE("rs_eval_span: embedded shard contributions sum to the full hash") {
    SplitMix64 rng(707);
    for (int trial = 0; trial < 500; ++trial) {
        std::uint64_t q = 257;
        std::uint32_t k = 8;
        std::uint16_t s = trial % 2 == 0 ? 2 : 4;
        PrimeField f(q);
        std::vector<std::uint64_t> symbols(k);
        for (auto& v : symbols) v = rng.uniform_below(q);
        std::uint64_t beta = rng.uniform_below(q);

        std::uint64_t full = rs_eval_span(symbols, beta, 0, f);
        std::uint64_t acc = 0;
        std::uint32_t shard_len = k / s;
        for (std::uint16_t i = 0; i < s; ++i) {
            std::span<const std::uint64_t> shard(symbols.data() +
                                                     i * shard_len,
                                                 shard_len);
            acc = f.add(acc, rs_eval_span(shard, beta,
                                          static_cast<std::uint64_t>(i) *
                                              shard_len,
                                          f));
        }
        REQUIRE(acc == full);
    }
}

TEST_CASE("crt_hash: frozen worked example (x = 10)") {
    auto m = message_from_bytes_crt(std::vector<std::uint8_t>{10}, 1);
    auto p = tiny_crt(m.k, m.k + 4);
    CHECK(crt_hash(m, 0, p).value == 0); // 10 mod 2
    CHECK(crt_hash(m, 1, p).value == 1); // 10 mod 3
    CHECK(crt_hash(m, 2, p).value == 0); // 10 mod 5
    CHECK(crt_hash(m, 3, p).value == 3); // 10 mod 7
    CHECK(crt_hash(m, 1, p).modulus == 3);
}

TEST_CASE("crt_hash_value: residues of the largest legal value, domain guard") {
    // k = 2: values live below 2*3 = 6.
    auto p = tiny_crt(2, 6);
    BigNat five(5);
    CHECK(crt_hash_value(five, 0, p).value == 1);
    CHECK(crt_hash_value(five, 1, p).value == 2);
    CHECK(crt_hash_value(five, 2, p).value == 0);
    CHECK(crt_hash_value(five, 3, p).value == 5);
    CHECK_THROWS_AS(crt_hash_value(BigNat(6), 0, p), std::domain_error);
    CHECK_THROWS_AS(crt_hash_value(five, 6, p), std::invalid_argument);
}

TEST_CASE("interpolation: round-trips random polynomials") {
    SplitMix64 rng(11);
    for (std::uint64_t q : {7ull, 257ull, 65537ull}) {
        PrimeField f(q);
        for (int trial = 0; trial < 200; ++trial) {
            std::size_t m = 1 + rng.uniform_below(std::min<std::uint64_t>(q, 9));
            std::vector<std::uint64_t> coeffs(m);
            for (auto& c : coeffs) c = rng.uniform_below(q);
            std::vector<std::uint64_t> xs(m), ys(m);
            for (std::size_t i = 0; i < m; ++i) {
                xs[i] = i;
                ys[i] = poly_eval(coeffs, i, f);
            }
            REQUIRE(interpolate_coeffs(xs, ys, f) == coeffs);
        }
    }
}

TEST_CASE("interpolation: duplicate evaluation points rejected") {
    PrimeField f(7);
    std::vector<std::uint64_t> xs{1, 1}, ys{2, 3};
    CHECK_THROWS_AS(interpolate_coeffs(xs, ys, f), std::invalid_argument);
    std::vector<std::uint64_t> wrap_xs{1, 8}, wrap_ys{2, 3}; // 8 = 1 mod 7
    CHECK_THROWS_AS(interpolate_coeffs(wrap_xs, wrap_ys, f),
                    std::invalid_argument);
}

TEST_CASE("systematic_rs_encode: frozen GF(7) example and prefix property") {
    PrimeField f(7);
    std::vector<std::uint64_t> v{1, 2};
    CHECK(systematic_rs_encode(v, 4, f) ==
          std::vector<std::uint64_t>{1, 2, 3, 4});

    SplitMix64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::uint64_t q = 257;
        PrimeField field(q);
        std::size_t m = 1 + rng.uniform_below(6);
        std::uint32_t ell =
            static_cast<std::uint32_t>(m + rng.uniform_below(6));
        std::vector<std::uint64_t> msg(m);
        for (auto& x : msg) x = rng.uniform_below(q);
        auto cw = systematic_rs_encode(msg, ell, field);
        REQUIRE(cw.size() == ell);
        for (std::size_t i = 0; i < m; ++i) REQUIRE(cw[i] == msg[i]);
        // Every position lies on the unique degree < m interpolant.
        std::vector<std::uint64_t> xs(m), ys(m);
        for (std::size_t i = 0; i < m; ++i) {
            xs[i] = i;
            ys[i] = msg[i];
        }
        auto coeffs = interpolate_coeffs(xs, ys, field);
        for (std::uint32_t i = 0; i < ell; ++i)
            REQUIRE(poly_eval(coeffs, i, field) == cw[i]);
    }
}

TEST_CASE("systematic_rs_encode: guards") {
    PrimeField f(7);
    std::vector<std::uint64_t> v{1, 2};
    CHECK_THROWS_AS(systematic_rs_encode(v, 1, f), std::invalid_argument);
    CHECK_THROWS_AS(systematic_rs_encode(v, 8, f), std::invalid_argument);
    CHECK_THROWS_AS(systematic_rs_encode({}, 4, f), std::invalid_argument);
}

TEST_CASE("LinearCode: seeded generation is deterministic and linear") {
    auto c1 = LinearCode::seeded(3, 4, 16, 99);
    auto c2 = LinearCode::seeded(3, 4, 16, 99);
    CHECK(c1.gen == c2.gen);
    auto c3 = LinearCode::seeded(3, 4, 16, 100);
    CHECK(c1.gen != c3.gen);

    PrimeField f(3);
    SplitMix64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::uint64_t> a(4), b(4), sum(4);
        for (std::size_t i = 0; i < 4; ++i) {
            a[i] = rng.uniform_below(3);
            b[i] = rng.uniform_below(3);
            sum[i] = f.add(a[i], b[i]);
        }
        auto ea = c1.encode(a), eb = c1.encode(b), es = c1.encode(sum);
        for (std::size_t j = 0; j < 16; ++j)
            REQUIRE(es[j] == f.add(ea[j], eb[j]));
    }
}

TEST_CASE("LinearCode: min_distance matches an independent enumeration") {
    auto code = LinearCode::seeded(3, 2, 6, 7);
    // Oracle: walk all nonzero messages with an explicit odometer and count
    // the minimum weight directly from the generator rows.
    PrimeField f(3);
    std::uint32_t best = 6 + 1;
    std::vector<std::uint64_t> msg(2, 0);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            if (a == 0 && b == 0) continue;
            msg[0] = static_cast<std::uint64_t>(a);
            msg[1] = static_cast<std::uint64_t>(b);
            std::uint32_t w = 0;
            for (std::uint32_t j = 0; j < 6; ++j) {
                std::uint64_t v = f.add(f.mul(msg[0], code.gen[j]),
                                        f.mul(msg[1], code.gen[6 + j]));
                if (v != 0) ++w;
            }
            best = std::min(best, w);
        }
    CHECK(code.min_distance() == best);
}

TEST_CASE("message_space_size guards enumeration") {
    CHECK(message_space_size(3, 15, 1u << 24).value() == 14348907ull);
    CHECK_FALSE(message_space_size(3, 16, 1u << 24).has_value());
    CHECK_FALSE(message_space_size(2, 64, 1u << 24).has_value());
    CHECK(message_space_size(17, 4, 1u << 24).value() == 83521);
}

TEST_CASE("code params wire block: round-trip and validation") {
    auto rs = choose_params(8, 0.5, CodeScheme::RS);
    std::vector<std::uint8_t> buf;
    append_code_params(buf, rs);
    REQUIRE(buf.size() == kCodeParamsWireSize);
    std::size_t off = 0;
    auto back = parse_code_params(buf, off);
    CHECK(off == kCodeParamsWireSize);
    CHECK(back.scheme == rs.scheme);
    CHECK(back.k == rs.k);
    CHECK(back.n == rs.n);
    CHECK(back.q == rs.q);
    CHECK(back.d == rs.d);

    auto crt = choose_params(3, 0.5, CodeScheme::CRT);
    buf.clear();
    append_code_params(buf, crt);
    off = 0;
    auto crt_back = parse_code_params(buf, off);
    CHECK(crt_back.primes == crt.primes);

    // Corruptions: scheme byte, k > n, composite modulus.
    buf.clear();
    append_code_params(buf, rs);
    buf[0] = 9;
    off = 0;
    CHECK_THROWS_AS(parse_code_params(buf, off), std::runtime_error);
    buf[0] = 1;
    buf[1] = 0xFF; // k becomes huge -> k > n
    off = 0;
    CHECK_THROWS_AS(parse_code_params(buf, off), std::runtime_error);
}

TEST_CASE("alphabet_at dispatches per family") {
    auto rs = tiny_rs(2, 7, 7);
    CHECK(rs.alphabet_at(0) == 7);
    CHECK(rs.alphabet_at(6) == 7);
    auto crt = tiny_crt(2, 5);
    CHECK(crt.alphabet_at(0) == 2);
    CHECK(crt.alphabet_at(4) == 11);
}
