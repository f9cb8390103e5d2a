#include "sten/codes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "sten/rng.hpp"

namespace sten {

std::uint32_t decoding_radius(double rho, std::uint32_t n) {
    if (rho < 0.0 || rho > 1.0)
        throw std::invalid_argument("decoding_radius: rho outside [0,1]");
    double r = std::floor(rho * static_cast<double>(n));
    if (r < 0) r = 0;
    if (r > n) r = n;
    return static_cast<std::uint32_t>(r);
}

JohnsonBound johnson_radius(std::uint32_t n, std::uint32_t d,
                            std::span<const std::uint64_t> alphabet_sizes) {
    if (n == 0) throw std::invalid_argument("johnson_radius: n == 0");
    if (d > n) throw std::invalid_argument("johnson_radius: d > n");
    if (alphabet_sizes.size() != n)
        throw std::invalid_argument("johnson_radius: need one alphabet size per position");
    double ratio = static_cast<double>(d) / static_cast<double>(n);
    JohnsonBound b;
    b.rho = 1.0 - std::sqrt(1.0 - ratio);
    std::uint64_t sum = 0;
    for (std::uint64_t qi : alphabet_sizes) sum += qi;
    b.list_bound = 2 * sum;
    return b;
}

JohnsonBound johnson_radius_uniform(std::uint32_t n, std::uint32_t d,
                                    std::uint64_t q) {
    std::vector<std::uint64_t> sizes(n, q);
    return johnson_radius(n, d, sizes);
}

CodeParams choose_params(std::uint32_t k, double epsilon, CodeScheme scheme) {
    if (k == 0) throw std::invalid_argument("choose_params: k == 0");
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw std::invalid_argument("choose_params: epsilon outside (0,1)");
    double n_real = std::ceil(static_cast<double>(k) / (epsilon * epsilon));
    if (!(n_real < 4294967295.0))
        throw std::invalid_argument("choose_params: n overflows 32 bits");
    std::uint32_t n = static_cast<std::uint32_t>(n_real);
    if (n <= k)
        throw std::invalid_argument("choose_params: degenerate code (n <= k)");

    CodeParams p;
    p.scheme = scheme;
    p.k = k;
    p.n = n;
    p.epsilon = epsilon;
    p.d = n - k + 1;
    p.delta = static_cast<double>(p.d) / static_cast<double>(n);
    p.rho = 1.0 - std::sqrt(1.0 - p.delta);

    double e4 = epsilon * epsilon * epsilon * epsilon;
    double L;
    if (scheme == CodeScheme::RS) {
        p.q = next_prime_at_least(n);
        L = std::ceil(2.0 * static_cast<double>(k) * static_cast<double>(k) / e4);
    } else {
        p.primes = first_primes(n);
        double lg = std::log2(static_cast<double>(k)) - std::log2(epsilon * epsilon);
        L = std::ceil(static_cast<double>(k) * static_cast<double>(k) * lg / e4);
    }
    if (!(L >= 1.0) || L > 1.8e19)
        throw std::invalid_argument("choose_params: list bound overflows");
    p.list_bound = static_cast<std::uint64_t>(L);
    return p;
}

namespace {

void append_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t read_u32_le(std::span<const std::uint8_t> in, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[off + i]) << (8 * i);
    return v;
}

std::uint64_t read_u64_le(std::span<const std::uint8_t> in, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[off + i]) << (8 * i);
    return v;
}

} // namespace

void append_code_params(std::vector<std::uint8_t>& out, const CodeParams& p) {
    out.push_back(static_cast<std::uint8_t>(p.scheme));
    append_u32_le(out, p.k);
    append_u32_le(out, p.n);
    append_u64_le(out, p.scheme == CodeScheme::RS ? p.q
                                                  : static_cast<std::uint64_t>(p.n));
}

CodeParams parse_code_params(std::span<const std::uint8_t> in, std::size_t& off) {
    if (in.size() < off + kCodeParamsWireSize)
        throw std::runtime_error("code params block truncated");
    CodeParams p;
    std::uint8_t scheme = in[off];
    if (scheme != 1 && scheme != 2)
        throw std::runtime_error("code params block: unknown scheme byte");
    p.scheme = static_cast<CodeScheme>(scheme);
    p.k = read_u32_le(in, off + 1);
    p.n = read_u32_le(in, off + 5);
    std::uint64_t w = read_u64_le(in, off + 9);
    off += kCodeParamsWireSize;
    if (p.k == 0 || p.n == 0 || p.k > p.n)
        throw std::runtime_error("code params block: invalid k/n");
    if (p.scheme == CodeScheme::RS) {
        p.q = w;
        if (!is_prime_u64(p.q) || p.q < p.n)
            throw std::runtime_error("code params block: invalid RS modulus");
    } else {
        if (w != p.n)
            throw std::runtime_error("code params block: CRT prime count mismatch");
        p.primes = first_primes(p.n);
    }
    p.d = p.n - p.k + 1;
    p.delta = static_cast<double>(p.d) / static_cast<double>(p.n);
    p.rho = 1.0 - std::sqrt(1.0 - p.delta);
    return p;
}

std::span<const std::uint64_t> Message::shard(std::uint16_t i) const {
    if (i >= s) throw std::invalid_argument("Message::shard: index out of range");
    std::uint32_t len = shard_len();
    return {symbols.data() + static_cast<std::size_t>(i) * len, len};
}

BigNat Message::shard_value(std::uint16_t i) const {
    if (i >= s) throw std::invalid_argument("Message::shard_value: index out of range");
    std::uint32_t len = shard_byte_len();
    return BigNat::from_be_bytes(
        {bytes.data() + static_cast<std::size_t>(i) * len, len});
}

BigNat Message::whole_value() const { return BigNat::from_be_bytes(bytes); }

std::uint32_t rs_symbols_needed(std::uint64_t q, std::uint64_t byte_len) {
    unsigned bits_per = std::bit_width(q) - 1; // floor(log2 q)
    if (bits_per == 0)
        throw std::invalid_argument("rs_symbols_needed: q < 2");
    std::uint64_t total_bits = 8 * byte_len;
    std::uint64_t k = (total_bits + bits_per - 1) / bits_per;
    if (k > 0xffffffffULL)
        throw std::invalid_argument("rs_symbols_needed: k overflows 32 bits");
    return static_cast<std::uint32_t>(k == 0 ? 1 : k);
}

std::uint32_t crt_primes_needed(std::uint64_t byte_len) {
    if (byte_len == 0) return 1;
    // Smallest k with product(p_1..p_k) >= 256^byte_len, computed exactly.
    BigNat target(1);
    for (std::uint64_t i = 0; i < byte_len; ++i) target.mul_u64(256);
    BigNat prod(1);
    std::size_t have = 64;
    std::vector<std::uint64_t> ps = first_primes(have);
    std::uint32_t k = 0;
    while (prod < target) {
        if (k == ps.size()) {
            have *= 2;
            ps = first_primes(have);
        }
        prod.mul_u64(ps[k]);
        ++k;
    }
    return k == 0 ? 1 : k;
}

Message message_from_bytes_rs(std::span<const std::uint8_t> data,
                              std::uint64_t q, std::uint32_t k_total,
                              std::uint16_t s) {
    if (s == 0 || k_total == 0 || k_total % s != 0)
        throw std::invalid_argument("message_from_bytes_rs: s must divide k");
    unsigned bits_per = std::bit_width(q) - 1;
    if (bits_per == 0) throw std::invalid_argument("message_from_bytes_rs: q < 2");
    std::uint64_t capacity = static_cast<std::uint64_t>(k_total) * bits_per;
    if (8 * data.size() > capacity)
        throw std::invalid_argument("message_from_bytes_rs: data exceeds k symbols");

    Message m;
    m.scheme = CodeScheme::RS;
    m.s = s;
    m.q = q;
    m.k = k_total;
    m.original_byte_length = data.size();
    m.symbols.assign(k_total, 0);

    // Big-endian bit order: the first input bit is the top bit of symbol 0.
    std::size_t bitpos = 0;
    for (std::uint32_t sym = 0; sym < k_total; ++sym) {
        std::uint64_t v = 0;
        for (unsigned b = 0; b < bits_per; ++b, ++bitpos) {
            std::uint64_t bit = 0;
            if (bitpos < 8 * data.size())
                bit = (data[bitpos / 8] >> (7 - bitpos % 8)) & 1;
            v = (v << 1) | bit;
        }
        m.symbols[sym] = v; // v < 2^bits_per <= q
    }
    return m;
}

Message message_from_bytes_crt(std::span<const std::uint8_t> data,
                               std::uint16_t s) {
    if (s == 0) throw std::invalid_argument("message_from_bytes_crt: s == 0");
    Message m;
    m.scheme = CodeScheme::CRT;
    m.s = s;
    m.original_byte_length = data.size();
    std::size_t padded = data.size();
    if (padded == 0) padded = s;
    if (padded % s != 0) padded += s - padded % s;
    m.bytes.assign(data.begin(), data.end());
    m.bytes.resize(padded, 0);
    m.k = crt_primes_needed(padded);
    return m;
}

std::uint64_t poly_eval(std::span<const std::uint64_t> coeffs, std::uint64_t x,
                        const PrimeField& f) {
    std::uint64_t acc = 0;
    for (std::size_t i = coeffs.size(); i-- > 0;)
        acc = f.add(f.mul(acc, x), coeffs[i]);
    return acc;
}

std::vector<std::uint64_t> interpolate_coeffs(std::span<const std::uint64_t> xs,
                                              std::span<const std::uint64_t> ys,
                                              const PrimeField& f) {
    std::size_t m = xs.size();
    if (ys.size() != m || m == 0)
        throw std::invalid_argument("interpolate_coeffs: bad point count");
    // master(X) = prod (X - x_j), degree m.
    std::vector<std::uint64_t> master(m + 1, 0);
    master[0] = 1;
    std::size_t deg = 0;
    for (std::size_t j = 0; j < m; ++j) {
        std::uint64_t neg = f.neg(xs[j] % f.modulus());
        for (std::size_t i = deg + 2; i-- > 0;) {
            std::uint64_t v = f.mul(master[i], neg);
            if (i > 0) v = f.add(v, master[i - 1]);
            master[i] = v;
        }
        ++deg;
    }
    std::vector<std::uint64_t> result(m, 0);
    std::vector<std::uint64_t> quot(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
        // quot = master / (X - x_i) by synthetic division (exact).
        std::uint64_t xi = xs[i];
        std::uint64_t carry = master[m]; // leading coeff (1)
        for (std::size_t jj = m; jj-- > 0;) {
            quot[jj] = carry;
            carry = f.add(master[jj], f.mul(carry, xi));
        }
        // denom = quot(x_i) = prod_{j != i} (x_i - x_j)
        std::uint64_t denom = poly_eval(quot, xi, f);
        if (denom == 0)
            throw std::invalid_argument("interpolate_coeffs: duplicate x");
        std::uint64_t scale = f.mul(ys[i] % f.modulus(), f.inv(denom));
        for (std::size_t jj = 0; jj < m; ++jj)
            result[jj] = f.add(result[jj], f.mul(scale, quot[jj]));
    }
    return result;
}

FieldElement rs_hash(const Message& x, std::uint32_t beta_index,
                     const CodeParams& params) {
    if (params.scheme != CodeScheme::RS)
        throw std::invalid_argument("rs_hash: params are not RS");
    if (beta_index >= params.n)
        throw std::invalid_argument("rs_hash: beta out of range");
    PrimeField f(params.q);
    return {rs_eval_span(x.symbols, beta_index, 0, f), params.q};
}

FieldElement rs_hash_stream(const SymbolSource& next, std::size_t k,
                            FieldElement beta) {
    PrimeField f(beta.modulus);
    std::uint64_t acc = 0;
    std::uint64_t power = 1; // beta^0; x_0 is consumed first
    for (std::size_t i = 0; i < k; ++i) {
        std::optional<std::uint64_t> sym = next();
        if (!sym)
            throw std::runtime_error("rs_hash_stream: stream shorter than k");
        acc = f.add(acc, f.mul(*sym % f.modulus(), power));
        power = f.mul(power, beta.value);
    }
    if (next())
        throw std::runtime_error("rs_hash_stream: stream longer than k");
    return {acc, beta.modulus};
}

std::uint64_t rs_eval_span(std::span<const std::uint64_t> coeffs,
                           std::uint64_t beta, std::uint64_t offset_exponent,
                           const PrimeField& f) {
    std::uint64_t acc = 0;
    std::uint64_t power = f.pow(beta, offset_exponent);
    for (std::uint64_t c : coeffs) {
        acc = f.add(acc, f.mul(c, power));
        power = f.mul(power, beta);
    }
    return acc;
}

FieldElement crt_hash_value(const BigNat& value, std::uint32_t beta_index,
                            const CodeParams& params) {
    if (params.scheme != CodeScheme::CRT)
        throw std::invalid_argument("crt_hash: params are not CRT");
    if (beta_index >= params.n)
        throw std::invalid_argument("crt_hash: beta out of range");
    BigNat range(1);
    for (std::uint32_t i = 0; i < params.k; ++i) range.mul_u64(params.primes.at(i));
    if (!(value < range))
        throw std::domain_error("crt_hash: value outside the message range");
    std::uint64_t p = params.primes[beta_index];
    return {value.mod_u64(p), p};
}

FieldElement crt_hash(const Message& x, std::uint32_t beta_index,
                      const CodeParams& params) {
    return crt_hash_value(x.whole_value(), beta_index, params);
}

std::vector<std::uint64_t> systematic_rs_encode(std::span<const std::uint64_t> v,
                                                std::uint32_t ell,
                                                const PrimeField& f) {
    std::uint32_t m = static_cast<std::uint32_t>(v.size());
    if (m == 0 || m > ell)
        throw std::invalid_argument("systematic_rs_encode: need 1 <= m <= ell");
    if (ell > f.modulus())
        throw std::invalid_argument("systematic_rs_encode: ell exceeds field size");
    std::vector<std::uint64_t> xs(m), ys(m);
    for (std::uint32_t i = 0; i < m; ++i) {
        xs[i] = i;
        ys[i] = v[i] % f.modulus();
    }
    std::vector<std::uint64_t> coeffs = interpolate_coeffs(xs, ys, f);
    std::vector<std::uint64_t> out(ell);
    for (std::uint32_t i = 0; i < m; ++i) out[i] = ys[i];
    for (std::uint32_t i = m; i < ell; ++i) out[i] = poly_eval(coeffs, i, f);
    return out;
}

std::vector<std::uint64_t> LinearCode::encode(
    std::span<const std::uint64_t> msg) const {
    if (msg.size() != k) throw std::invalid_argument("LinearCode: bad message length");
    PrimeField f(q);
    std::vector<std::uint64_t> out(n, 0);
    for (std::uint32_t i = 0; i < k; ++i) {
        std::uint64_t mi = msg[i] % q;
        if (mi == 0) continue;
        const std::uint64_t* row = gen.data() + static_cast<std::size_t>(i) * n;
        for (std::uint32_t j = 0; j < n; ++j)
            out[j] = f.add(out[j], f.mul(mi, row[j]));
    }
    return out;
}

std::uint32_t LinearCode::min_distance() const {
    std::optional<std::uint64_t> total = message_space_size(q, k, 1ULL << 24);
    if (!total)
        throw std::invalid_argument("LinearCode::min_distance: q^k too large");
    PrimeField f(q);
    std::uint32_t best = n;
    std::vector<std::uint64_t> msg(k, 0);
    for (std::uint64_t idx = 1; idx < *total; ++idx) {
        std::uint64_t t = idx;
        for (std::uint32_t i = 0; i < k; ++i) {
            msg[i] = t % q;
            t /= q;
        }
        std::vector<std::uint64_t> cw = encode(msg);
        std::uint32_t w = 0;
        for (std::uint64_t c : cw) w += c != 0;
        best = std::min(best, w);
    }
    return best;
}

LinearCode LinearCode::seeded(std::uint64_t q, std::uint32_t k, std::uint32_t n,
                              std::uint64_t seed) {
    LinearCode c;
    c.q = q;
    c.k = k;
    c.n = n;
    c.gen.resize(static_cast<std::size_t>(k) * n);
    SplitMix64 rng(mix_seed({seed, q, k, n}));
    for (auto& g : c.gen) g = rng.uniform_below(q);
    return c;
}

std::optional<std::uint64_t> message_space_size(std::uint64_t q, std::uint32_t k,
                                                std::uint64_t limit) {
    std::uint64_t total = 1;
    for (std::uint32_t i = 0; i < k; ++i) {
        if (total > limit / q) return std::nullopt;
        total *= q;
        if (total > limit) return std::nullopt;
    }
    return total;
}

} // namespace sten
