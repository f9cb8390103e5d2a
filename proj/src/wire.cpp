#include "sten/wire.hpp"

#include <stdexcept>
#include <string>

namespace sten {

namespace {

void append_u16_le(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void append_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint16_t read_u16_le(std::span<const std::uint8_t> in, std::size_t off) {
    return static_cast<std::uint16_t>(
        in[off] | (static_cast<std::uint16_t>(in[off + 1]) << 8));
}

std::uint32_t read_u32_le(std::span<const std::uint8_t> in, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(in[off + i]) << (8 * i);
    return v;
}

std::uint64_t read_u64_le(std::span<const std::uint8_t> in, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(in[off + i]) << (8 * i);
    return v;
}

void need(std::span<const std::uint8_t> body, std::size_t at, std::size_t count,
          const char* what) {
    if (body.size() < at + count)
        throw std::runtime_error(std::string(what) + ": body truncated");
}

} // namespace

std::vector<std::uint8_t> encode_frame(const WireMessage& m) {
    if (m.body.size() > kMaxWireBody)
        throw std::invalid_argument("encode_frame: body too large");
    std::vector<std::uint8_t> out;
    out.reserve(5 + m.body.size());
    std::uint32_t len = static_cast<std::uint32_t>(m.body.size());
    // Length travels big-endian on the wire.
    out.push_back(static_cast<std::uint8_t>(len >> 24));
    out.push_back(static_cast<std::uint8_t>(len >> 16));
    out.push_back(static_cast<std::uint8_t>(len >> 8));
    out.push_back(static_cast<std::uint8_t>(len));
    out.push_back(static_cast<std::uint8_t>(m.type));
    out.insert(out.end(), m.body.begin(), m.body.end());
    return out;
}

std::optional<WireMessage> parse_frame(std::span<const std::uint8_t> bytes,
                                       std::size_t& consumed) {
    consumed = 0;
    if (bytes.size() < 5) return std::nullopt;
    std::uint32_t len = (static_cast<std::uint32_t>(bytes[0]) << 24) |
                        (static_cast<std::uint32_t>(bytes[1]) << 16) |
                        (static_cast<std::uint32_t>(bytes[2]) << 8) |
                        static_cast<std::uint32_t>(bytes[3]);
    if (len > kMaxWireBody) throw std::runtime_error("frame: body too large");
    std::uint8_t type = bytes[4];
    if (type < 0x01 || type > 0x06)
        throw std::runtime_error("frame: unknown type byte");
    if (bytes.size() < 5u + len) return std::nullopt;
    WireMessage m;
    m.type = static_cast<WireType>(type);
    m.body.assign(bytes.begin() + 5, bytes.begin() + 5 + len);
    consumed = 5u + len;
    return m;
}

std::vector<std::uint8_t> encode_store_body(const StoreBody& b) {
    std::vector<std::uint8_t> out;
    out.push_back(static_cast<std::uint8_t>(b.scheme));
    append_code_params(out, b.code);
    append_u16_le(out, b.s);
    append_u16_le(out, b.index);
    append_u16_le(out, b.r);
    append_u16_le(out, b.e);
    append_u64_le(out, b.payload.size());
    out.insert(out.end(), b.payload.begin(), b.payload.end());
    return out;
}

StoreBody parse_store_body(std::span<const std::uint8_t> body) {
    need(body, 0, 1, "store");
    StoreBody b;
    std::uint8_t scheme = body[0];
    if (scheme < 1 || scheme > 4)
        throw std::runtime_error("store: unknown scheme byte");
    b.scheme = static_cast<Scheme>(scheme);
    std::size_t off = 1;
    b.code = parse_code_params(body, off);
    need(body, off, 8 + 8, "store");
    b.s = read_u16_le(body, off);
    b.index = read_u16_le(body, off + 2);
    b.r = read_u16_le(body, off + 4);
    b.e = read_u16_le(body, off + 6);
    std::uint64_t plen = read_u64_le(body, off + 8);
    off += 16;
    if (plen > kMaxWireBody) throw std::runtime_error("store: payload too large");
    need(body, off, plen, "store");
    b.payload.assign(body.begin() + off, body.begin() + off + plen);
    if (off + plen != body.size())
        throw std::runtime_error("store: trailing bytes");
    if (b.s == 0 || b.index >= b.s)
        throw std::runtime_error("store: bad server index");
    return b;
}

std::vector<std::uint8_t> encode_challenge_body(std::uint16_t index,
                                                std::uint32_t beta) {
    std::vector<std::uint8_t> out;
    append_u16_le(out, index);
    append_u32_le(out, beta);
    return out;
}

void parse_challenge_body(std::span<const std::uint8_t> body,
                          std::uint16_t& index, std::uint32_t& beta) {
    if (body.size() != 6) throw std::runtime_error("challenge: bad body size");
    index = read_u16_le(body, 0);
    beta = read_u32_le(body, 2);
}

std::vector<std::uint8_t> encode_response_body(std::uint16_t index,
                                               std::uint64_t value,
                                               std::size_t width) {
    std::vector<std::uint8_t> out;
    append_u16_le(out, index);
    append_symbol_le(out, value, width);
    return out;
}

void parse_response_body(std::span<const std::uint8_t> body, std::size_t width,
                         std::uint16_t& index, std::uint64_t& value) {
    if (body.size() != 2 + width)
        throw std::runtime_error("response: bad body size");
    index = read_u16_le(body, 0);
    value = read_symbol_le(body.data() + 2, width);
}

std::vector<std::uint8_t> encode_index_body(std::uint16_t index) {
    std::vector<std::uint8_t> out;
    append_u16_le(out, index);
    return out;
}

std::uint16_t parse_index_body(std::span<const std::uint8_t> body) {
    if (body.size() != 2) throw std::runtime_error("frame: bad index body");
    return read_u16_le(body, 0);
}

std::vector<std::uint8_t> pack_shard_symbols(std::span<const std::uint64_t> symbols,
                                             std::uint64_t q) {
    std::size_t width = symbol_byte_width(q);
    std::vector<std::uint8_t> out;
    out.reserve(symbols.size() * width);
    for (std::uint64_t s : symbols) append_symbol_le(out, s, width);
    return out;
}

std::vector<std::uint64_t> unpack_shard_symbols(std::span<const std::uint8_t> bytes,
                                                std::uint64_t q) {
    std::size_t width = symbol_byte_width(q);
    if (width == 0 || bytes.size() % width != 0)
        throw std::runtime_error("shard payload: size not a symbol multiple");
    std::vector<std::uint64_t> out;
    out.reserve(bytes.size() / width);
    for (std::size_t off = 0; off < bytes.size(); off += width) {
        std::uint64_t v = read_symbol_le(bytes.data() + off, width);
        if (v >= q) throw std::runtime_error("shard payload: symbol out of range");
        out.push_back(v);
    }
    return out;
}

std::size_t wire_symbol_width(const CodeParams& code) {
    return symbol_byte_width(code.scheme == CodeScheme::RS ? code.q
                                                           : code.primes.back());
}

} // namespace sten
