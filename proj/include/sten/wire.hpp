#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sten/codes.hpp"
#include "sten/protocol.hpp"

namespace sten {

// Framing: a 32-bit big-endian byte count of the body, one type byte, then
// the body. Plain stream sockets, no TLS; transport security is out of
// scope here.
enum class WireType : std::uint8_t {
    Store = 0x01,
    StoreAck = 0x02,
    Challenge = 0x03,
    Response = 0x04,
    NoResponseDeclared = 0x05,
    Error = 0x06,
};

struct WireMessage {
    WireType type = WireType::Error;
    std::vector<std::uint8_t> body;
};

constexpr std::size_t kMaxWireBody = 1u << 30;

std::vector<std::uint8_t> encode_frame(const WireMessage& m);
// Parses one frame from the front of `bytes`; sets `consumed`. Throws
// std::runtime_error on malformed input, returns nullopt when more bytes
// are needed.
std::optional<WireMessage> parse_frame(std::span<const std::uint8_t> bytes,
                                       std::size_t& consumed);

// STORE body: scheme byte, CodeParams block, s/index/r/e as 16-bit LE, then
// a 64-bit LE payload length and the shard payload (fixed-width symbols for
// the polynomial family, raw bytes for the residue family).
struct StoreBody {
    Scheme scheme = Scheme::Single;
    CodeParams code;
    std::uint16_t s = 1;
    std::uint16_t index = 0;
    std::uint16_t r = 0;
    std::uint16_t e = 0;
    std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_store_body(const StoreBody& b);
StoreBody parse_store_body(std::span<const std::uint8_t> body);

// CHALLENGE body: 16-bit LE server index, 32-bit LE challenge index.
std::vector<std::uint8_t> encode_challenge_body(std::uint16_t index,
                                                std::uint32_t beta);
void parse_challenge_body(std::span<const std::uint8_t> body,
                          std::uint16_t& index, std::uint32_t& beta);

// RESPONSE body: 16-bit LE server index, then the answering field element
// in fixed-width little-endian field serialization.
std::vector<std::uint8_t> encode_response_body(std::uint16_t index,
                                               std::uint64_t value,
                                               std::size_t width);
void parse_response_body(std::span<const std::uint8_t> body,
                         std::size_t width, std::uint16_t& index,
                         std::uint64_t& value);

std::vector<std::uint8_t> encode_index_body(std::uint16_t index);
std::uint16_t parse_index_body(std::span<const std::uint8_t> body);

// Shard payload helpers for STORE bodies.
std::vector<std::uint8_t> pack_shard_symbols(std::span<const std::uint64_t> symbols,
                                             std::uint64_t q);
std::vector<std::uint64_t> unpack_shard_symbols(std::span<const std::uint8_t> bytes,
                                                std::uint64_t q);

std::size_t wire_symbol_width(const CodeParams& code);

} // namespace sten
