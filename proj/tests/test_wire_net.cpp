#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "sten/codes.hpp"
#include "sten/field.hpp"
#include "sten/net.hpp"
#include "sten/protocol.hpp"
#include "sten/rng.hpp"
#include "sten/wire.hpp"

using namespace sten;

namespace {

CodeParams rs_code(std::uint32_t k, std::uint32_t n, std::uint64_t q) {
    CodeParams p;
    p.scheme = CodeScheme::RS;
    p.k = k;
    p.n = n;
    p.q = q;
    p.d = n - k + 1;
    return p;
}

std::vector<std::uint8_t> random_bytes(std::size_t len, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<std::uint8_t> out(len);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng.next());
    return out;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        char tmpl[] = "/tmp/sten-test-XXXXXX";
        const char* p = mkdtemp(tmpl);
        REQUIRE(p != nullptr);
        path = p;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

} // namespace

TEST_CASE("frames: fuzzed round-trips are identity") {
    SplitMix64 rng(1001);
    for (int trial = 0; trial < 1000; ++trial) {
        WireMessage m;
        m.type = static_cast<WireType>(1 + rng.uniform_below(6));
        m.body = random_bytes(rng.uniform_below(200), rng.next());
        auto wire = encode_frame(m);
        REQUIRE(wire.size() == 5 + m.body.size());
        std::size_t consumed = 0;
        auto back = parse_frame(wire, consumed);
        REQUIRE(back.has_value());
        CHECK(consumed == wire.size());
        CHECK(back->type == m.type);
        CHECK(back->body == m.body);
    }
}

TEST_CASE("frames: incremental delivery and back-to-back messages") {
    WireMessage a{WireType::Challenge, encode_challenge_body(1, 9)};
    WireMessage b{WireType::StoreAck, encode_index_body(1)};
    auto wa = encode_frame(a);
    auto wb = encode_frame(b);

    // One byte at a time: nullopt until the whole frame has arrived.
    for (std::size_t have = 0; have < wa.size(); ++have) {
        std::size_t consumed = 99;
        auto got = parse_frame({wa.data(), have}, consumed);
        CHECK_FALSE(got.has_value());
        CHECK(consumed == 0);
    }

    std::vector<std::uint8_t> stream = wa;
    stream.insert(stream.end(), wb.begin(), wb.end());
    std::size_t consumed = 0;
    auto first = parse_frame(stream, consumed);
    REQUIRE(first.has_value());
    CHECK(first->type == WireType::Challenge);
    CHECK(consumed == wa.size());
    auto second =
        parse_frame({stream.data() + consumed, stream.size() - consumed},
                    consumed);
    REQUIRE(second.has_value());
    CHECK(second->type == WireType::StoreAck);
    CHECK(second->body == b.body);
}

TEST_CASE("frames: malformed headers are rejected") {
    // Unknown type byte.
    std::vector<std::uint8_t> bad_type{0, 0, 0, 0, 0x07};
    std::size_t consumed = 0;
    CHECK_THROWS_AS(parse_frame(bad_type, consumed), std::runtime_error);
    bad_type[4] = 0x00;
    CHECK_THROWS_AS(parse_frame(bad_type, consumed), std::runtime_error);

    // Declared body over the 2^30 cap: 0x40000001 big-endian.
    std::vector<std::uint8_t> oversize{0x40, 0x00, 0x00, 0x01, 0x01};
    CHECK_THROWS_AS(parse_frame(oversize, consumed), std::runtime_error);

    WireMessage big;
    big.type = WireType::Store;
    big.body.resize(kMaxWireBody + 1);
    CHECK_THROWS_AS(encode_frame(big), std::invalid_argument);
}

TEST_CASE("store body: round-trip for both code families") {
    SplitMix64 rng(2002);
    auto code = rs_code(8, 16, 17);
    for (int trial = 0; trial < 200; ++trial) {
        StoreBody b;
        b.scheme = static_cast<Scheme>(1 + rng.uniform_below(4));
        b.code = code;
        b.s = static_cast<std::uint16_t>(1 + rng.uniform_below(8));
        b.index = static_cast<std::uint16_t>(rng.uniform_below(b.s));
        if (b.scheme == Scheme::RsParity) {
            b.r = static_cast<std::uint16_t>(rng.uniform_below(3));
            b.e = static_cast<std::uint16_t>(rng.uniform_below(3));
        }
        b.payload = random_bytes(rng.uniform_below(64), rng.next());
        auto bytes = encode_store_body(b);
        StoreBody back = parse_store_body(bytes);
        CHECK(back.scheme == b.scheme);
        CHECK(back.code.k == b.code.k);
        CHECK(back.code.n == b.code.n);
        CHECK(back.code.q == b.code.q);
        CHECK(back.s == b.s);
        CHECK(back.index == b.index);
        CHECK(back.r == b.r);
        CHECK(back.e == b.e);
        CHECK(back.payload == b.payload);
        CHECK(encode_store_body(back) == bytes);
    }

    StoreBody c;
    c.scheme = Scheme::Single;
    c.code = choose_params(4, 0.5, CodeScheme::CRT);
    c.payload = random_bytes(10, 5);
    auto bytes = encode_store_body(c);
    StoreBody back = parse_store_body(bytes);
    CHECK(back.code.scheme == CodeScheme::CRT);
    CHECK(back.code.primes == c.code.primes);
    CHECK(back.payload == c.payload);
}

TEST_CASE("store body: malformed inputs are rejected") {
    StoreBody b;
    b.scheme = Scheme::Trivial;
    b.code = rs_code(8, 16, 17);
    b.s = 4;
    b.index = 2;
    b.payload = random_bytes(16, 6);
    auto good = encode_store_body(b);

    auto tampered = good;
    tampered.push_back(0); // trailing
    CHECK_THROWS_AS(parse_store_body(tampered), std::runtime_error);

    tampered = good;
    tampered.pop_back(); // truncated payload
    CHECK_THROWS_AS(parse_store_body(tampered), std::runtime_error);

    tampered = good;
    tampered[0] = 0x05; // scheme byte
    CHECK_THROWS_AS(parse_store_body(tampered), std::runtime_error);

    // s = 0 (offset: scheme byte + code block).
    tampered = good;
    tampered[1 + kCodeParamsWireSize] = 0;
    tampered[1 + kCodeParamsWireSize + 1] = 0;
    CHECK_THROWS_AS(parse_store_body(tampered), std::runtime_error);

    // index >= s.
    tampered = good;
    tampered[1 + kCodeParamsWireSize + 2] = 9;
    CHECK_THROWS_AS(parse_store_body(tampered), std::runtime_error);

    // Declared payload length beyond the cap.
    tampered = good;
    std::size_t len_off = 1 + kCodeParamsWireSize + 8;
    for (int i = 0; i < 8; ++i) tampered[len_off + i] = 0;
    tampered[len_off + 3] = 0x40; // 2^30 in LE
    tampered[len_off] = 0x01;
    CHECK_THROWS_AS(parse_store_body(tampered), std::runtime_error);

    CHECK_THROWS_AS(parse_store_body(std::vector<std::uint8_t>{}),
                    std::runtime_error);
}

TEST_CASE("challenge / response / index bodies") {
    auto cb = encode_challenge_body(65535, 0xdeadbeef);
    std::uint16_t index = 0;
    std::uint32_t beta = 0;
    parse_challenge_body(cb, index, beta);
    CHECK(index == 65535);
    CHECK(beta == 0xdeadbeef);
    cb.push_back(0);
    CHECK_THROWS_AS(parse_challenge_body(cb, index, beta), std::runtime_error);

    for (std::size_t width : {1u, 2u, 4u, 8u}) {
        std::uint64_t value = width == 8 ? 0x1234567890abcdefULL
                                         : (1ULL << (8 * width)) - 3;
        auto rb = encode_response_body(7, value, width);
        REQUIRE(rb.size() == 2 + width);
        std::uint64_t got = 0;
        parse_response_body(rb, width, index, got);
        CHECK(index == 7);
        CHECK(got == value);
        CHECK_THROWS_AS(parse_response_body(rb, width + 1, index, got),
                        std::runtime_error);
    }

    auto ib = encode_index_body(513);
    CHECK(parse_index_body(ib) == 513);
    ib.push_back(0);
    CHECK_THROWS_AS(parse_index_body(ib), std::runtime_error);
}

TEST_CASE("shard symbol packing: round-trip and validation") {
    SplitMix64 rng(3003);
    for (std::uint64_t q : {17ull, 257ull, 2147483647ull}) {
        std::vector<std::uint64_t> symbols(32);
        for (auto& s : symbols) s = rng.uniform_below(q);
        auto packed = pack_shard_symbols(symbols, q);
        CHECK(packed.size() == symbols.size() * symbol_byte_width(q));
        CHECK(unpack_shard_symbols(packed, q) == symbols);
    }

    // Size must be a whole number of symbols.
    std::vector<std::uint8_t> odd(3, 0);
    CHECK_THROWS_AS(unpack_shard_symbols(odd, 257), std::runtime_error);
    // Symbols must be field elements.
    std::vector<std::uint8_t> too_big{0x11}; // 17 >= q
    CHECK_THROWS_AS(unpack_shard_symbols(too_big, 17), std::runtime_error);

    CHECK(wire_symbol_width(rs_code(4, 16, 17)) == 1);
    CHECK(wire_symbol_width(rs_code(4, 256, 257)) == 2);
    auto crt = choose_params(4, 0.5, CodeScheme::CRT);
    CHECK(wire_symbol_width(crt) == symbol_byte_width(crt.primes.back()));
}

TEST_CASE("endpoints: parsing shapes and failures") {
    auto ep = parse_endpoint("10.0.0.5:7001");
    CHECK(ep.host == "10.0.0.5");
    CHECK(ep.port == 7001);
    CHECK(parse_endpoint(":7001").host == "127.0.0.1");
    CHECK(parse_endpoint("7001").host == "127.0.0.1");
    CHECK(parse_endpoint("7001").port == 7001);

    CHECK_THROWS_AS(parse_endpoint("host:"), std::invalid_argument);
    CHECK_THROWS_AS(parse_endpoint("host:abc"), std::invalid_argument);
    CHECK_THROWS_AS(parse_endpoint("host:0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_endpoint("host:70000"), std::invalid_argument);
    CHECK_THROWS_AS(parse_endpoint(""), std::invalid_argument);

    auto eps = parse_endpoints("127.0.0.1:1,127.0.0.1:2");
    REQUIRE(eps.size() == 2);
    CHECK(eps[1].port == 2);
    CHECK_THROWS_AS(parse_endpoints(","), std::invalid_argument);
}

TEST_CASE("answer_from_store: agrees with honest_shard_response everywhere") {
    auto code = rs_code(8, 16, 17);
    auto bytes = random_bytes(4, 4004);
    struct Case {
        Scheme scheme;
        std::uint16_t s, r, e;
    };
    for (Case c : {Case{Scheme::Single, 1, 0, 0}, Case{Scheme::Trivial, 4, 0, 0},
                   Case{Scheme::Linear, 2, 0, 0},
                   Case{Scheme::RsParity, 4, 1, 1}}) {
        Message x = message_from_bytes_rs(bytes, 17, 8, c.s);
        auto shard_code =
            c.scheme == Scheme::Trivial ? rs_code(8 / c.s, 16, 17) : code;
        auto bodies = store_bodies(x, shard_code, c.scheme, c.r, c.e);
        REQUIRE(bodies.size() == c.s);
        for (std::uint16_t i = 0; i < c.s; ++i) {
            CHECK(bodies[i].index == i);
            for (std::uint32_t beta = 0; beta < shard_code.n; ++beta)
                CHECK(answer_from_store(bodies[i], beta) ==
                      honest_shard_response(x, i, beta, shard_code, c.scheme));
        }
    }

    // Residue family, single and trivial.
    auto data = random_bytes(6, 4005);
    for (std::uint16_t s : {1, 2}) {
        Message x = message_from_bytes_crt(data, s);
        auto crt = choose_params(
            s == 1 ? x.k : crt_primes_needed(x.shard_byte_len()), 0.5,
            CodeScheme::CRT);
        auto scheme = s == 1 ? Scheme::Single : Scheme::Trivial;
        auto bodies = store_bodies(x, crt, scheme, 0, 0);
        for (std::uint16_t i = 0; i < s; ++i)
            for (std::uint32_t beta = 0; beta < crt.n; ++beta)
                CHECK(answer_from_store(bodies[i], beta) ==
                      honest_shard_response(x, i, beta, crt, scheme));
    }

    // Challenges outside the code are refused, stored length is validated.
    Message x = message_from_bytes_rs(bytes, 17, 8, 1);
    auto bodies = store_bodies(x, code, Scheme::Single, 0, 0);
    CHECK_THROWS_AS(answer_from_store(bodies[0], 16), std::runtime_error);
    auto short_body = bodies[0];
    short_body.payload.pop_back();
    CHECK_THROWS_AS(answer_from_store(short_body, 0), std::runtime_error);
}

TEST_CASE("audit server: store, challenge, restart, errors") {
    TempDir dir;
    ServerConfig cfg;
    cfg.storage_dir = dir.path.string();
    AuditServer server(cfg);
    server.start();
    REQUIRE(server.port() != 0);
    Endpoint ep{"127.0.0.1", server.port()};

    auto code = rs_code(8, 16, 17);
    Message x = message_from_bytes_rs(random_bytes(4, 5005), 17, 8, 2);
    auto bodies = store_bodies(x, code, Scheme::Linear, 0, 0);

    // Challenge before anything is stored: the server reports an error.
    auto miss = rpc_challenge(ep, 0, 3, wire_symbol_width(code), 2000);
    CHECK(miss.status == ClientResult::Status::ProtocolError);

    for (const auto& b : bodies) {
        auto ack = rpc_store(ep, b, 2000);
        REQUIRE(ack.status == ClientResult::Status::Ok);
    }
    for (std::uint16_t i = 0; i < 2; ++i) {
        for (std::uint32_t beta : {0u, 3u, 15u}) {
            auto got = rpc_challenge(ep, i, beta, wire_symbol_width(code), 2000);
            REQUIRE(got.status == ClientResult::Status::Ok);
            CHECK(got.value ==
                  honest_shard_response(x, i, beta, code, Scheme::Linear));
        }
    }

    // Challenge for a shard index this server never received.
    auto wrong = rpc_challenge(ep, 5, 3, wire_symbol_width(code), 2000);
    CHECK(wrong.status == ClientResult::Status::ProtocolError);
    // Challenge index outside the code.
    auto oob = rpc_challenge(ep, 0, 99, wire_symbol_width(code), 2000);
    CHECK(oob.status == ClientResult::Status::ProtocolError);

    // Shards survive a restart: they live in files, not process memory.
    std::uint16_t old_port = server.port();
    server.stop();
    AuditServer reborn(cfg);
    reborn.start();
    Endpoint ep2{"127.0.0.1", reborn.port()};
    auto again = rpc_challenge(ep2, 1, 7, wire_symbol_width(code), 2000);
    REQUIRE(again.status == ClientResult::Status::Ok);
    CHECK(again.value == honest_shard_response(x, 1, 7, code, Scheme::Linear));
    reborn.stop();

    // Nothing listens on the old port anymore.
    auto dead = rpc_challenge({"127.0.0.1", old_port}, 0, 3,
                              wire_symbol_width(code), 500);
    CHECK(dead.status == ClientResult::Status::NoResponse);
}

TEST_CASE("audit server: declared silence and concurrent clients") {
    TempDir dir;
    ServerConfig cfg;
    cfg.storage_dir = dir.path.string();
    cfg.silent = true;
    AuditServer mute(cfg);
    mute.start();
    auto code = rs_code(8, 16, 17);
    Message x = message_from_bytes_rs(random_bytes(4, 6006), 17, 8, 1);
    auto bodies = store_bodies(x, code, Scheme::Single, 0, 0);
    Endpoint ep{"127.0.0.1", mute.port()};
    // Stores are still accepted; only challenges meet silence.
    CHECK(rpc_store(ep, bodies[0], 2000).status == ClientResult::Status::Ok);
    auto got = rpc_challenge(ep, 0, 3, wire_symbol_width(code), 2000);
    CHECK(got.status == ClientResult::Status::NoResponse);
    CHECK(got.detail == "declared");
    mute.stop();

    TempDir dir2;
    ServerConfig cfg2;
    cfg2.storage_dir = dir2.path.string();
    AuditServer server(cfg2);
    server.start();
    Endpoint ep2{"127.0.0.1", server.port()};
    CHECK(rpc_store(ep2, bodies[0], 2000).status == ClientResult::Status::Ok);

    std::vector<std::thread> clients;
    std::vector<int> ok(8, 0);
    for (int t = 0; t < 8; ++t) {
        clients.emplace_back([&, t] {
            std::uint32_t beta = static_cast<std::uint32_t>(t * 2);
            auto r = rpc_challenge(ep2, 0, beta, wire_symbol_width(code), 3000);
            if (r.status == ClientResult::Status::Ok &&
                r.value == honest_shard_response(x, 0, beta, code, Scheme::Single))
                ok[t] = 1;
        });
    }
    for (auto& c : clients) c.join();
    for (int t = 0; t < 8; ++t) CHECK(ok[t] == 1);
}

TEST_CASE("client: a peer that accepts but never replies is a timeout") {
    int fd = socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    REQUIRE(bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    REQUIRE(listen(fd, 1) == 0);
    socklen_t len = sizeof(addr);
    REQUIRE(getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0);
    Endpoint ep{"127.0.0.1", ntohs(addr.sin_port)};

    auto r = rpc_challenge(ep, 0, 0, 1, 300);
    CHECK(r.status == ClientResult::Status::NoResponse);
    close(fd);
}
