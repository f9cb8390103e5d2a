#include "sten/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "sten/bignat.hpp"
#include "sten/field.hpp"

namespace sten {

namespace {

void set_recv_timeout(int fd, int ms) {
    timeval tv{};
    tv.tv_sec = ms / 1000;
    tv.tv_usec = (ms % 1000) * 1000;
    setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

bool send_all(int fd, const std::uint8_t* data, std::size_t len) {
    std::size_t sent = 0;
    while (sent < len) {
        ssize_t w = send(fd, data + sent, len - sent, MSG_NOSIGNAL);
        if (w <= 0) {
            if (w < 0 && errno == EINTR) continue;
            return false;
        }
        sent += static_cast<std::size_t>(w);
    }
    return true;
}

bool send_frame(int fd, WireType type, std::vector<std::uint8_t> body) {
    WireMessage m{type, std::move(body)};
    auto bytes = encode_frame(m);
    return send_all(fd, bytes.data(), bytes.size());
}

enum class RecvStatus { Frame, Eof, Timeout };

// Reads until one full frame is buffered. Throws std::runtime_error on
// malformed input.
RecvStatus recv_frame(int fd, std::vector<std::uint8_t>& buf, WireMessage& out) {
    for (;;) {
        std::size_t consumed = 0;
        if (auto m = parse_frame(buf, consumed)) {
            buf.erase(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(consumed));
            out = std::move(*m);
            return RecvStatus::Frame;
        }
        std::uint8_t chunk[4096];
        ssize_t r = recv(fd, chunk, sizeof(chunk), 0);
        if (r < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK) return RecvStatus::Timeout;
            return RecvStatus::Eof;
        }
        if (r == 0) return RecvStatus::Eof;
        buf.insert(buf.end(), chunk, chunk + r);
    }
}

std::vector<std::uint8_t> error_body(const std::string& text) {
    return {text.begin(), text.end()};
}

} // namespace

Endpoint parse_endpoint(const std::string& text) {
    Endpoint ep;
    auto colon = text.rfind(':');
    std::string port_part;
    if (colon == std::string::npos) {
        ep.host = "127.0.0.1";
        port_part = text;
    } else {
        ep.host = colon == 0 ? std::string("127.0.0.1") : text.substr(0, colon);
        port_part = text.substr(colon + 1);
    }
    if (port_part.empty())
        throw std::invalid_argument("endpoint: missing port in '" + text + "'");
    unsigned long v = 0;
    std::size_t pos = 0;
    try {
        v = std::stoul(port_part, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("endpoint: bad port in '" + text + "'");
    }
    if (pos != port_part.size() || v == 0 || v > 65535)
        throw std::invalid_argument("endpoint: bad port in '" + text + "'");
    ep.port = static_cast<std::uint16_t>(v);
    return ep;
}

std::vector<Endpoint> parse_endpoints(const std::string& text) {
    std::vector<Endpoint> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        auto piece = text.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!piece.empty()) out.push_back(parse_endpoint(piece));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("endpoint list is empty");
    return out;
}

std::uint64_t answer_from_store(const StoreBody& stored, std::uint32_t beta) {
    if (beta >= stored.code.n)
        throw std::runtime_error("challenge index out of range");
    if (stored.code.scheme == CodeScheme::RS) {
        auto symbols = unpack_shard_symbols(stored.payload, stored.code.q);
        std::size_t expected = stored.code.k;
        std::uint64_t offset = 0;
        if (stored.scheme == Scheme::Linear || stored.scheme == Scheme::RsParity) {
            expected = stored.code.k / stored.s;
            offset = static_cast<std::uint64_t>(stored.index) * expected;
        }
        if (symbols.size() != expected)
            throw std::runtime_error("stored shard has wrong length");
        PrimeField f(stored.code.q);
        return rs_eval_span(symbols, beta, offset, f);
    }
    BigNat v = BigNat::from_be_bytes(stored.payload);
    return v.mod_u64(stored.code.primes.at(beta));
}

std::vector<StoreBody> store_bodies(const Message& x, const CodeParams& code,
                                    Scheme scheme, std::uint16_t r,
                                    std::uint16_t e) {
    std::vector<StoreBody> out;
    std::uint16_t s = scheme == Scheme::Single ? std::uint16_t{1} : x.s;
    for (std::uint16_t i = 0; i < s; ++i) {
        StoreBody b;
        b.scheme = scheme;
        b.code = code;
        b.s = s;
        b.index = i;
        b.r = scheme == Scheme::RsParity ? r : std::uint16_t{0};
        b.e = scheme == Scheme::RsParity ? e : std::uint16_t{0};
        if (x.scheme == CodeScheme::RS) {
            auto span = scheme == Scheme::Single
                            ? std::span<const std::uint64_t>(x.symbols)
                            : x.shard(i);
            b.payload = pack_shard_symbols(span, code.q);
        } else {
            if (scheme == Scheme::Single) {
                b.payload = x.bytes;
            } else {
                auto len = x.shard_byte_len();
                b.payload.assign(x.bytes.begin() + std::size_t{i} * len,
                                 x.bytes.begin() + (std::size_t{i} + 1) * len);
            }
        }
        out.push_back(std::move(b));
    }
    return out;
}

AuditServer::AuditServer(ServerConfig config) : config_(std::move(config)) {}

AuditServer::~AuditServer() { stop(); }

std::string AuditServer::shard_path(std::uint16_t index) const {
    return config_.storage_dir + "/shard_" + std::to_string(index) + ".bin";
}

void AuditServer::start() {
    if (running_.load()) return;
    if (config_.storage_dir.empty())
        throw std::runtime_error("server: storage directory not set");
    std::filesystem::create_directories(config_.storage_dir);

    listen_fd_ = socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw std::runtime_error("server: socket() failed");
    int one = 1;
    setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(config_.port);
    if (inet_pton(AF_INET, config_.host.c_str(), &addr.sin_addr) != 1) {
        close(listen_fd_);
        listen_fd_ = -1;
        throw std::runtime_error("server: bad listen address " + config_.host);
    }
    if (bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
        listen(listen_fd_, 16) < 0) {
        int err = errno;
        close(listen_fd_);
        listen_fd_ = -1;
        throw std::runtime_error(std::string("server: bind/listen failed: ") +
                                 std::strerror(err));
    }
    socklen_t alen = sizeof(addr);
    getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &alen);
    bound_port_ = ntohs(addr.sin_port);

    running_.store(true);
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void AuditServer::stop() {
    if (!running_.exchange(false)) {
        if (accept_thread_.joinable()) accept_thread_.join();
        return;
    }
    if (listen_fd_ >= 0) {
        shutdown(listen_fd_, SHUT_RDWR);
        close(listen_fd_);
        listen_fd_ = -1;
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    std::vector<std::thread> workers;
    {
        std::lock_guard<std::mutex> lock(workers_mutex_);
        workers.swap(workers_);
    }
    for (auto& w : workers)
        if (w.joinable()) w.join();
}

void AuditServer::accept_loop() {
    while (running_.load()) {
        int fd = accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            break; // listener closed by stop()
        }
        // Bounded read timeout so stop() never waits on an idle connection.
        set_recv_timeout(fd, 250);
        std::lock_guard<std::mutex> lock(workers_mutex_);
        workers_.emplace_back([this, fd] { handle_connection(fd); });
    }
}

void AuditServer::handle_connection(int fd) {
    std::vector<std::uint8_t> buf;
    while (running_.load()) {
        WireMessage msg;
        RecvStatus st;
        try {
            st = recv_frame(fd, buf, msg);
        } catch (const std::exception& ex) {
            send_frame(fd, WireType::Error, error_body(ex.what()));
            break;
        }
        if (st == RecvStatus::Timeout) continue; // re-check running_
        if (st == RecvStatus::Eof) break;
        try {
            if (msg.type == WireType::Store) {
                StoreBody body = parse_store_body(msg.body);
                {
                    std::lock_guard<std::mutex> lock(store_mutex_);
                    auto path = shard_path(body.index);
                    auto tmp = path + ".tmp";
                    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                    out.write(reinterpret_cast<const char*>(msg.body.data()),
                              static_cast<std::streamsize>(msg.body.size()));
                    out.close();
                    if (!out || std::rename(tmp.c_str(), path.c_str()) != 0)
                        throw std::runtime_error("store: persist failed");
                }
                send_frame(fd, WireType::StoreAck, encode_index_body(body.index));
            } else if (msg.type == WireType::Challenge) {
                std::uint16_t index = 0;
                std::uint32_t beta = 0;
                parse_challenge_body(msg.body, index, beta);
                if (config_.silent) {
                    send_frame(fd, WireType::NoResponseDeclared,
                               encode_index_body(index));
                    continue;
                }
                std::vector<std::uint8_t> raw;
                {
                    std::lock_guard<std::mutex> lock(store_mutex_);
                    std::ifstream in(shard_path(index), std::ios::binary);
                    if (!in) throw std::runtime_error("not stored");
                    raw.assign(std::istreambuf_iterator<char>(in),
                               std::istreambuf_iterator<char>());
                }
                StoreBody stored = parse_store_body(raw);
                std::uint64_t a = answer_from_store(stored, beta);
                send_frame(fd, WireType::Response,
                           encode_response_body(index, a,
                                                wire_symbol_width(stored.code)));
            } else {
                send_frame(fd, WireType::Error,
                           error_body("unexpected message type"));
            }
        } catch (const std::exception& ex) {
            send_frame(fd, WireType::Error, error_body(ex.what()));
            break;
        }
    }
    close(fd);
}

namespace {

int connect_to(const Endpoint& ep, int timeout_ms, std::string& detail) {
    int fd = socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) {
        detail = "socket() failed";
        return -1;
    }
    set_recv_timeout(fd, timeout_ms);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(ep.port);
    if (inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) != 1) {
        detail = "bad address " + ep.host;
        close(fd);
        return -1;
    }
    if (connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
        detail = std::string("connect: ") + std::strerror(errno);
        close(fd);
        return -1;
    }
    return fd;
}

// Connect, send one frame, read one reply. On Ok, `reply` holds the raw
// server message for the caller to decode.
ClientResult roundtrip(const Endpoint& ep, WireType type,
                       std::vector<std::uint8_t> body, int timeout_ms,
                       WireMessage& reply) {
    ClientResult res;
    int fd = connect_to(ep, timeout_ms, res.detail);
    if (fd < 0) {
        res.status = ClientResult::Status::NoResponse;
        return res;
    }
    if (!send_frame(fd, type, std::move(body))) {
        res.status = ClientResult::Status::NoResponse;
        res.detail = "send failed";
        close(fd);
        return res;
    }
    std::vector<std::uint8_t> buf;
    WireMessage got;
    RecvStatus st;
    try {
        st = recv_frame(fd, buf, got);
    } catch (const std::exception& ex) {
        res.status = ClientResult::Status::ProtocolError;
        res.detail = ex.what();
        close(fd);
        return res;
    }
    close(fd);
    if (st != RecvStatus::Frame) {
        res.status = ClientResult::Status::NoResponse;
        res.detail = st == RecvStatus::Timeout ? "timeout" : "connection closed";
        return res;
    }
    if (got.type == WireType::Error) {
        res.status = ClientResult::Status::ProtocolError;
        res.detail.assign(got.body.begin(), got.body.end());
        return res;
    }
    if (got.type == WireType::NoResponseDeclared) {
        res.status = ClientResult::Status::NoResponse;
        res.detail = "declared";
        return res;
    }
    reply = std::move(got);
    res.status = ClientResult::Status::Ok;
    return res;
}

} // namespace

ClientResult rpc_store(const Endpoint& ep, const StoreBody& body,
                       int timeout_ms) {
    WireMessage reply;
    auto res = roundtrip(ep, WireType::Store, encode_store_body(body),
                         timeout_ms, reply);
    if (res.status != ClientResult::Status::Ok) return res;
    try {
        if (reply.type != WireType::StoreAck)
            throw std::runtime_error("unexpected reply type");
        if (parse_index_body(reply.body) != body.index)
            throw std::runtime_error("ack for wrong shard");
    } catch (const std::exception& ex) {
        res.status = ClientResult::Status::ProtocolError;
        res.detail = ex.what();
    }
    return res;
}

ClientResult rpc_challenge(const Endpoint& ep, std::uint16_t index,
                           std::uint32_t beta, std::size_t symbol_width,
                           int timeout_ms) {
    WireMessage reply;
    auto res = roundtrip(ep, WireType::Challenge,
                         encode_challenge_body(index, beta), timeout_ms, reply);
    if (res.status != ClientResult::Status::Ok) return res;
    try {
        if (reply.type != WireType::Response)
            throw std::runtime_error("unexpected reply type");
        std::uint16_t got_index = 0;
        std::uint64_t value = 0;
        parse_response_body(reply.body, symbol_width, got_index, value);
        if (got_index != index)
            throw std::runtime_error("response for wrong shard");
        res.value = value;
    } catch (const std::exception& ex) {
        res.status = ClientResult::Status::ProtocolError;
        res.detail = ex.what();
    }
    return res;
}

} // namespace sten
