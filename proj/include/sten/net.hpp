#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sten/protocol.hpp"
#include "sten/wire.hpp"

namespace sten {

struct Endpoint {
    std::string host;
    std::uint16_t port = 0;
};

// "host:port" (host may be omitted: ":7001" and "7001" mean 127.0.0.1).
Endpoint parse_endpoint(const std::string& text);
// Comma-separated list, one endpoint per shard, in shard order.
std::vector<Endpoint> parse_endpoints(const std::string& text);

// What a correct server holding only the STORE body can answer for beta.
// Shared by the in-process service and anything replaying stored shards.
std::uint64_t answer_from_store(const StoreBody& stored, std::uint32_t beta);

struct ServerConfig {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0; // 0 = ephemeral, read back via port()
    std::string storage_dir;
    bool silent = false; // declare NO_RESPONSE to every challenge
};

// One-protocol storage server: STORE persists the body under the shard
// index, CHALLENGE answers from the persisted shard. One thread per
// connection; the only shared state is the storage directory (last
// write wins on re-STORE, guarded by a directory-wide mutex).
class AuditServer {
  public:
    explicit AuditServer(ServerConfig config);
    ~AuditServer();

    AuditServer(const AuditServer&) = delete;
    AuditServer& operator=(const AuditServer&) = delete;

    void start(); // throws std::runtime_error on bind/listen failure
    void stop();  // idempotent

    std::uint16_t port() const { return bound_port_; }

  private:
    void accept_loop();
    void handle_connection(int fd);
    std::string shard_path(std::uint16_t index) const;

    ServerConfig config_;
    int listen_fd_ = -1;
    std::uint16_t bound_port_ = 0;
    std::atomic<bool> running_{false};
    std::thread accept_thread_;
    std::mutex store_mutex_;
    std::mutex workers_mutex_;
    std::vector<std::thread> workers_;
};

// --- Client side ---

struct ClientResult {
    enum class Status : std::uint8_t {
        Ok,            // RESPONSE received
        NoResponse,    // NO_RESPONSE_DECLARED, timeout, or connect failure
        ProtocolError, // ERROR frame or malformed reply
    };
    Status status = Status::NoResponse;
    std::uint64_t value = 0;  // Ok only
    std::string detail;       // human-readable cause for the other two
};

// One connect / one request / one reply, with a receive deadline.
// Connection-level failures come back as status codes, not exceptions:
// the audit schemes decide what silence means.
ClientResult rpc_store(const Endpoint& ep, const StoreBody& body,
                       int timeout_ms);
ClientResult rpc_challenge(const Endpoint& ep, std::uint16_t index,
                           std::uint32_t beta, std::size_t symbol_width,
                           int timeout_ms);

constexpr int kDefaultTimeoutMs = 5000;

// STORE bodies for every shard of x under the given audit scheme, in
// shard-index order. Ready to push to endpoints or persist locally.
std::vector<StoreBody> store_bodies(const Message& x, const CodeParams& code,
                                    Scheme scheme, std::uint16_t r,
                                    std::uint16_t e);

} // namespace sten
