#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <list>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "qcache/store.hpp"

namespace qcache {

/// Wire protocol. A client opens with the 4-byte magic "QCC1", then sends
/// frames [u8 opcode][u32 BE length][body]; every frame gets one response
/// [u8 status][u32 BE length][body].
namespace wire {
inline constexpr char kMagic[4] = {'Q', 'C', 'C', '1'};
enum class Op : std::uint8_t { Get = 1, PutNx = 2, Stats = 3, Dump = 4, Ping = 5 };
enum class Status : std::uint8_t { Ok = 0, NotFound = 1, AlreadyPresent = 2, Error = 3 };
/// Largest accepted frame body.
inline constexpr std::uint32_t kMaxFrame = 1u << 30;
}  // namespace wire

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// Threaded TCP server holding a MemoryStore.
///
///     GET    body: hash(16) u16 n_qubits u32 interior_spiders u8 kind
///            Ok + encoded entry, or NotFound
///     PUTNX  body: encoded entry              Ok (inserted) or AlreadyPresent
///     STATS  empty                            Ok + six u64 counters
///     DUMP   empty                            Ok + u64 count, then [u32 len][entry] sorted by hash
///     PING   empty                            Ok + "PONG"
///
/// One thread per connection. Contents live only as long as the server.
class StoreServer {
 public:
  /// Binds immediately; port 0 picks a free port.
  explicit StoreServer(Endpoint bind = {});
  ~StoreServer();
  StoreServer(const StoreServer&) = delete;
  StoreServer& operator=(const StoreServer&) = delete;

  std::uint16_t port() const { return port_; }
  /// Server-side counters across all clients.
  CacheStats stats() const { return table_.stats(); }
  MemoryStore& table() { return table_; }
  /// Stops accepting, closes every connection and joins the threads.
  void stop();

 private:
  void accept_loop();
  void serve(int fd);

  MemoryStore table_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex conn_mutex_;
  std::list<std::pair<int, std::thread>> connections_;
};

struct NetworkOptions {
  std::chrono::milliseconds timeout{10000};
};

/// Client handle. Connections are pooled and reused across threads; every
/// failure surfaces as a StoreError (ConnectionRefused, Timeout or Protocol),
/// never as a silent miss.
class NetworkedStore final : public Store {
 public:
  explicit NetworkedStore(Endpoint server, NetworkOptions options = {});
  ~NetworkedStore() override;
  NetworkedStore(const NetworkedStore&) = delete;
  NetworkedStore& operator=(const NetworkedStore&) = delete;

  /// "host:port"; throws std::invalid_argument.
  static Endpoint parse_address(const std::string& address);

  std::vector<CacheEntry> entries() override;
  std::string describe() const override;
  CacheStats server_stats();
  void ping();

 protected:
  std::optional<CacheEntry> lookup(const CacheKey& key) override;
  PutResult insert(const CacheEntry& entry) override;

 private:
  struct Response {
    wire::Status status;
    std::vector<std::uint8_t> body;
  };
  Response call(wire::Op op, const std::vector<std::uint8_t>& body);
  int acquire();
  void release(int fd);

  Endpoint server_;
  NetworkOptions options_;
  std::mutex pool_mutex_;
  std::vector<int> idle_;
};

}  // namespace qcache
