#include "qcache/net_store.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "bytes.hpp"

namespace qcache {
namespace {

using wire::Op;
using wire::Status;

bool read_exact(int fd, std::uint8_t* buf, std::size_t n) {
  while (n > 0) {
    const ssize_t r = ::recv(fd, buf, n, 0);
    if (r == 0) return false;
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    buf += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

bool write_exact(int fd, const std::uint8_t* buf, std::size_t n) {
  while (n > 0) {
    const ssize_t r = ::send(fd, buf, n, MSG_NOSIGNAL);
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    buf += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

std::vector<std::uint8_t> frame(std::uint8_t tag, std::span<const std::uint8_t> body) {
  detail::ByteWriter w;
  w.u8(tag);
  w.u32(static_cast<std::uint32_t>(body.size()));
  w.bytes(body);
  return w.take();
}

std::vector<std::uint8_t> encode_key(const CacheKey& key) {
  detail::ByteWriter w;
  w.str(key.hash);
  w.u16(static_cast<std::uint16_t>(key.n_qubits));
  w.u32(static_cast<std::uint32_t>(key.interior_spiders));
  w.u8(static_cast<std::uint8_t>(key.payload_kind));
  return w.take();
}

CacheKey decode_key(std::span<const std::uint8_t> body) {
  detail::ByteReader r(body, "GET key");
  CacheKey key;
  key.hash = r.str(16);
  key.n_qubits = r.u16();
  key.interior_spiders = static_cast<int>(r.u32());
  const auto kind = r.u8();
  if (kind > 1 || r.remaining() != 0) throw StoreError(StoreError::Kind::Protocol, "GET key: malformed");
  key.payload_kind = static_cast<PayloadKind>(kind);
  return key;
}

std::vector<std::uint8_t> encode_stats(const CacheStats& s) {
  detail::ByteWriter w;
  for (auto v : {s.calls, s.hits, s.misses, s.stores, s.extra_simulations, s.unique_entries}) w.u64(v);
  return w.take();
}

CacheStats decode_stats(std::span<const std::uint8_t> body) {
  detail::ByteReader r(body, "STATS reply");
  CacheStats s;
  s.calls = r.u64();
  s.hits = r.u64();
  s.misses = r.u64();
  s.stores = r.u64();
  s.extra_simulations = r.u64();
  s.unique_entries = r.u64();
  return s;
}

void set_timeouts(int fd, std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

}  // namespace

// ---------------------------------------------------------------- server

StoreServer::StoreServer(Endpoint bind) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (listen_fd_ < 0) throw StoreError(StoreError::Kind::Io, std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(bind.port);
  if (::inet_pton(AF_INET, bind.host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw std::invalid_argument("bind address must be an IPv4 literal: " + bind.host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 64) != 0) {
    const std::string msg = std::strerror(errno);
    ::close(listen_fd_);
    throw StoreError(StoreError::Kind::Io, "bind " + bind.host + ":" + std::to_string(bind.port) + ": " + msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

StoreServer::~StoreServer() { stop(); }

void StoreServer::stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  std::list<std::pair<int, std::thread>> conns;
  {
    std::lock_guard lock(conn_mutex_);
    conns.swap(connections_);
  }
  for (auto& [fd, t] : conns) ::shutdown(fd, SHUT_RDWR);
  for (auto& [fd, t] : conns) {
    t.join();
    ::close(fd);
  }
}

void StoreServer::accept_loop() {
  while (!stopping_) {
    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      return;  // listening socket shut down
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    std::lock_guard lock(conn_mutex_);
    if (stopping_) {
      ::close(fd);
      return;
    }
    connections_.emplace_back(fd, std::thread([this, fd] { serve(fd); }));
  }
}

void StoreServer::serve(int fd) {
  std::uint8_t magic[4];
  if (!read_exact(fd, magic, 4) || std::memcmp(magic, wire::kMagic, 4) != 0) {
    ::shutdown(fd, SHUT_RDWR);
    return;
  }
  std::vector<std::uint8_t> body;
  for (;;) {
    std::uint8_t head[5];
    if (!read_exact(fd, head, 5)) return;
    const std::uint32_t len = (std::uint32_t{head[1]} << 24) | (std::uint32_t{head[2]} << 16) |
                              (std::uint32_t{head[3]} << 8) | std::uint32_t{head[4]};
    if (len > wire::kMaxFrame) return;
    body.resize(len);
    if (!read_exact(fd, body.data(), len)) return;

    Status status = Status::Ok;
    std::vector<std::uint8_t> reply;
    try {
      switch (static_cast<Op>(head[0])) {
        case Op::Get:
          if (auto e = table_.get(decode_key(body))) {
            reply = encode_entry(*e);
          } else {
            status = Status::NotFound;
          }
          break;
        case Op::PutNx:
          if (table_.put_if_absent(decode_entry(body)) == PutResult::AlreadyPresent) status = Status::AlreadyPresent;
          break;
        case Op::Stats: reply = encode_stats(table_.stats()); break;
        case Op::Dump: {
          detail::ByteWriter w;
          const auto all = table_.entries();
          w.u64(all.size());
          for (const auto& e : all) {
            const auto enc = encode_entry(e);
            w.u32(static_cast<std::uint32_t>(enc.size()));
            w.bytes(enc);
          }
          reply = w.take();
          break;
        }
        case Op::Ping: reply = {'P', 'O', 'N', 'G'}; break;
        default: throw StoreError(StoreError::Kind::Protocol, "unknown opcode " + std::to_string(head[0]));
      }
    } catch (const std::exception& ex) {
      status = Status::Error;
      const std::string msg = ex.what();
      reply.assign(msg.begin(), msg.end());
    }
    const auto out = frame(static_cast<std::uint8_t>(status), reply);
    if (!write_exact(fd, out.data(), out.size())) return;
  }
}

// ---------------------------------------------------------------- client

NetworkedStore::NetworkedStore(Endpoint server, NetworkOptions options)
    : server_(std::move(server)), options_(options) {}

NetworkedStore::~NetworkedStore() {
  for (int fd : idle_) ::close(fd);
}

Endpoint NetworkedStore::parse_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
    throw std::invalid_argument("address must be host:port, got '" + address + "'");
  }
  Endpoint ep;
  ep.host = address.substr(0, colon);
  std::size_t used = 0;
  int port = 0;
  try {
    port = std::stoi(address.substr(colon + 1), &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != address.size() - colon - 1 || port <= 0 || port > 65535) {
    throw std::invalid_argument("invalid port in '" + address + "'");
  }
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

std::string NetworkedStore::describe() const { return "networked:" + server_.host + ":" + std::to_string(server_.port); }

int NetworkedStore::acquire() {
  {
    std::lock_guard lock(pool_mutex_);
    if (!idle_.empty()) {
      const int fd = idle_.back();
      idle_.pop_back();
      return fd;
    }
  }
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(server_.port);
  if (const int rc = ::getaddrinfo(server_.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw StoreError(StoreError::Kind::ConnectionRefused,
                     "resolve " + server_.host + ": " + ::gai_strerror(rc));
  }
  const int fd = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    throw StoreError(StoreError::Kind::Io, std::string("socket: ") + std::strerror(errno));
  }
  set_timeouts(fd, options_.timeout);
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  const int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
  const int err = errno;
  ::freeaddrinfo(res);
  if (rc != 0) {
    ::close(fd);
    const auto kind = (err == EINPROGRESS || err == ETIMEDOUT || err == EAGAIN) ? StoreError::Kind::Timeout
                                                                               : StoreError::Kind::ConnectionRefused;
    throw StoreError(kind, "connect " + describe() + ": " + std::strerror(err));
  }
  if (!write_exact(fd, reinterpret_cast<const std::uint8_t*>(wire::kMagic), 4)) {
    ::close(fd);
    throw StoreError(StoreError::Kind::ConnectionRefused, "handshake with " + describe() + " failed");
  }
  return fd;
}

void NetworkedStore::release(int fd) {
  std::lock_guard lock(pool_mutex_);
  idle_.push_back(fd);
}

NetworkedStore::Response NetworkedStore::call(Op op, const std::vector<std::uint8_t>& body) {
  const int fd = acquire();
  auto fail = [&](const char* stage) -> StoreError {
    const int err = errno;
    ::close(fd);
    const bool timeout = err == EAGAIN || err == EWOULDBLOCK;
    return StoreError(timeout ? StoreError::Kind::Timeout : StoreError::Kind::ConnectionRefused,
                      std::string(stage) + " " + describe() + (timeout ? ": timed out" : ": connection lost"));
  };
  const auto out = frame(static_cast<std::uint8_t>(op), body);
  errno = 0;
  if (!write_exact(fd, out.data(), out.size())) throw fail("send to");
  std::uint8_t head[5];
  errno = 0;
  if (!read_exact(fd, head, 5)) throw fail("receive from");
  const std::uint32_t len = (std::uint32_t{head[1]} << 24) | (std::uint32_t{head[2]} << 16) |
                            (std::uint32_t{head[3]} << 8) | std::uint32_t{head[4]};
  if (head[0] > static_cast<std::uint8_t>(Status::Error) || len > wire::kMaxFrame) {
    ::close(fd);
    throw StoreError(StoreError::Kind::Protocol, "malformed response header from " + describe());
  }
  Response r{static_cast<Status>(head[0]), std::vector<std::uint8_t>(len)};
  errno = 0;
  if (!read_exact(fd, r.body.data(), len)) throw fail("receive from");
  release(fd);
  if (r.status == Status::Error) {
    throw StoreError(StoreError::Kind::Protocol, "server error: " + std::string(r.body.begin(), r.body.end()));
  }
  return r;
}

std::optional<CacheEntry> NetworkedStore::lookup(const CacheKey& key) {
  auto r = call(Op::Get, encode_key(key));
  if (r.status == Status::NotFound) return std::nullopt;
  if (r.status != Status::Ok) throw StoreError(StoreError::Kind::Protocol, "unexpected GET status");
  return decode_entry(r.body);
}

PutResult NetworkedStore::insert(const CacheEntry& entry) {
  auto r = call(Op::PutNx, encode_entry(entry));
  if (r.status == Status::Ok) return PutResult::Inserted;
  if (r.status == Status::AlreadyPresent) return PutResult::AlreadyPresent;
  throw StoreError(StoreError::Kind::Protocol, "unexpected PUTNX status");
}

std::vector<CacheEntry> NetworkedStore::entries() {
  auto r = call(Op::Dump, {});
  detail::ByteReader rd(r.body, "DUMP reply");
  const auto count = rd.u64();
  std::vector<CacheEntry> out;
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(decode_entry(rd.bytes(rd.u32())));
  return out;
}

CacheStats NetworkedStore::server_stats() { return decode_stats(call(Op::Stats, {}).body); }

void NetworkedStore::ping() {
  auto r = call(Op::Ping, {});
  if (r.status != Status::Ok || r.body != std::vector<std::uint8_t>{'P', 'O', 'N', 'G'}) {
    throw StoreError(StoreError::Kind::Protocol, "bad PING reply from " + describe());
  }
}

}  // namespace qcache
