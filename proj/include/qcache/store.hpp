#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcache/identity.hpp"
#include "qcache/sim.hpp"

namespace qcache {

/// One cached result. The payload is raw bytes: a serialized statevector for
/// PayloadKind::Full, a single little-endian double for PayloadKind::Compact.
struct CacheEntry {
  CacheKey key;
  std::vector<std::uint8_t> payload;
  std::string backend_tag;
  std::optional<std::int64_t> shots;
  std::int64_t created_at = 0;  // unix seconds

  static CacheEntry full(const CacheKey& key, const Statevector& sv, std::string backend_tag = "statevector");
  static CacheEntry compact(const CacheKey& key, double expectation, std::string backend_tag = "statevector");

  Statevector statevector() const;
  double expectation() const;

  /// Throws std::invalid_argument if the payload does not fit the key.
  void validate() const;

  bool operator==(const CacheEntry&) const = default;
};

struct CacheStats {
  std::uint64_t calls = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t stores = 0;
  std::uint64_t extra_simulations = 0;
  std::uint64_t unique_entries = 0;

  bool operator==(const CacheStats&) const = default;
};

enum class PutResult { Inserted, AlreadyPresent };

class StoreError : public std::runtime_error {
 public:
  enum class Kind { Io, LockContention, ConnectionRefused, Timeout, Protocol, VersionMismatch, CorruptRecord };

  StoreError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view to_string(StoreError::Kind kind);

/// Content-addressable result cache.
///
/// get() returns an entry only when the hash is present and the stored
/// metadata matches the requested key (collision validation). Counters are
/// kept per handle: `stores` counts put attempts, `unique_entries` the ones
/// that inserted and `extra_simulations` the ones that found the key already
/// present. Handles are safe to share between threads.
class Store {
 public:
  virtual ~Store() = default;

  std::optional<CacheEntry> get(const CacheKey& key);
  PutResult put_if_absent(const CacheEntry& entry);
  CacheStats stats() const;

  /// Every committed entry, sorted by hash.
  virtual std::vector<CacheEntry> entries() = 0;
  /// Blocks until all accepted writes are visible to readers.
  virtual void drain() {}
  virtual std::string describe() const = 0;

 protected:
  virtual std::optional<CacheEntry> lookup(const CacheKey& key) = 0;
  virtual PutResult insert(const CacheEntry& entry) = 0;

 private:
  std::atomic<std::uint64_t> calls_{0}, hits_{0}, misses_{0};
  std::atomic<std::uint64_t> stores_{0}, extra_{0}, unique_{0};
};

/// Process-local store; also the table behind the network server.
class MemoryStore final : public Store {
 public:
  std::vector<CacheEntry> entries() override;
  std::string describe() const override { return "memory"; }
  std::size_t size() const;

 protected:
  std::optional<CacheEntry> lookup(const CacheKey& key) override;
  PutResult insert(const CacheEntry& entry) override;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, CacheEntry> table_;
};

/// Record body shared by the store file, queue files and the wire protocol:
///
///     hash           16 ASCII hex bytes
///     u16 BE         metadata length
///     metadata       see encode_metadata
///     payload        remaining bytes
std::vector<std::uint8_t> encode_entry(const CacheEntry& entry);
CacheEntry decode_entry(std::span<const std::uint8_t> bytes);

/// Big-endian metadata block:
///
///     u16 n_qubits, u32 interior_spiders, u8 payload_kind,
///     u8 tag length, tag bytes, u8 has_shots, [i64 shots], i64 created_at
std::vector<std::uint8_t> encode_metadata(const CacheEntry& entry);
/// Fills every field of `entry` except the hash and payload.
void decode_metadata(std::span<const std::uint8_t> bytes, CacheEntry& entry);

/// Opens the backend selected by the environment: QCACHE_ADDR (host:port)
/// for the networked store, else QCACHE_DIR for the embedded store, else an
/// in-memory store.
std::unique_ptr<Store> open_store_from_env();

}  // namespace qcache
