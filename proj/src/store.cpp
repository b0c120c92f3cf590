#include "qcache/store.hpp"

#include <bit>
#include <chrono>
#include <cstdlib>

#include "bytes.hpp"
#include "qcache/embedded_store.hpp"
#include "qcache/net_store.hpp"

namespace qcache {
namespace {

std::int64_t now_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

bool is_hex_key(const std::string& h) {
  if (h.size() != 16) return false;
  for (char ch : h) {
    if (!((ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f'))) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(StoreError::Kind kind) {
  switch (kind) {
    case StoreError::Kind::Io: return "io";
    case StoreError::Kind::LockContention: return "lock-contention";
    case StoreError::Kind::ConnectionRefused: return "connection-refused";
    case StoreError::Kind::Timeout: return "timeout";
    case StoreError::Kind::Protocol: return "protocol";
    case StoreError::Kind::VersionMismatch: return "version-mismatch";
    case StoreError::Kind::CorruptRecord: return "corrupt-record";
  }
  return "unknown";
}

CacheEntry CacheEntry::full(const CacheKey& key, const Statevector& sv, std::string backend_tag) {
  CacheEntry e;
  e.key = key;
  e.key.payload_kind = PayloadKind::Full;
  e.payload = serialize_amplitudes(sv);
  e.backend_tag = std::move(backend_tag);
  e.created_at = now_seconds();
  e.validate();
  return e;
}

CacheEntry CacheEntry::compact(const CacheKey& key, double expectation, std::string backend_tag) {
  CacheEntry e;
  e.key = key;
  e.key.payload_kind = PayloadKind::Compact;
  const auto bits = std::bit_cast<std::uint64_t>(expectation);
  for (int k = 0; k < 8; ++k) e.payload.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
  e.backend_tag = std::move(backend_tag);
  e.created_at = now_seconds();
  e.validate();
  return e;
}

Statevector CacheEntry::statevector() const {
  if (key.payload_kind != PayloadKind::Full) throw std::logic_error("entry does not hold a statevector");
  return deserialize_amplitudes(payload);
}

double CacheEntry::expectation() const {
  if (key.payload_kind != PayloadKind::Compact || payload.size() != 8) {
    throw std::logic_error("entry does not hold an expectation value");
  }
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= std::uint64_t{payload[static_cast<std::size_t>(k)]} << (8 * k);
  return std::bit_cast<double>(bits);
}

void CacheEntry::validate() const {
  if (!is_hex_key(key.hash)) throw std::invalid_argument("cache key must be 16 lowercase hex characters");
  if (key.n_qubits < 0 || key.interior_spiders < 0) throw std::invalid_argument("negative key metadata");
  if (backend_tag.size() > 255) throw std::invalid_argument("backend tag longer than 255 bytes");
  if (key.payload_kind == PayloadKind::Compact) {
    if (payload.size() != 8) throw std::invalid_argument("compact payload must be 8 bytes");
  } else if (key.n_qubits > 30 || payload.size() != (std::size_t{16} << key.n_qubits)) {
    throw std::invalid_argument("full payload must hold 2^n_qubits complex doubles");
  }
}

std::optional<CacheEntry> Store::get(const CacheKey& key) {
  ++calls_;
  auto found = lookup(key);
  if (found && found->key.n_qubits == key.n_qubits && found->key.interior_spiders == key.interior_spiders &&
      found->key.payload_kind == key.payload_kind) {
    ++hits_;
    return found;
  }
  ++misses_;
  return std::nullopt;
}

PutResult Store::put_if_absent(const CacheEntry& entry) {
  entry.validate();
  ++stores_;
  const PutResult r = insert(entry);
  ++(r == PutResult::Inserted ? unique_ : extra_);
  return r;
}

CacheStats Store::stats() const {
  CacheStats s;
  s.calls = calls_;
  s.hits = hits_;
  s.misses = misses_;
  s.stores = stores_;
  s.extra_simulations = extra_;
  s.unique_entries = unique_;
  return s;
}

std::vector<CacheEntry> MemoryStore::entries() {
  std::lock_guard lock(mutex_);
  std::vector<CacheEntry> out;
  out.reserve(table_.size());
  for (const auto& [_, e] : table_) out.push_back(e);
  return out;
}

std::size_t MemoryStore::size() const {
  std::lock_guard lock(mutex_);
  return table_.size();
}

std::optional<CacheEntry> MemoryStore::lookup(const CacheKey& key) {
  std::lock_guard lock(mutex_);
  auto it = table_.find(key.hash);
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

PutResult MemoryStore::insert(const CacheEntry& entry) {
  std::lock_guard lock(mutex_);
  return table_.try_emplace(entry.key.hash, entry).second ? PutResult::Inserted : PutResult::AlreadyPresent;
}

std::vector<std::uint8_t> encode_metadata(const CacheEntry& e) {
  detail::ByteWriter w;
  w.u16(static_cast<std::uint16_t>(e.key.n_qubits));
  w.u32(static_cast<std::uint32_t>(e.key.interior_spiders));
  w.u8(static_cast<std::uint8_t>(e.key.payload_kind));
  w.u8(static_cast<std::uint8_t>(e.backend_tag.size()));
  w.str(e.backend_tag);
  w.u8(e.shots ? 1 : 0);
  if (e.shots) w.i64(*e.shots);
  w.i64(e.created_at);
  return w.take();
}

void decode_metadata(std::span<const std::uint8_t> bytes, CacheEntry& e) {
  detail::ByteReader r(bytes, "entry metadata");
  e.key.n_qubits = r.u16();
  e.key.interior_spiders = static_cast<int>(r.u32());
  const auto kind = r.u8();
  if (kind > 1) throw StoreError(StoreError::Kind::Protocol, "entry metadata: unknown payload kind");
  e.key.payload_kind = static_cast<PayloadKind>(kind);
  e.backend_tag = r.str(r.u8());
  if (r.u8()) {
    e.shots = r.i64();
  } else {
    e.shots.reset();
  }
  e.created_at = r.i64();
  if (r.remaining() != 0) throw StoreError(StoreError::Kind::Protocol, "entry metadata: trailing bytes");
}

std::vector<std::uint8_t> encode_entry(const CacheEntry& e) {
  detail::ByteWriter w;
  w.str(e.key.hash);
  const auto meta = encode_metadata(e);
  w.u16(static_cast<std::uint16_t>(meta.size()));
  w.bytes(meta);
  w.bytes(e.payload);
  return w.take();
}

CacheEntry decode_entry(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "entry");
  CacheEntry e;
  e.key.hash = r.str(16);
  decode_metadata(r.bytes(r.u16()), e);
  const auto payload = r.rest();
  e.payload.assign(payload.begin(), payload.end());
  try {
    e.validate();
  } catch (const std::invalid_argument& ex) {
    throw StoreError(StoreError::Kind::Protocol, std::string("entry: ") + ex.what());
  }
  return e;
}

std::unique_ptr<Store> open_store_from_env() {
  if (const char* addr = std::getenv("QCACHE_ADDR"); addr && *addr) {
    return std::make_unique<NetworkedStore>(NetworkedStore::parse_address(addr));
  }
  if (const char* dir = std::getenv("QCACHE_DIR"); dir && *dir) return std::make_unique<EmbeddedStore>(dir);
  return std::make_unique<MemoryStore>();
}

}  // namespace qcache
