#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qcache/identity.hpp"
#include "qcache/store.hpp"

namespace qcache {

inline constexpr std::uint32_t kSnapshotVersion = 1;

/// Backend-neutral snapshot file:
///
///     "QCSNAP01"  u32 version  u32 wl_iterations  u64 count
///     count records, sorted by hash:
///         hash             16 ASCII hex bytes
///         u16              metadata length
///         metadata         see encode_metadata
///         u64              payload length
///         payload
///         u32              CRC-32 of the record bytes above
///
/// All integers big-endian. The same entries always produce the same bytes.
struct SnapshotHeader {
  std::uint32_t version = kSnapshotVersion;
  std::uint32_t wl_iterations = kDefaultWlIterations;
  std::uint64_t count = 0;
};

std::vector<std::uint8_t> encode_snapshot(std::span<const CacheEntry> entries,
                                          std::uint32_t wl_iterations = kDefaultWlIterations);
/// Throws StoreError: VersionMismatch for a foreign header or version,
/// CorruptRecord (message names the 0-based record index) for damaged data.
std::vector<CacheEntry> decode_snapshot(std::span<const std::uint8_t> bytes, SnapshotHeader* header = nullptr);

/// Drains `store` and writes every entry. Returns the record count.
std::uint64_t export_snapshot(Store& store, const std::filesystem::path& file,
                              std::uint32_t wl_iterations = kDefaultWlIterations);

struct ImportReport {
  std::uint64_t records = 0;
  std::uint64_t inserted = 0;
  std::uint64_t already_present = 0;
};

/// put_if_absent for every record, then drain. Rejects snapshots hashed with
/// a different WL iteration count (VersionMismatch).
ImportReport import_snapshot(const std::filesystem::path& file, Store& store,
                             std::uint32_t wl_iterations = kDefaultWlIterations);

}  // namespace qcache
