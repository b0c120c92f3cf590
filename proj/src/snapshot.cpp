#include "qcache/snapshot.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

#include "bytes.hpp"

namespace qcache {
namespace {

constexpr char kMagic[8] = {'Q', 'C', 'S', 'N', 'A', 'P', '0', '1'};

}  // namespace

std::vector<std::uint8_t> encode_snapshot(std::span<const CacheEntry> entries, std::uint32_t wl_iterations) {
  std::vector<const CacheEntry*> sorted;
  sorted.reserve(entries.size());
  for (const auto& e : entries) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->key.hash < b->key.hash; });
  if (std::adjacent_find(sorted.begin(), sorted.end(),
                         [](auto* a, auto* b) { return a->key.hash == b->key.hash; }) != sorted.end()) {
    throw std::invalid_argument("snapshot entries must have unique hashes");
  }

  detail::ByteWriter w;
  w.str({kMagic, sizeof kMagic});
  w.u32(kSnapshotVersion);
  w.u32(wl_iterations);
  w.u64(sorted.size());
  for (const auto* e : sorted) {
    e->validate();
    const std::size_t start = w.data().size();
    w.str(e->key.hash);
    const auto meta = encode_metadata(*e);
    w.u16(static_cast<std::uint16_t>(meta.size()));
    w.bytes(meta);
    w.u64(e->payload.size());
    w.bytes(e->payload);
    const std::span<const std::uint8_t> record(w.data().data() + start, w.data().size() - start);
    w.u32(detail::crc32_of(record));
  }
  return w.take();
}

std::vector<CacheEntry> decode_snapshot(std::span<const std::uint8_t> bytes, SnapshotHeader* header) {
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw StoreError(StoreError::Kind::VersionMismatch, "not a QCSNAP01 snapshot");
  }
  detail::ByteReader r(bytes.subspan(sizeof kMagic), "snapshot header");
  SnapshotHeader h;
  h.version = r.u32();
  h.wl_iterations = r.u32();
  h.count = r.u64();
  if (h.version != kSnapshotVersion) {
    throw StoreError(StoreError::Kind::VersionMismatch,
                     "snapshot version " + std::to_string(h.version) + ", expected " + std::to_string(kSnapshotVersion));
  }
  if (header) *header = h;

  std::vector<CacheEntry> out;
  for (std::uint64_t i = 0; i < h.count; ++i) {
    const std::string where = "record " + std::to_string(i);
    try {
      const std::size_t start = r.position();
      CacheEntry e;
      e.key.hash = r.str(16);
      decode_metadata(r.bytes(r.u16()), e);
      const auto payload = r.bytes(static_cast<std::size_t>(r.u64()));
      e.payload.assign(payload.begin(), payload.end());
      const std::size_t end = r.position();
      const std::uint32_t crc = r.u32();
      if (crc != detail::crc32_of(bytes.subspan(sizeof kMagic + start, end - start))) {
        throw StoreError(StoreError::Kind::CorruptRecord, where + ": checksum mismatch");
      }
      e.validate();
      if (!out.empty() && !(out.back().key.hash < e.key.hash)) {
        throw StoreError(StoreError::Kind::CorruptRecord, where + ": records out of order");
      }
      out.push_back(std::move(e));
    } catch (const StoreError& ex) {
      if (ex.kind() == StoreError::Kind::CorruptRecord) throw;
      throw StoreError(StoreError::Kind::CorruptRecord, where + ": " + ex.what());
    } catch (const std::invalid_argument& ex) {
      throw StoreError(StoreError::Kind::CorruptRecord, where + ": " + ex.what());
    }
  }
  if (r.remaining() != 0) throw StoreError(StoreError::Kind::CorruptRecord, "trailing bytes after the last record");
  return out;
}

std::uint64_t export_snapshot(Store& store, const std::filesystem::path& file, std::uint32_t wl_iterations) {
  store.drain();
  const auto entries = store.entries();
  const auto bytes = encode_snapshot(entries, wl_iterations);
  const auto tmp = std::filesystem::path(file).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw StoreError(StoreError::Kind::Io, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, file, ec);
  if (ec) throw StoreError(StoreError::Kind::Io, "cannot rename to " + file.string() + ": " + ec.message());
  return entries.size();
}

ImportReport import_snapshot(const std::filesystem::path& file, Store& store, std::uint32_t wl_iterations) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw StoreError(StoreError::Kind::Io, "cannot read " + file.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  SnapshotHeader h;
  const auto entries = decode_snapshot(bytes, &h);
  if (h.wl_iterations != wl_iterations) {
    throw StoreError(StoreError::Kind::VersionMismatch, "snapshot keys use " + std::to_string(h.wl_iterations) +
                                                            " WL iterations, this cache uses " +
                                                            std::to_string(wl_iterations));
  }
  ImportReport report;
  for (const auto& e : entries) {
    ++report.records;
    ++(store.put_if_absent(e) == PutResult::Inserted ? report.inserted : report.already_present);
  }
  store.drain();
  return report;
}

}  // namespace qcache
