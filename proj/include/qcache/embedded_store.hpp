#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "qcache/store.hpp"

namespace qcache {

struct EmbeddedOptions {
  std::chrono::milliseconds poll_interval{10};
  /// Take the writer lock and run the writer loop. Read-only handles still
  /// accept puts; their queue files wait for the writer process.
  bool writer = true;
};

/// Single-writer store backed by one append-only file.
///
/// Directory layout:
///
///     data.qdb      "QCDB0001", then records [u32 BE length][body][u32 BE CRC-32]
///     queue/        <hash>.<nonce>.qent files, one encoded entry each
///     writer.lock   flock()ed by the writer process
///
/// Readers memory-map data.qdb and see an entry once the writer has appended
/// it. Puts write a queue file under a temporary name and rename it into
/// place; the writer loop consumes the queue every poll interval, appends new
/// records, syncs and deletes the queue files. Opening a second writer on the
/// same directory throws StoreError(LockContention).
class EmbeddedStore final : public Store {
 public:
  explicit EmbeddedStore(std::filesystem::path dir, EmbeddedOptions options = {});
  ~EmbeddedStore() override;
  EmbeddedStore(const EmbeddedStore&) = delete;
  EmbeddedStore& operator=(const EmbeddedStore&) = delete;

  std::vector<CacheEntry> entries() override;
  /// Writer: consumes the queue now. Reader: waits until this handle's
  /// pending puts are committed by the writer process.
  void drain() override;
  std::string describe() const override { return "embedded:" + dir_.string(); }

  const std::filesystem::path& directory() const { return dir_; }
  std::uintmax_t file_size() const;
  std::size_t committed_count();

 protected:
  std::optional<CacheEntry> lookup(const CacheKey& key) override;
  PutResult insert(const CacheEntry& entry) override;

 private:
  struct Slot {
    std::size_t offset;  // of the body
    std::size_t length;
  };

  void refresh_locked();
  void unmap_locked();
  std::size_t consume_queue();
  void writer_loop();

  std::filesystem::path dir_;
  std::filesystem::path data_path_;
  std::filesystem::path queue_dir_;
  EmbeddedOptions options_;

  std::mutex mutex_;  // index, mapping, pending set
  std::map<std::string, Slot> index_;
  std::set<std::string> pending_;
  const std::uint8_t* map_ = nullptr;
  std::size_t map_size_ = 0;
  std::size_t scanned_ = 0;

  std::mutex write_mutex_;  // serializes consume_queue
  int lock_fd_ = -1;
  int data_fd_ = -1;

  std::mutex loop_mutex_;
  std::condition_variable loop_cv_;
  bool stopping_ = false;
  std::thread writer_;
};

}  // namespace qcache
