#include "qcache/embedded_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>

#include "bytes.hpp"

namespace qcache {
namespace fs = std::filesystem;
namespace {

constexpr char kMagic[8] = {'Q', 'C', 'D', 'B', '0', '0', '0', '1'};
constexpr std::size_t kHeader = sizeof(kMagic);

[[noreturn]] void io_error(const std::string& what) {
  throw StoreError(StoreError::Kind::Io, what + ": " + std::strerror(errno));
}

void write_all(int fd, const std::uint8_t* data, std::size_t size, const std::string& what) {
  while (size > 0) {
    const ssize_t n = ::write(fd, data, size);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_error(what);
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
}

std::vector<std::uint8_t> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw StoreError(StoreError::Kind::Io, "cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string make_nonce() {
  static std::atomic<std::uint64_t> counter{0};
  const auto t = std::chrono::steady_clock::now().time_since_epoch().count();
  return std::to_string(::getpid()) + "-" + std::to_string(t) + "-" + std::to_string(counter++);
}

}  // namespace

EmbeddedStore::EmbeddedStore(fs::path dir, EmbeddedOptions options)
    : dir_(std::move(dir)), data_path_(dir_ / "data.qdb"), queue_dir_(dir_ / "queue"), options_(options) {
  std::error_code ec;
  fs::create_directories(queue_dir_, ec);
  if (ec) throw StoreError(StoreError::Kind::Io, "cannot create " + queue_dir_.string() + ": " + ec.message());

  if (options_.writer) {
    lock_fd_ = ::open((dir_ / "writer.lock").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (lock_fd_ < 0) io_error("open writer.lock");
    if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
      const int err = errno;
      ::close(lock_fd_);
      if (err == EWOULDBLOCK) {
        throw StoreError(StoreError::Kind::LockContention,
                         "another writer holds " + (dir_ / "writer.lock").string());
      }
      errno = err;
      io_error("flock writer.lock");
    }

    data_fd_ = ::open(data_path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (data_fd_ < 0) {
      const int err = errno;
      ::close(lock_fd_);
      errno = err;
      io_error("open " + data_path_.string());
    }
    struct stat st {};
    ::fstat(data_fd_, &st);
    if (st.st_size == 0) {
      write_all(data_fd_, reinterpret_cast<const std::uint8_t*>(kMagic), kHeader, "write header");
      ::fdatasync(data_fd_);
    }
  }

  {
    std::lock_guard lock(mutex_);
    refresh_locked();
    if (options_.writer && scanned_ < map_size_) {
      // Torn tail from a crashed writer: drop it before appending.
      if (::ftruncate(data_fd_, static_cast<off_t>(scanned_)) != 0) io_error("truncate torn tail");
      refresh_locked();
    }
  }

  if (options_.writer) {
    ::lseek(data_fd_, 0, SEEK_END);
    consume_queue();
    writer_ = std::thread([this] { writer_loop(); });
  }
}

EmbeddedStore::~EmbeddedStore() {
  if (writer_.joinable()) {
    {
      std::lock_guard lock(loop_mutex_);
      stopping_ = true;
    }
    loop_cv_.notify_all();
    writer_.join();
    try {
      consume_queue();
    } catch (...) {
      // Queue files stay on disk for the next writer.
    }
  }
  std::lock_guard lock(mutex_);
  unmap_locked();
  if (data_fd_ >= 0) ::close(data_fd_);
  if (lock_fd_ >= 0) ::close(lock_fd_);
}

void EmbeddedStore::unmap_locked() {
  if (map_) ::munmap(const_cast<std::uint8_t*>(map_), map_size_);
  map_ = nullptr;
  map_size_ = 0;
}

void EmbeddedStore::refresh_locked() {
  struct stat st {};
  if (::stat(data_path_.c_str(), &st) != 0) {
    if (errno == ENOENT) return;  // no writer has created the file yet
    io_error("stat " + data_path_.string());
  }
  const auto size = static_cast<std::size_t>(st.st_size);
  if (size == map_size_ || size < kHeader) return;

  unmap_locked();
  const int fd = ::open(data_path_.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) io_error("open " + data_path_.string());
  void* m = ::mmap(nullptr, size, PROT_READ, MAP_SHARED, fd, 0);
  ::close(fd);
  if (m == MAP_FAILED) io_error("mmap " + data_path_.string());
  map_ = static_cast<const std::uint8_t*>(m);
  map_size_ = size;

  if (scanned_ == 0) {
    if (std::memcmp(map_, kMagic, kHeader) != 0) {
      throw StoreError(StoreError::Kind::VersionMismatch, data_path_.string() + " is not a QCDB0001 store");
    }
    scanned_ = kHeader;
  }
  // Index complete records; stop at a partial or damaged tail.
  while (map_size_ - scanned_ >= 8) {
    detail::ByteReader head({map_ + scanned_, 4}, "record");
    const std::size_t len = head.u32();
    if (map_size_ - scanned_ < 8 + len) break;
    const std::span<const std::uint8_t> body(map_ + scanned_ + 4, len);
    detail::ByteReader tail({map_ + scanned_ + 4 + len, 4}, "record");
    if (tail.u32() != detail::crc32_of(body) || len < 16) break;
    std::string hash(reinterpret_cast<const char*>(body.data()), 16);
    index_.try_emplace(std::move(hash), Slot{scanned_ + 4, len});
    scanned_ += 8 + len;
  }
}

std::uintmax_t EmbeddedStore::file_size() const {
  std::error_code ec;
  const auto s = fs::file_size(data_path_, ec);
  return ec ? 0 : s;
}

std::size_t EmbeddedStore::committed_count() {
  std::lock_guard lock(mutex_);
  refresh_locked();
  return index_.size();
}

std::optional<CacheEntry> EmbeddedStore::lookup(const CacheKey& key) {
  std::lock_guard lock(mutex_);
  refresh_locked();
  auto it = index_.find(key.hash);
  if (it == index_.end()) return std::nullopt;
  return decode_entry({map_ + it->second.offset, it->second.length});
}

std::vector<CacheEntry> EmbeddedStore::entries() {
  std::lock_guard lock(mutex_);
  refresh_locked();
  std::vector<CacheEntry> out;
  out.reserve(index_.size());
  for (const auto& [_, slot] : index_) out.push_back(decode_entry({map_ + slot.offset, slot.length}));
  return out;
}

PutResult EmbeddedStore::insert(const CacheEntry& entry) {
  std::lock_guard lock(mutex_);
  refresh_locked();
  if (index_.contains(entry.key.hash) || pending_.contains(entry.key.hash)) return PutResult::AlreadyPresent;

  const auto body = encode_entry(entry);
  const std::string name = entry.key.hash + "." + make_nonce();
  const fs::path tmp = queue_dir_ / ("." + name + ".tmp");
  const fs::path final_path = queue_dir_ / (name + ".qent");
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
  if (fd < 0) io_error("create " + tmp.string());
  try {
    write_all(fd, body.data(), body.size(), "write " + tmp.string());
  } catch (...) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  ::close(fd);
  if (::rename(tmp.c_str(), final_path.c_str()) != 0) io_error("rename " + tmp.string());
  pending_.insert(entry.key.hash);
  return PutResult::Inserted;
}

std::size_t EmbeddedStore::consume_queue() {
  std::lock_guard wlock(write_mutex_);
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& de : fs::directory_iterator(queue_dir_, ec)) {
    if (de.path().extension() == ".qent") files.push_back(de.path());
  }
  if (files.empty()) return 0;
  std::sort(files.begin(), files.end());

  std::set<std::string> known;
  {
    std::lock_guard lock(mutex_);
    refresh_locked();
    for (const auto& [h, _] : index_) known.insert(h);
  }
  detail::ByteWriter batch;
  std::vector<std::string> committed;
  for (const auto& f : files) {
    std::vector<std::uint8_t> body;
    try {
      body = read_file(f);
      const CacheEntry e = decode_entry(body);
      if (!known.insert(e.key.hash).second) continue;
      committed.push_back(e.key.hash);
    } catch (const StoreError&) {
      continue;  // unreadable queue file: dropped below
    }
    batch.u32(static_cast<std::uint32_t>(body.size()));
    batch.bytes(body);
    batch.u32(detail::crc32_of(body));
  }
  if (!batch.data().empty()) {
    write_all(data_fd_, batch.data().data(), batch.data().size(), "append " + data_path_.string());
    if (::fdatasync(data_fd_) != 0) io_error("fdatasync " + data_path_.string());
  }
  for (const auto& f : files) fs::remove(f, ec);
  {
    std::lock_guard lock(mutex_);
    refresh_locked();
    for (const auto& h : committed) pending_.erase(h);
    // Duplicates of already-committed hashes are no longer pending either.
    for (auto it = pending_.begin(); it != pending_.end();) {
      it = index_.contains(*it) ? pending_.erase(it) : std::next(it);
    }
  }
  return files.size();
}

void EmbeddedStore::writer_loop() {
  std::unique_lock lock(loop_mutex_);
  while (!stopping_) {
    lock.unlock();
    try {
      consume_queue();
    } catch (const StoreError&) {
      // Retried on the next tick.
    }
    lock.lock();
    loop_cv_.wait_for(lock, options_.poll_interval, [this] { return stopping_; });
  }
}

void EmbeddedStore::drain() {
  if (options_.writer) {
    consume_queue();
    return;
  }
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(30);
  for (;;) {
    {
      std::lock_guard lock(mutex_);
      refresh_locked();
      for (auto it = pending_.begin(); it != pending_.end();) {
        it = index_.contains(*it) ? pending_.erase(it) : std::next(it);
      }
      if (pending_.empty()) return;
    }
    if (std::chrono::steady_clock::now() > deadline) {
      throw StoreError(StoreError::Kind::Timeout, "no writer committed the queued entries in " + dir_.string());
    }
    std::this_thread::sleep_for(options_.poll_interval);
  }
}

}  // namespace qcache
