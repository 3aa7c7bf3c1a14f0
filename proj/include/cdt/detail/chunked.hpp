// Append-only chunked storage with stable addresses.
//
// Writers append under the owning structure's lock; readers index
// lock-free. Chunks are fixed-size arrays reached through a fixed table
// of atomic pointers, so neither growth nor concurrent reads ever move
// an element.
#ifndef CDT_DETAIL_CHUNKED_HPP
#define CDT_DETAIL_CHUNKED_HPP

#include <atomic>
#include <cstddef>
#include <memory>
#include <stdexcept>

namespace cdt::detail {

template <class T>
class ChunkedStore {
 public:
  static constexpr size_t kChunkBits = 14;
  static constexpr size_t kChunk = size_t{1} << kChunkBits;
  static constexpr size_t kMaxChunks = size_t{1} << 12;

  ChunkedStore() : chunks_(new std::atomic<T*>[kMaxChunks]) {
    for (size_t i = 0; i < kMaxChunks; ++i) chunks_[i].store(nullptr, std::memory_order_relaxed);
  }
  ~ChunkedStore() {
    for (size_t i = 0; i < kMaxChunks; ++i) delete[] chunks_[i].load(std::memory_order_relaxed);
  }
  ChunkedStore(const ChunkedStore&) = delete;
  ChunkedStore& operator=(const ChunkedStore&) = delete;

  // Call with the owner's lock held. The returned slot must be filled
  // before publish().
  T& prepare() {
    size_t idx = size_.load(std::memory_order_relaxed);
    size_t c = idx >> kChunkBits;
    if (c >= kMaxChunks) throw std::length_error("ChunkedStore capacity exceeded");
    T* chunk = chunks_[c].load(std::memory_order_acquire);
    if (!chunk) {
      chunk = new T[kChunk]();
      chunks_[c].store(chunk, std::memory_order_release);
    }
    return chunk[idx & (kChunk - 1)];
  }
  void publish() { size_.fetch_add(1, std::memory_order_release); }

  // Valid for any index the caller obtained from a completed append.
  T& operator[](size_t i) {
    return chunks_[i >> kChunkBits].load(std::memory_order_acquire)[i & (kChunk - 1)];
  }
  const T& operator[](size_t i) const {
    return chunks_[i >> kChunkBits].load(std::memory_order_acquire)[i & (kChunk - 1)];
  }

  size_t size() const { return size_.load(std::memory_order_acquire); }

 private:
  std::unique_ptr<std::atomic<T*>[]> chunks_;
  std::atomic<size_t> size_{0};
};

}  // namespace cdt::detail

#endif  // CDT_DETAIL_CHUNKED_HPP
