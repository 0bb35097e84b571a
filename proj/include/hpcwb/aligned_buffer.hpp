#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <new>
#include <span>
#include <string>

#include "hpcwb/error.hpp"

namespace hpcwb {

inline constexpr std::size_t kCacheLineBytes = 64;

/// Owns `size` elements whose first element sits `offset` elements past a
/// 64-byte aligned base. Offset 1 produces the misaligned views that trip
/// code assuming vector-aligned data.
template <typename T>
class AlignedBuffer {
 public:
  AlignedBuffer() = default;

  explicit AlignedBuffer(std::size_t size, std::size_t offset = 0) : size_(size), offset_(offset) {
    std::size_t bytes = (size + offset) * sizeof(T);
    bytes = std::max<std::size_t>(kCacheLineBytes, (bytes + kCacheLineBytes - 1) / kCacheLineBytes * kCacheLineBytes);
    void* p = std::aligned_alloc(kCacheLineBytes, bytes);
    if (p == nullptr) throw AllocationFailure("cannot allocate " + std::to_string(bytes) + " bytes");
    base_.reset(static_cast<T*>(p));
    std::fill_n(base_.get(), size + offset, T{});
  }

  T* data() noexcept { return base_.get() + offset_; }
  const T* data() const noexcept { return base_.get() + offset_; }
  std::size_t size() const noexcept { return size_; }
  std::size_t offset() const noexcept { return offset_; }
  bool allocated() const noexcept { return base_ != nullptr; }

  std::span<T> span() noexcept { return {data(), size_}; }
  std::span<const T> span() const noexcept { return {data(), size_}; }

  T& operator[](std::size_t i) noexcept { return data()[i]; }
  const T& operator[](std::size_t i) const noexcept { return data()[i]; }

 private:
  struct Free {
    void operator()(T* p) const noexcept { std::free(p); }
  };
  std::unique_ptr<T, Free> base_;
  std::size_t size_ = 0;
  std::size_t offset_ = 0;
};

/// Copies `src` into a fresh buffer at the requested element offset.
template <typename T>
AlignedBuffer<T> aligned_copy(std::span<const T> src, std::size_t offset) {
  AlignedBuffer<T> buf(src.size(), offset);
  std::copy(src.begin(), src.end(), buf.data());
  return buf;
}

inline bool is_aligned(const void* p, std::size_t alignment) noexcept {
  return alignment == 0 || reinterpret_cast<std::uintptr_t>(p) % alignment == 0;
}

}  // namespace hpcwb
