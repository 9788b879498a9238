// Part of the hexbp project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstddef>
#include <span>
#include <vector>

namespace hexbp {

/// Process-wide accounting of operator scratch allocations. Tests use the
/// counters to check that the fused backend performs no per-apply
/// allocation while the multipass backend owns global quadrature fields.
struct AllocStats {
  static std::atomic<std::size_t>& live_bytes() {
    static std::atomic<std::size_t> v{0};
    return v;
  }
  static std::atomic<std::size_t>& alloc_events() {
    static std::atomic<std::size_t> v{0};
    return v;
  }
};

/// std::vector<double> wrapper whose capacity changes are recorded in
/// AllocStats. All operator workspace buffers go through this type.
class TrackedBuffer {
 public:
  TrackedBuffer() = default;
  explicit TrackedBuffer(std::size_t n) { resize(n); }

  TrackedBuffer(const TrackedBuffer&) = delete;
  TrackedBuffer& operator=(const TrackedBuffer&) = delete;
  TrackedBuffer(TrackedBuffer&& other) noexcept : v_(std::move(other.v_)) { other.v_.clear(); }
  TrackedBuffer& operator=(TrackedBuffer&& other) noexcept {
    release();
    v_ = std::move(other.v_);
    other.v_.clear();
    return *this;
  }

  ~TrackedBuffer() { release(); }

  void resize(std::size_t n) {
    const std::size_t before = v_.capacity();
    v_.resize(n);
    const std::size_t after = v_.capacity();
    if (after > before) {
      AllocStats::live_bytes() += (after - before) * sizeof(double);
      AllocStats::alloc_events() += 1;
    }
  }

  std::size_t size() const { return v_.size(); }
  std::size_t bytes() const { return v_.capacity() * sizeof(double); }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::span<double> span() { return {v_.data(), v_.size()}; }
  std::span<const double> span() const { return {v_.data(), v_.size()}; }

  void fill_zero() { std::fill(v_.begin(), v_.end(), 0.0); }

 private:
  void release() {
    if (v_.capacity() > 0) AllocStats::live_bytes() -= v_.capacity() * sizeof(double);
    v_ = {};
  }
  std::vector<double> v_;
};

}  // namespace hexbp
