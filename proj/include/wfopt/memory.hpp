#pragma once

#include <cstddef>
#include <cstdint>

#include "wfopt/common.hpp"

namespace wfopt {

inline constexpr size_t kDefaultBlockBytes = 8192;

/// Block budget for one reorder operation. At least three blocks: input,
/// output, and one block of working space.
struct MemoryBudget {
  size_t m_blocks = 3;
  size_t block_bytes = kDefaultBlockBytes;

  MemoryBudget() = default;
  MemoryBudget(size_t m, size_t bs = kDefaultBlockBytes)
      : m_blocks(m), block_bytes(bs) {
    if (m_blocks < 3)
      throw InvalidArgument("memory budget needs at least 3 blocks");
    if (block_bytes < 64)
      throw InvalidArgument("block size too small");
  }

  size_t bytes() const { return m_blocks * block_bytes; }
};

/// Tracks bytes an operator currently buffers, and the high-water mark.
/// Tests assert peak_bytes() stays within the budget.
class MemoryLedger {
public:
  void charge(size_t bytes) {
    current_ += bytes;
    peak_ = current_ > peak_ ? current_ : peak_;
  }
  void release(size_t bytes) {
    current_ = bytes > current_ ? 0 : current_ - bytes;
  }
  size_t current_bytes() const { return current_; }
  size_t peak_bytes() const { return peak_; }
  void reset_peak() { peak_ = current_; }

private:
  size_t current_ = 0;
  size_t peak_ = 0;
};

/// Spill-layer counters for one query execution.
struct IoStats {
  uint64_t spill_blocks_written = 0;
  uint64_t spill_blocks_read = 0;
  uint64_t spill_bytes = 0;
  uint64_t scan_blocks_read = 0;
  uint64_t merge_passes = 0; // total across sorts in the run

  uint64_t spill_blocks() const {
    return spill_blocks_written + spill_blocks_read;
  }
};

/// Shared instrumentation for everything one query execution does.
struct RunContext {
  IoStats io;
  MemoryLedger memory;
};

} // namespace wfopt
