#pragma once

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "wfopt/memory.hpp"
#include "wfopt/value.hpp"

namespace wfopt {

/// Owns a directory for spill files; removes it on destruction.
class TempDir {
public:
  /// base: explicit directory, or empty to honor WFOPT_TMPDIR / TMPDIR /
  /// the system default.
  explicit TempDir(const std::string &base = "");
  ~TempDir();
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  std::filesystem::path make_file_path();
  const std::filesystem::path &path() const { return dir_; }

private:
  std::filesystem::path dir_;
  uint64_t next_ = 0;
};

/// A spill file of length-prefixed binary rows, written in self-contained
/// chunks (rows never straddle a chunk). The chunk is normally one block;
/// hash partitioning uses sub-block chunks so many partitions can share
/// the staging budget. Spill I/O is charged to the run context in blocks,
/// by accumulated bytes. The format is private to one execution.
class SpillFile {
public:
  SpillFile(TempDir &dir, RunContext &ctx, size_t block_bytes,
            size_t chunk_bytes = 0); // 0: one block per chunk
  ~SpillFile();
  SpillFile(const SpillFile &) = delete;
  SpillFile &operator=(const SpillFile &) = delete;

  void append(const Row &r);
  /// Flushes the trailing partial chunk and closes the write side.
  void finish_write();

  uint64_t rows() const { return rows_; }
  uint64_t payload_bytes() const { return payload_bytes_; }

  /// Sequential reader; reads a block at a time (chunks are self-contained
  /// and block_bytes is a chunk multiple) and charges one block of buffer
  /// while open.
  class Reader {
  public:
    Reader(SpillFile &f);
    ~Reader();
    Reader(const Reader &) = delete;
    Reader &operator=(const Reader &) = delete;
    bool next(Row &out);

  private:
    SpillFile &f_;
    std::FILE *in_ = nullptr;
    std::vector<char> buf_;
    size_t chunk_begin_ = 0;
    size_t pos_ = 0;
    size_t avail_ = 0;
    uint64_t remaining_rows_ = 0;
    uint64_t bytes_read_ = 0;
    uint64_t blocks_counted_ = 0;
    bool fill();
  };

private:
  friend class Reader;
  void flush_chunk();
  void finish_write_quiet();
  void count_written_blocks(bool final_round_up);

  RunContext &ctx_;
  std::filesystem::path path_;
  std::FILE *out_ = nullptr;
  size_t block_bytes_;
  size_t chunk_bytes_;
  std::vector<char> chunk_;
  uint64_t rows_ = 0;
  uint64_t bytes_written_ = 0;
  uint64_t payload_bytes_ = 0;
  uint64_t blocks_counted_ = 0;
  bool finished_ = false;
};

/// Serialized size of a row in the spill format; also the measure used
/// for memory accounting.
size_t row_spill_bytes(const Row &r);

void encode_row(const Row &r, std::vector<char> &out);
/// Decodes one row from buf at pos; advances pos.
bool decode_row(const char *buf, size_t len, size_t &pos, Row &out);

} // namespace wfopt
