#include "wfopt/spill.hpp"

#include <cstdlib>
#include <cstring>
#include <unistd.h>

namespace wfopt {

namespace {

template <typename T> void put(std::vector<char> &out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <typename T> T get(const char *buf, size_t &pos) {
  T v;
  std::memcpy(&v, buf + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::filesystem::path pick_base(const std::string &base) {
  if (!base.empty())
    return base;
  if (const char *e = std::getenv("WFOPT_TMPDIR"); e && *e)
    return e;
  if (const char *e = std::getenv("TMPDIR"); e && *e)
    return e;
  return std::filesystem::temp_directory_path();
}

} // namespace

TempDir::TempDir(const std::string &base) {
  auto root = pick_base(base);
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  for (int attempt = 0; attempt < 64; ++attempt) {
    auto candidate =
        root / ("wfopt-" + std::to_string(::getpid()) + "-" +
                std::to_string(std::rand()) + std::to_string(attempt));
    if (std::filesystem::create_directory(candidate, ec)) {
      dir_ = candidate;
      return;
    }
  }
  throw IoError("could not create temp directory under " + root.string());
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(dir_, ec);
}

std::filesystem::path TempDir::make_file_path() {
  return dir_ / ("spill-" + std::to_string(next_++) + ".bin");
}

size_t row_spill_bytes(const Row &r) {
  size_t n = 4 + 8 + 2; // length prefix, rowid, column count
  for (const auto &v : r.vals) {
    n += 1;
    if (v.tag == Value::Tag::Int)
      n += 8;
    else if (v.tag == Value::Tag::Str)
      n += 4 + v.str.size();
  }
  return n;
}

void encode_row(const Row &r, std::vector<char> &out) {
  size_t start = out.size();
  put<uint32_t>(out, 0); // patched below
  put<uint64_t>(out, r.rowid);
  put<uint16_t>(out, static_cast<uint16_t>(r.vals.size()));
  for (const auto &v : r.vals) {
    put<uint8_t>(out, static_cast<uint8_t>(v.tag));
    if (v.tag == Value::Tag::Int)
      put<int64_t>(out, v.num);
    else if (v.tag == Value::Tag::Str) {
      put<uint32_t>(out, static_cast<uint32_t>(v.str.size()));
      out.insert(out.end(), v.str.begin(), v.str.end());
    }
  }
  uint32_t len = static_cast<uint32_t>(out.size() - start);
  std::memcpy(out.data() + start, &len, sizeof(len));
}

bool decode_row(const char *buf, size_t len, size_t &pos, Row &out) {
  if (pos + 4 > len)
    return false;
  size_t p = pos;
  uint32_t rlen = get<uint32_t>(buf, p);
  if (rlen == 0 || pos + rlen > len)
    return false;
  out.rowid = get<uint64_t>(buf, p);
  uint16_t ncols = get<uint16_t>(buf, p);
  out.vals.clear();
  out.vals.reserve(ncols);
  for (uint16_t i = 0; i < ncols; ++i) {
    auto tag = static_cast<Value::Tag>(get<uint8_t>(buf, p));
    Value v;
    v.tag = tag;
    if (tag == Value::Tag::Int)
      v.num = get<int64_t>(buf, p);
    else if (tag == Value::Tag::Str) {
      uint32_t slen = get<uint32_t>(buf, p);
      v.str.assign(buf + p, slen);
      p += slen;
    }
    out.vals.push_back(std::move(v));
  }
  pos += rlen;
  return true;
}

SpillFile::SpillFile(TempDir &dir, RunContext &ctx, size_t block_bytes,
                     size_t chunk_bytes)
    : ctx_(ctx), path_(dir.make_file_path()), block_bytes_(block_bytes),
      chunk_bytes_(chunk_bytes ? chunk_bytes : block_bytes) {
  out_ = std::fopen(path_.c_str(), "wb");
  if (!out_)
    throw IoError("cannot create spill file " + path_.string());
  chunk_.reserve(chunk_bytes_);
  ctx_.memory.charge(chunk_bytes_); // write-staging while open
}

SpillFile::~SpillFile() {
  finish_write_quiet();
  if (out_)
    std::fclose(out_);
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

void SpillFile::count_written_blocks(bool final_round_up) {
  uint64_t total = final_round_up
                       ? (bytes_written_ + block_bytes_ - 1) / block_bytes_
                       : bytes_written_ / block_bytes_;
  if (total > blocks_counted_) {
    ctx_.io.spill_blocks_written += total - blocks_counted_;
    blocks_counted_ = total;
  }
}

void SpillFile::flush_chunk() {
  if (chunk_.empty())
    return;
  chunk_.resize(chunk_bytes_, 0); // zero pad; a zero length ends a chunk
  if (std::fwrite(chunk_.data(), 1, chunk_bytes_, out_) != chunk_bytes_)
    throw IoError("spill write failed: " + path_.string());
  bytes_written_ += chunk_bytes_;
  ctx_.io.spill_bytes += chunk_bytes_;
  count_written_blocks(false);
  chunk_.clear();
}

void SpillFile::append(const Row &r) {
  if (finished_)
    throw IoError("append after finish_write");
  size_t need = row_spill_bytes(r);
  if (need > chunk_bytes_)
    throw IoError("row larger than one spill chunk");
  if (chunk_.size() + need > chunk_bytes_)
    flush_chunk();
  size_t before = chunk_.size();
  encode_row(r, chunk_);
  payload_bytes_ += chunk_.size() - before;
  rows_++;
}

void SpillFile::finish_write() {
  if (finished_)
    return;
  flush_chunk();
  if (std::fflush(out_) != 0)
    throw IoError("spill flush failed");
  finished_ = true;
  count_written_blocks(true);
  ctx_.memory.release(chunk_bytes_);
}

void SpillFile::finish_write_quiet() {
  if (finished_)
    return;
  finished_ = true;
  ctx_.memory.release(chunk_bytes_);
}

SpillFile::Reader::Reader(SpillFile &f) : f_(f), remaining_rows_(f.rows_) {
  f_.finish_write();
  in_ = std::fopen(f_.path_.c_str(), "rb");
  if (!in_)
    throw IoError("cannot reopen spill file " + f_.path_.string());
  buf_.resize(std::max(f_.block_bytes_, f_.chunk_bytes_));
  f_.ctx_.memory.charge(buf_.size()); // one input buffer while open
}

SpillFile::Reader::~Reader() {
  if (in_)
    std::fclose(in_);
  f_.ctx_.memory.release(buf_.size());
}

bool SpillFile::Reader::fill() {
  size_t got = std::fread(buf_.data(), 1, buf_.size(), in_);
  if (got == 0)
    return false;
  bytes_read_ += got;
  uint64_t total = (bytes_read_ + f_.block_bytes_ - 1) / f_.block_bytes_;
  if (total > blocks_counted_) {
    f_.ctx_.io.spill_blocks_read += total - blocks_counted_;
    blocks_counted_ = total;
  }
  chunk_begin_ = 0;
  pos_ = 0;
  avail_ = got;
  return true;
}

bool SpillFile::Reader::next(Row &out) {
  if (remaining_rows_ == 0)
    return false;
  while (true) {
    size_t chunk_end = std::min(chunk_begin_ + f_.chunk_bytes_, avail_);
    if (pos_ < chunk_end && decode_row(buf_.data(), chunk_end, pos_, out)) {
      remaining_rows_--;
      return true;
    }
    if (chunk_end < avail_) { // zero-padded tail: hop to the next chunk
      chunk_begin_ = chunk_end;
      pos_ = chunk_begin_;
      continue;
    }
    if (!fill())
      return false;
  }
}

} // namespace wfopt
