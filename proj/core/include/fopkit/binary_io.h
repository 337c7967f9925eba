#pragma once

// Little-endian primitives for the store and checkpoint formats. The reader
// tracks its byte offset so that truncation and corruption errors can say
// exactly where parsing stopped.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fopkit::io {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v);
  void raw(std::string_view bytes) { buf_.append(bytes); }
  // u32 length prefix followed by the bytes.
  void str(std::string_view s);

  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes, std::string source = "<memory>")
      : bytes_(bytes), source_(std::move(source)) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64();
  std::string raw(std::size_t n);
  std::string str();

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }
  const std::string& source() const { return source_; }

  // Throws DataError naming the source and current byte offset.
  [[noreturn]] void fail(const std::string& what) const;

 private:
  void need(std::size_t n, const char* what);

  std::string_view bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace fopkit::io
