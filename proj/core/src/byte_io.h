// Copyright 2026 The embshape Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian primitives shared by the binary formats.

#ifndef EMBSHAPE_SRC_BYTE_IO_H_
#define EMBSHAPE_SRC_BYTE_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "embshape/common.h"

namespace embshape {

inline std::uint32_t decode_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t decode_u64(const unsigned char* b) {
  return static_cast<std::uint64_t>(decode_u32(b)) |
         (static_cast<std::uint64_t>(decode_u32(b + 4)) << 32);
}

inline void encode_u32(std::uint32_t v, unsigned char* b) {
  b[0] = static_cast<unsigned char>(v);
  b[1] = static_cast<unsigned char>(v >> 8);
  b[2] = static_cast<unsigned char>(v >> 16);
  b[3] = static_cast<unsigned char>(v >> 24);
}

inline void decode_f32s(const unsigned char* src, std::span<float> dst) {
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = std::bit_cast<float>(decode_u32(src + 4 * i));
  }
}

// Buffered writer that reports the byte offset of a failed write.
class ByteWriter {
 public:
  explicit ByteWriter(std::ostream& out) : out_(out) {}
  ~ByteWriter() = default;

  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    buffer_.insert(buffer_.end(), p, p + n);
    if (buffer_.size() >= kFlushAt) flush();
  }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    encode_u32(v, b);
    bytes(b, 4);
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void u64(std::uint64_t v) {
    u32(static_cast<std::uint32_t>(v));
    u32(static_cast<std::uint32_t>(v >> 32));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f32s(std::span<const float> values) {
    for (float v : values) f32(v);
  }
  void flush() {
    if (buffer_.empty()) return;
    out_.write(reinterpret_cast<const char*>(buffer_.data()),
               static_cast<std::streamsize>(buffer_.size()));
    if (!out_) throw IoError("write failed", offset_);
    offset_ += buffer_.size();
    buffer_.clear();
    out_.flush();
    if (!out_) throw IoError("flush failed", offset_);
  }

 private:
  static constexpr std::size_t kFlushAt = 1 << 16;
  std::ostream& out_;
  std::vector<unsigned char> buffer_;
  std::uint64_t offset_ = 0;
};

// Reader that names the field being read when input ends early.
class ByteReader {
 public:
  ByteReader(std::istream& in, std::string format)
      : in_(in), format_(std::move(format)) {}

  void bytes(void* dst, std::size_t n, const char* field) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw FormatError(format_ + ": truncated while reading " + field +
                        " at byte " + std::to_string(offset_ + in_.gcount()));
    }
    offset_ += n;
  }
  std::uint32_t u32(const char* field) {
    unsigned char b[4];
    bytes(b, 4, field);
    return decode_u32(b);
  }
  std::int32_t i32(const char* field) {
    return static_cast<std::int32_t>(u32(field));
  }
  std::uint64_t u64(const char* field) {
    unsigned char b[8];
    bytes(b, 8, field);
    return decode_u64(b);
  }
  float f32(const char* field) { return std::bit_cast<float>(u32(field)); }
  double f64(const char* field) { return std::bit_cast<double>(u64(field)); }
  std::uint64_t offset() const { return offset_; }

 private:
  std::istream& in_;
  std::string format_;
  std::uint64_t offset_ = 0;
};

}  // namespace embshape

#endif  // EMBSHAPE_SRC_BYTE_IO_H_
