// Copyright 2026 The fsvc Authors
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

// Little-endian binary stream helpers shared by the file-format readers.

#ifndef FSVC_SRC_BINARY_IO_HPP_
#define FSVC_SRC_BINARY_IO_HPP_

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsvc::io::detail {

class Writer {
 public:
  explicit Writer(const std::string& path)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  }

  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }
  void u16(std::uint16_t v) { le(v); }
  void u32(std::uint32_t v) { le(v); }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    le(bits);
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    le(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }

  void finish() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + path_);
  }

 private:
  template <typename T>
  void le(T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf[i] = static_cast<unsigned char>(v >> (8 * i));
    }
    bytes(buf, sizeof(T));
  }

  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  Reader(const std::string& path, const char* format_name)
      : path_(path), format_(format_name) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error(err("cannot open file"));
    const std::streamsize size = in.tellg();
    in.seekg(0);
    buf_.resize(static_cast<std::size_t>(size));
    in.read(reinterpret_cast<char*>(buf_.data()), size);
    if (!in) throw std::runtime_error(err("read failed"));
  }

  std::size_t remaining() const { return buf_.size() - pos_; }

  void bytes(void* dst, std::size_t n, const char* what) {
    require(n, what);
    std::memcpy(dst, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::uint16_t u16(const char* what) { return le<std::uint16_t>(what); }
  std::uint32_t u32(const char* what) { return le<std::uint32_t>(what); }
  float f32(const char* what) {
    const std::uint32_t bits = le<std::uint32_t>(what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  double f64(const char* what) {
    const std::uint64_t bits = le<std::uint64_t>(what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str(std::uint32_t max_len, const char* what) {
    const std::uint32_t n = u32(what);
    if (n > max_len) {
      throw std::runtime_error(err(std::string(what) + " length " +
                                   std::to_string(n) + " exceeds limit " +
                                   std::to_string(max_len)));
    }
    require(n, what);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void require(std::size_t n, const char* what) {
    if (remaining() < n) {
      throw std::runtime_error(err(std::string("truncated at ") + what +
                                   ": need " + std::to_string(n) +
                                   " bytes, have " +
                                   std::to_string(remaining())));
    }
  }

  void expect_end() {
    if (remaining() != 0) {
      throw std::runtime_error(
          err(std::to_string(remaining()) + " trailing bytes"));
    }
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw std::runtime_error(err(msg));
  }

 private:
  template <typename T>
  T le(const char* what) {
    require(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(buf_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }

  std::string err(const std::string& msg) const {
    return std::string(format_) + " " + path_ + ": " + msg;
  }

  std::string path_;
  const char* format_;
  std::vector<unsigned char> buf_;
  std::size_t pos_ = 0;
};

}  // namespace fsvc::io::detail

#endif  // FSVC_SRC_BINARY_IO_HPP_
