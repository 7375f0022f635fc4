// Copyright 2026 The CDST Authors.
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

#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "cdst/errors.hpp"
#include "cdst/tensor.hpp"

namespace cdst::io {

/// Little-endian primitive writer.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& os) : os_(os) {}

  void u8(std::uint8_t v) { os_.put(char(v)); }
  void u32(std::uint32_t v) { uint(v, 4); }
  void u64(std::uint64_t v) { uint(v, 8); }
  void i64(std::int64_t v) { uint(std::uint64_t(v), 8); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    uint(bits, 8);
  }
  void bytes(const char* p, std::size_t n) { os_.write(p, std::streamsize(n)); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  void tensor(const Tensor& t) {
    u64(t.rank());
    for (auto e : t.shape()) u64(e);
    for (double v : t.values()) f64(v);
  }

 private:
  void uint(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) os_.put(char((v >> (8 * i)) & 0xff));
  }
  std::ostream& os_;
};

class BinaryReader {
 public:
  BinaryReader(std::istream& is, std::string name) : is_(is), name_(std::move(name)) {}

  std::uint8_t u8() { return std::uint8_t(uint(1)); }
  std::uint32_t u32() { return std::uint32_t(uint(4)); }
  std::uint64_t u64() { return uint(8); }
  std::int64_t i64() { return std::int64_t(uint(8)); }
  double f64() {
    const std::uint64_t bits = uint(8);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  void bytes(char* p, std::size_t n) {
    is_.read(p, std::streamsize(n));
    if (std::size_t(is_.gcount()) != n) fail(n);
    offset_ += n;
  }
  std::string str() {
    const auto n = u64();
    if (n > (1u << 30)) throw IoError(name_ + ": implausible string length at byte offset " + std::to_string(offset_));
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  Tensor tensor() {
    const auto rank = u64();
    if (rank == 0 || rank > 8) throw IoError(name_ + ": bad tensor rank at byte offset " + std::to_string(offset_));
    Shape shape;
    for (std::uint64_t i = 0; i < rank; ++i) shape.push_back(std::size_t(u64()));
    Tensor t(shape);
    for (double& v : t.values()) v = f64();
    return t;
  }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t uint(int width) {
    unsigned char buf[8];
    bytes(reinterpret_cast<char*>(buf), std::size_t(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t(buf[i]) << (8 * i);
    return v;
  }
  [[noreturn]] void fail(std::size_t n) const {
    throw IoError(name_ + ": truncated at byte offset " + std::to_string(offset_) + " (needed " + std::to_string(n) +
                  " more bytes)");
  }

  std::istream& is_;
  std::string name_;
  std::size_t offset_ = 0;
};

/// FNV-1a over raw bytes.
class Fnv1a {
 public:
  void add(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= b[i];
      h_ *= 1099511628211ull;
    }
  }
  template <class T>
  void add_value(const T& v) {
    add(&v, sizeof v);
  }
  std::uint64_t value() const noexcept { return h_; }

 private:
  std::uint64_t h_ = 1469598103934665603ull;
};

}  // namespace cdst::io
