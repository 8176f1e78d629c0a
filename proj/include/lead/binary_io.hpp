// Copyright 2026 The LEAD Toolkit Authors.
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

// Little-endian scalar streams shared by the feature, weight and checkpoint
// formats.

#ifndef LEAD_BINARY_IO_HPP
#define LEAD_BINARY_IO_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>

#include "lead/errors.hpp"

namespace lead::binary {

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
  }
}

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(Errc::IoError, "cannot open '" + path + "' for writing");
  }

  void bytes(std::string_view raw) { out_.write(raw.data(), static_cast<std::streamsize>(raw.size())); }

  template <typename T>
  void put(T value) {
    value = to_little(value);
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }

  void close() {
    out_.close();
    if (!out_) throw Error(Errc::IoError, "failed writing '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw Error(Errc::IoError, "cannot open '" + path + "'");
  }

  std::string bytes(std::size_t n) {
    std::string raw(n, '\0');
    in_.read(raw.data(), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) truncated();
    return raw;
  }

  template <typename T>
  T get() {
    T value;
    in_.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (in_.gcount() != static_cast<std::streamsize>(sizeof(T))) truncated();
    return to_little(value);
  }

  /// Bytes left after the current position.
  std::uint64_t remaining() {
    const auto here = in_.tellg();
    in_.seekg(0, std::ios::end);
    const auto end = in_.tellg();
    in_.seekg(here);
    return static_cast<std::uint64_t>(end - here);
  }

  void require(std::uint64_t n) {
    if (remaining() < n) truncated();
  }

  void expect_magic(std::string_view magic) {
    std::string raw(magic.size(), '\0');
    in_.read(raw.data(), static_cast<std::streamsize>(magic.size()));
    if (static_cast<std::size_t>(in_.gcount()) != magic.size() || raw != magic) {
      throw Error(Errc::BadMagic, "'" + path_ + "' does not start with " + std::string(magic));
    }
  }

 private:
  [[noreturn]] void truncated() { throw Error(Errc::TruncatedFile, "'" + path_ + "' ended early"); }

  std::string path_;
  std::ifstream in_;
};

}  // namespace lead::binary

#endif  // LEAD_BINARY_IO_HPP
