#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

#include "geolink/error.hpp"

namespace geolink {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

/// 64-bit FNV-1a, used for artifact content hashes and file checksums.
class Fnv1a {
 public:
  void update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::string hex64(std::uint64_t v);

/// Writes little-endian PODs and length-prefixed strings while hashing every byte.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    hash_.update(data, n);
  }
  template <class T>
    requires std::is_arithmetic_v<T>
  void pod(T v) {
    bytes(&v, sizeof v);
  }
  template <class T>
  void array(std::span<const T> values) {
    bytes(values.data(), values.size_bytes());
  }
  void string(std::string_view s) {
    pod<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::uint64_t checksum() const { return hash_.digest(); }

 private:
  std::ostream& out_;
  Fnv1a hash_;
};

/// Mirror of BinaryWriter; any short read raises FormatError naming `what`.
class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError(what_ + ": truncated file");
    hash_.update(data, n);
  }
  template <class T>
    requires std::is_arithmetic_v<T>
  T pod() {
    T v{};
    bytes(&v, sizeof v);
    return v;
  }
  template <class T>
  void array(std::span<T> values) {
    bytes(values.data(), values.size_bytes());
  }
  std::string string(std::size_t max_len = 1u << 20) {
    const auto n = pod<std::uint32_t>();
    if (n > max_len) throw FormatError(what_ + ": corrupt string length");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  void expect_magic(std::string_view magic) {
    std::string got(magic.size(), '\0');
    bytes(got.data(), got.size());
    if (got != magic) throw FormatError(what_ + ": bad magic (not a " + std::string(magic) + " file)");
  }
  /// Reads the trailing checksum written by the writer and compares.
  void verify_checksum() {
    const auto expected = hash_.digest();
    std::uint64_t stored = 0;
    in_.read(reinterpret_cast<char*>(&stored), sizeof stored);
    if (static_cast<std::size_t>(in_.gcount()) != sizeof stored) throw FormatError(what_ + ": truncated file");
    if (stored != expected) throw FormatError(what_ + ": checksum mismatch");
  }
  const std::string& what() const { return what_; }

 private:
  std::istream& in_;
  std::string what_;
  Fnv1a hash_;
};

inline void write_checksum(std::ostream& out, const BinaryWriter& w) {
  const auto c = w.checksum();
  out.write(reinterpret_cast<const char*>(&c), sizeof c);
}

}  // namespace geolink
