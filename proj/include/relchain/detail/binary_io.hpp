#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "relchain/errors.hpp"

namespace relchain::detail {

// Little-endian primitives for the on-disk formats.

template <typename UInt>
UInt to_little_endian(UInt v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    UInt out = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
      out = static_cast<UInt>((out << 8) | (v & 0xff));
      v = static_cast<UInt>(v >> 8);
    }
    return out;
  }
}

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void magic(std::string_view tag) { out_.write(tag.data(), static_cast<std::streamsize>(tag.size())); }

  template <typename UInt>
  void uint(UInt v) {
    v = to_little_endian(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }

  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }

  /// u16 byte length followed by the raw bytes.
  void short_string(std::string_view s) {
    if (s.size() > 0xffff) throw Error("token longer than 65535 bytes: " + std::string(s.substr(0, 32)));
    uint(static_cast<std::uint16_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  void expect_magic(std::string_view tag) {
    std::array<char, 8> buf{};
    read_raw(buf.data(), tag.size(), "magic");
    if (std::string_view(buf.data(), tag.size()) != tag) fail("bad magic, expected " + std::string(tag));
  }

  template <typename UInt>
  UInt uint(const char* what) {
    UInt v;
    read_raw(&v, sizeof v, what);
    return to_little_endian(v);
  }

  float f32(const char* what) { return std::bit_cast<float>(uint<std::uint32_t>(what)); }
  double f64(const char* what) { return std::bit_cast<double>(uint<std::uint64_t>(what)); }

  std::string short_string(const char* what) {
    auto len = uint<std::uint16_t>(what);
    std::string s(len, '\0');
    read_raw(s.data(), len, what);
    return s;
  }

  /// Throws unless the stream is exhausted.
  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) fail("trailing bytes after last record");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, 0, what); }

 private:
  void read_raw(void* dst, std::size_t n, const char* what) {
    if (n == 0) return;
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail(std::string("truncated while reading ") + what);
  }

  std::istream& in_;
  std::string source_;
};

}  // namespace relchain::detail
