#include "romef/binary_io.hpp"

#include <array>
#include <bit>

#include "romef/errors.hpp"

namespace romef {

namespace {

std::array<unsigned char, 8> le_bytes(std::uint64_t v) {
  std::array<unsigned char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  return b;
}

std::uint64_t from_le(const unsigned char* b, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void BinaryWriter::bytes(const void* p, std::size_t n) { os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }

void BinaryWriter::u32(std::uint32_t v) { bytes(le_bytes(v).data(), 4); }

void BinaryWriter::u64(std::uint64_t v) { bytes(le_bytes(v).data(), 8); }

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::str(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes(s.data(), s.size());
}

void BinaryWriter::f64_array(const double* p, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    bytes(p, n * sizeof(double));
  } else {
    for (std::size_t i = 0; i < n; ++i) f64(p[i]);
  }
}

void BinaryReader::fail(const std::string& msg) const { throw FormatError(what_ + ": " + msg); }

void BinaryReader::bytes(void* p, std::size_t n) {
  is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is_.gcount()) != n) fail("truncated file");
}

std::uint32_t BinaryReader::u32() {
  unsigned char b[4];
  bytes(b, 4);
  return static_cast<std::uint32_t>(from_le(b, 4));
}

std::uint64_t BinaryReader::u64() {
  unsigned char b[8];
  bytes(b, 8);
  return from_le(b, 8);
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::str(std::size_t max_len) {
  const std::uint32_t n = u32();
  if (n > max_len) fail("string length " + std::to_string(n) + " out of range");
  std::string s(n, '\0');
  bytes(s.data(), n);
  return s;
}

void BinaryReader::f64_array(double* p, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    bytes(p, n * sizeof(double));
  } else {
    for (std::size_t i = 0; i < n; ++i) p[i] = f64();
  }
}

void BinaryReader::expect_magic(const std::string& magic) {
  std::string got(magic.size(), '\0');
  is_.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (static_cast<std::size_t>(is_.gcount()) != got.size() || got != magic) fail("bad magic, not a " + magic + " file");
}

}  // namespace romef
