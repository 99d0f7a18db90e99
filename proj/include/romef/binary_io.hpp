#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace romef {

/// Little-endian primitive writer, independent of the host byte order.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& os) : os_(os) {}

  void bytes(const void* p, std::size_t n);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void str(const std::string& s);
  void f64_array(const double* p, std::size_t n);

 private:
  std::ostream& os_;
};

/// Counterpart of BinaryWriter. Every short read throws FormatError naming
/// the artifact, so a truncated file never yields a partial object.
class BinaryReader {
 public:
  BinaryReader(std::istream& is, std::string what) : is_(is), what_(std::move(what)) {}

  void bytes(void* p, std::size_t n);
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string str(std::size_t max_len = 1 << 20);
  void f64_array(double* p, std::size_t n);

  /// Reads `magic.size()` bytes and compares.
  void expect_magic(const std::string& magic);
  [[noreturn]] void fail(const std::string& msg) const;

 private:
  std::istream& is_;
  std::string what_;
};

}  // namespace romef
