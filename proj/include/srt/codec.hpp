#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace srt::codec {

using Magic = std::array<char, 8>;

inline constexpr Magic kMatrixMagic = {'S', 'R', 'T', 'C', 'R', 'T', '1', '\0'};
inline constexpr Magic kArrayMagic = {'S', 'R', 'T', 'A', 'R', 'R', '1', '\0'};

// 64-bit FNV-1a.
std::uint64_t checksum(std::span<const std::uint8_t> bytes) noexcept;

class ByteWriter {
public:
  void magic(const Magic &m);
  void u64(std::uint64_t v);
  void f64(double v);
  void bytes(std::string_view s);

  const std::vector<std::uint8_t> &buffer() const noexcept { return buf_; }
  // Appends the checksum of everything written so far.
  void seal() { u64(checksum(buf_)); }

private:
  std::vector<std::uint8_t> buf_;
};

// Bounds-checked reader; every failure is a FormatError.
class ByteReader {
public:
  explicit ByteReader(std::vector<std::uint8_t> data) : data_(std::move(data)) {}

  void expect_magic(const Magic &m);
  std::uint64_t u64();
  double f64();
  std::string bytes(std::size_t n);

  // Reads the stored checksum and compares it with the bytes before it.
  void verify_checksum();
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

private:
  void need(std::size_t n) const;
  std::vector<std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_all(std::istream &in);
void write_all(std::ostream &out, const std::vector<std::uint8_t> &bytes);

// Dense arrays: "SRTARR1\0", u64 rank, u64 dims[rank] (fastest-varying
// first), f64 data, u64 checksum.
struct Array {
  std::vector<std::uint64_t> dims;
  std::vector<double> data;
};

void write_array(const Array &array, std::ostream &out);
Array read_array(std::istream &in);
void write_array_file(const Array &array, const std::string &path);
Array read_array_file(const std::string &path);

} // namespace srt::codec
