#include "srt/codec.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include "srt/errors.hpp"

namespace srt::codec {

std::uint64_t checksum(std::span<const std::uint8_t> bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void ByteWriter::magic(const Magic &m) {
  buf_.insert(buf_.end(), m.begin(), m.end());
}

void ByteWriter::u64(std::uint64_t v) {
  for (int b = 0; b < 8; ++b) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

void ByteReader::need(std::size_t n) const {
  if (n > data_.size() - pos_) throw FormatError("truncated stream");
}

void ByteReader::expect_magic(const Magic &m) {
  need(m.size());
  if (std::memcmp(data_.data() + pos_, m.data(), m.size()) != 0) throw FormatError("magic number mismatch");
  pos_ += m.size();
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(data_[pos_ + b]) << (8 * b);
  pos_ += 8;
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::bytes(std::size_t n) {
  need(n);
  std::string s(reinterpret_cast<const char *>(data_.data() + pos_), n);
  pos_ += n;
  return s;
}

void ByteReader::verify_checksum() {
  const std::size_t end = pos_;
  const std::uint64_t stored = u64();
  if (stored != checksum(std::span(data_.data(), end))) throw FormatError("checksum mismatch");
}

std::vector<std::uint8_t> read_all(std::istream &in) {
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_all(std::ostream &out, const std::vector<std::uint8_t> &bytes) {
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed");
}

void write_array(const Array &array, std::ostream &out) {
  std::uint64_t expected = 1;
  for (auto d : array.dims) expected *= d;
  if (expected != array.data.size()) throw DimensionError("array dims do not match data length");
  ByteWriter w;
  w.magic(kArrayMagic);
  w.u64(array.dims.size());
  for (auto d : array.dims) w.u64(d);
  for (double v : array.data) w.f64(v);
  w.seal();
  write_all(out, w.buffer());
}

Array read_array(std::istream &in) {
  ByteReader r(read_all(in));
  r.expect_magic(kArrayMagic);
  const auto rank = r.u64();
  if (rank > r.remaining() / 8) throw FormatError("truncated stream");
  Array a;
  std::uint64_t count = 1;
  for (std::uint64_t n = 0; n < rank; ++n) {
    a.dims.push_back(r.u64());
    if (a.dims.back() != 0 && count > r.remaining() / a.dims.back()) throw FormatError("truncated stream");
    count *= a.dims.back();
  }
  if (count > r.remaining() / 8) throw FormatError("truncated stream");
  a.data.resize(count);
  for (auto &v : a.data) v = r.f64();
  r.verify_checksum();
  return a;
}

void write_array_file(const Array &array, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_array(array, out);
}

Array read_array_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_array(in);
}

} // namespace srt::codec
