#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace srt {

// Immutable compressed-sparse-column matrix.
//
// Canonical form is enforced at construction: column pointers start at 0 and
// end at nnz, row indices are strictly increasing within each column, and all
// values are finite and non-negative (CRT weights are arc lengths, in meters).
class SparseOperator {
public:
  SparseOperator(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> column_pointers,
                 std::vector<std::size_t> row_indices, std::vector<double> values, std::string description = {});

  // All-zero matrix.
  static SparseOperator empty(std::size_t n_rows, std::size_t n_cols, std::string description = {});

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_cols() const noexcept { return n_cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }
  const std::vector<std::size_t> &column_pointers() const noexcept { return column_pointers_; }
  const std::vector<std::size_t> &row_indices() const noexcept { return row_indices_; }
  const std::vector<double> &values() const noexcept { return values_; }
  const std::string &description() const noexcept { return description_; }

  // y = A x, by column scatter.
  void apply(std::span<const double> x, std::span<double> y) const;
  // y += A x
  void apply_add(std::span<const double> x, std::span<double> y) const;
  // x = A^T y, by row gather on the same CSC storage.
  void apply_transpose(std::span<const double> y, std::span<double> x) const;

  std::vector<double> row_sums() const;
  std::size_t storage_bytes() const noexcept;

  // Bit-identical structure and values; the description is ignored.
  friend bool operator==(const SparseOperator &a, const SparseOperator &b) noexcept;

private:
  std::size_t n_rows_;
  std::size_t n_cols_;
  std::vector<std::size_t> column_pointers_;
  std::vector<std::size_t> row_indices_;
  std::vector<double> values_;
  std::string description_;
};

// Exact structural transpose.
SparseOperator transpose(const SparseOperator &op);

// Accumulates (row, col, value) triplets and compresses them to canonical
// CSC. Duplicates are summed in insertion order so the result is
// deterministic for a fixed insertion sequence.
class TripletBuilder {
public:
  TripletBuilder(std::size_t n_rows, std::size_t n_cols);

  void reserve(std::size_t n) { entries_.reserve(n); }
  void add(std::size_t row, std::size_t col, double value);
  std::size_t size() const noexcept { return entries_.size(); }

  SparseOperator compress(std::string description = {}) const;

private:
  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };
  std::size_t n_rows_;
  std::size_t n_cols_;
  std::vector<Entry> entries_;
};

// Matrix cache codec: "SRTCRT1\0", u64 n_rows, n_cols, nnz, column_pointers,
// row_indices, f64 values, u64 checksum of all preceding bytes, then the
// description as u64 length + UTF-8 bytes. All integers little-endian.
void serialize(const SparseOperator &op, std::ostream &out);
SparseOperator deserialize(std::istream &in);

void write_operator(const SparseOperator &op, const std::string &path);
SparseOperator read_operator(const std::string &path);

} // namespace srt
