#include "srt/sparse.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "srt/codec.hpp"
#include "srt/errors.hpp"

namespace srt {

SparseOperator::SparseOperator(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> column_pointers,
                               std::vector<std::size_t> row_indices, std::vector<double> values,
                               std::string description)
    : n_rows_(n_rows), n_cols_(n_cols), column_pointers_(std::move(column_pointers)),
      row_indices_(std::move(row_indices)), values_(std::move(values)), description_(std::move(description)) {
  if (column_pointers_.size() != n_cols_ + 1) throw ValidationError("column_pointers must have n_cols+1 entries");
  if (row_indices_.size() != values_.size()) throw ValidationError("row_indices and values differ in length");
  if (column_pointers_.front() != 0 || column_pointers_.back() != values_.size()) {
    throw ValidationError("column_pointers must start at 0 and end at nnz");
  }
  for (std::size_t j = 0; j < n_cols_; ++j) {
    const std::size_t begin = column_pointers_[j];
    const std::size_t end = column_pointers_[j + 1];
    if (end < begin) throw ValidationError("column_pointers not monotone");
    for (std::size_t p = begin; p < end; ++p) {
      if (row_indices_[p] >= n_rows_) throw ValidationError("row index out of range");
      if (p > begin && row_indices_[p] <= row_indices_[p - 1]) {
        throw ValidationError("row indices not strictly increasing within column");
      }
    }
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("values must be finite and non-negative");
  }
}

SparseOperator SparseOperator::empty(std::size_t n_rows, std::size_t n_cols, std::string description) {
  return SparseOperator(n_rows, n_cols, std::vector<std::size_t>(n_cols + 1, 0), {}, {}, std::move(description));
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (y.size() != n_rows_) throw DimensionError("apply: output length mismatch");
  std::fill(y.begin(), y.end(), 0.0);
  apply_add(x, y);
}

void SparseOperator::apply_add(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_cols_) throw DimensionError("apply: input length mismatch");
  if (y.size() != n_rows_) throw DimensionError("apply: output length mismatch");
  const std::size_t *ptr = column_pointers_.data();
  const std::size_t *rows = row_indices_.data();
  const double *vals = values_.data();
  for (std::size_t j = 0; j < n_cols_; ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    for (std::size_t p = ptr[j]; p < ptr[j + 1]; ++p) y[rows[p]] += vals[p] * xj;
  }
}

void SparseOperator::apply_transpose(std::span<const double> y, std::span<double> x) const {
  if (y.size() != n_rows_) throw DimensionError("apply_transpose: input length mismatch");
  if (x.size() != n_cols_) throw DimensionError("apply_transpose: output length mismatch");
  const std::size_t *ptr = column_pointers_.data();
  const std::size_t *rows = row_indices_.data();
  const double *vals = values_.data();
  for (std::size_t j = 0; j < n_cols_; ++j) {
    double acc = 0.0;
    for (std::size_t p = ptr[j]; p < ptr[j + 1]; ++p) acc += vals[p] * y[rows[p]];
    x[j] = acc;
  }
}

std::vector<double> SparseOperator::row_sums() const {
  std::vector<double> sums(n_rows_, 0.0);
  for (std::size_t p = 0; p < values_.size(); ++p) sums[row_indices_[p]] += values_[p];
  return sums;
}

std::size_t SparseOperator::storage_bytes() const noexcept {
  return sizeof(std::size_t) * (column_pointers_.size() + row_indices_.size()) + sizeof(double) * values_.size();
}

bool operator==(const SparseOperator &a, const SparseOperator &b) noexcept {
  if (a.n_rows_ != b.n_rows_ || a.n_cols_ != b.n_cols_ || a.column_pointers_ != b.column_pointers_ ||
      a.row_indices_ != b.row_indices_ || a.values_.size() != b.values_.size()) {
    return false;
  }
  // Bitwise comparison so that -0.0/0.0 or NaN payloads are not conflated.
  return std::equal(a.values_.begin(), a.values_.end(), b.values_.begin(), [](double u, double v) {
    return std::bit_cast<std::uint64_t>(u) == std::bit_cast<std::uint64_t>(v);
  });
}

SparseOperator transpose(const SparseOperator &op) {
  const std::size_t n_rows = op.n_rows();
  const std::size_t n_cols = op.n_cols();
  const auto &ptr = op.column_pointers();
  const auto &rows = op.row_indices();
  const auto &vals = op.values();

  std::vector<std::size_t> t_ptr(n_rows + 1, 0);
  for (std::size_t r : rows) ++t_ptr[r + 1];
  for (std::size_t r = 0; r < n_rows; ++r) t_ptr[r + 1] += t_ptr[r];

  std::vector<std::size_t> next(t_ptr.begin(), t_ptr.end() - 1);
  std::vector<std::size_t> t_rows(op.nnz());
  std::vector<double> t_vals(op.nnz());
  for (std::size_t j = 0; j < n_cols; ++j) {
    for (std::size_t p = ptr[j]; p < ptr[j + 1]; ++p) {
      const std::size_t q = next[rows[p]]++;
      t_rows[q] = j;
      t_vals[q] = vals[p];
    }
  }
  return SparseOperator(n_cols, n_rows, std::move(t_ptr), std::move(t_rows), std::move(t_vals),
                        op.description().empty() ? std::string{} : "transpose of " + op.description());
}

TripletBuilder::TripletBuilder(std::size_t n_rows, std::size_t n_cols) : n_rows_(n_rows), n_cols_(n_cols) {}

void TripletBuilder::add(std::size_t row, std::size_t col, double value) {
  if (row >= n_rows_ || col >= n_cols_) throw IndexError("triplet index out of range");
  entries_.push_back(Entry{row, col, value});
}

SparseOperator TripletBuilder::compress(std::string description) const {
  // Two stable counting sorts (row, then column) give (col, row) order with
  // duplicates kept in insertion order.
  std::vector<std::size_t> by_row(entries_.size());
  {
    std::vector<std::size_t> offset(n_rows_ + 1, 0);
    for (const auto &e : entries_) ++offset[e.row + 1];
    for (std::size_t r = 0; r < n_rows_; ++r) offset[r + 1] += offset[r];
    for (std::size_t n = 0; n < entries_.size(); ++n) by_row[offset[entries_[n].row]++] = n;
  }
  std::vector<std::size_t> order(entries_.size());
  std::vector<std::size_t> col_count(n_cols_ + 1, 0);
  for (const auto &e : entries_) ++col_count[e.col + 1];
  for (std::size_t c = 0; c < n_cols_; ++c) col_count[c + 1] += col_count[c];
  {
    std::vector<std::size_t> offset(col_count.begin(), col_count.end() - 1);
    for (std::size_t n : by_row) order[offset[entries_[n].col]++] = n;
  }

  std::vector<std::size_t> ptr(n_cols_ + 1, 0);
  std::vector<std::size_t> rows;
  std::vector<double> vals;
  rows.reserve(entries_.size());
  vals.reserve(entries_.size());
  for (std::size_t c = 0; c < n_cols_; ++c) {
    const std::size_t column_start = rows.size();
    for (std::size_t q = col_count[c]; q < col_count[c + 1]; ++q) {
      const Entry &e = entries_[order[q]];
      if (rows.size() > column_start && rows.back() == e.row) {
        vals.back() += e.value;
      } else {
        rows.push_back(e.row);
        vals.push_back(e.value);
      }
    }
    ptr[c + 1] = rows.size();
  }
  return SparseOperator(n_rows_, n_cols_, std::move(ptr), std::move(rows), std::move(vals), std::move(description));
}

void serialize(const SparseOperator &op, std::ostream &out) {
  codec::ByteWriter w;
  w.magic(codec::kMatrixMagic);
  w.u64(op.n_rows());
  w.u64(op.n_cols());
  w.u64(op.nnz());
  for (auto p : op.column_pointers()) w.u64(p);
  for (auto r : op.row_indices()) w.u64(r);
  for (auto v : op.values()) w.f64(v);
  w.seal();
  w.u64(op.description().size());
  w.bytes(op.description());
  codec::write_all(out, w.buffer());
}

SparseOperator deserialize(std::istream &in) {
  codec::ByteReader r(codec::read_all(in));
  r.expect_magic(codec::kMatrixMagic);
  const auto n_rows = r.u64();
  const auto n_cols = r.u64();
  const auto nnz = r.u64();
  // Size sanity before allocating: every array element is 8 bytes.
  if (n_cols >= r.remaining() / 8 || nnz > r.remaining() / 16) throw FormatError("truncated stream");
  std::vector<std::size_t> ptr(n_cols + 1);
  for (auto &p : ptr) p = r.u64();
  std::vector<std::size_t> rows(nnz);
  for (auto &x : rows) x = r.u64();
  std::vector<double> vals(nnz);
  for (auto &v : vals) v = r.f64();
  r.verify_checksum();
  const auto len = r.u64();
  std::string description = r.bytes(len);
  try {
    return SparseOperator(n_rows, n_cols, std::move(ptr), std::move(rows), std::move(vals), std::move(description));
  } catch (const ValidationError &e) {
    throw FormatError(std::string("invalid matrix: ") + e.what());
  }
}

void write_operator(const SparseOperator &op, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  serialize(op, out);
}

SparseOperator read_operator(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return deserialize(in);
}

} // namespace srt
