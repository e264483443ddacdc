#include "doctest.h"

#include <cstring>
#include <random>
#include <sstream>

#include "srt/array_io.hpp"
#include "srt/codec.hpp"
#include "srt/crt.hpp"
#include "srt/errors.hpp"
#include "srt/sparse.hpp"

using namespace srt;

namespace {

SparseOperator random_operator(std::size_t rows, std::size_t cols, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TripletBuilder b(rows, cols);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) {
      if (u(rng) < density) b.add(r, c, u(rng));
    }
  }
  return b.compress("random");
}

double dot(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::string serialized(const SparseOperator &op) {
  std::ostringstream out(std::ios::binary);
  serialize(op, out);
  return out.str();
}

} // namespace

TEST_CASE("1x1 transpose is itself") {
  const SparseOperator a(1, 1, {0, 1}, {0}, {2.5});
  const auto t = transpose(a);
  CHECK(t == a);
  CHECK(t.values()[0] == 2.5);
}

TEST_CASE("canonical form is enforced") {
  CHECK_THROWS_AS(SparseOperator(2, 1, {0, 2}, {1, 0}, {1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(SparseOperator(2, 1, {0, 2}, {0, 0}, {1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(SparseOperator(2, 1, {0, 1}, {2}, {1.0}), ValidationError);
  CHECK_THROWS_AS(SparseOperator(2, 1, {0, 1}, {0}, {-1.0}), ValidationError);
  CHECK_THROWS_AS(SparseOperator(2, 1, {1, 1}, {0}, {1.0}), ValidationError);
}

TEST_CASE("triplet builder sums duplicates and sorts rows") {
  TripletBuilder b(3, 2);
  b.add(2, 0, 1.0);
  b.add(0, 0, 2.0);
  b.add(2, 0, 0.5);
  b.add(1, 1, 4.0);
  CHECK_THROWS_AS(b.add(3, 0, 1.0), IndexError);
  const auto a = b.compress();
  CHECK(a.nnz() == 3);
  CHECK(a.column_pointers() == std::vector<std::size_t>{0, 2, 3});
  CHECK(a.row_indices() == std::vector<std::size_t>{0, 2, 1});
  CHECK(a.values() == std::vector<double>{2.0, 1.5, 4.0});
}

TEST_CASE("transpose and row gather agree with the dot identity") {
  const auto a = random_operator(37, 53, 0.1, 7);
  const auto t = transpose(a);
  CHECK(t.nnz() == a.nnz());
  CHECK(t.n_rows() == a.n_cols());
  CHECK(transpose(t) == a);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  std::vector<double> x(53), y(37), ax(37), aty(53), aty2(53);
  for (double &v : x) v = n(rng);
  for (double &v : y) v = n(rng);
  a.apply(x, ax);
  a.apply_transpose(y, aty);
  t.apply(y, aty2);
  const double lhs = dot(ax, y), rhs = dot(x, aty);
  CHECK(std::abs(lhs - rhs) / (std::sqrt(dot(ax, ax)) * std::sqrt(dot(y, y))) <= 1e-12);
  for (std::size_t i = 0; i < aty.size(); ++i) CHECK(aty[i] == doctest::Approx(aty2[i]).epsilon(1e-14));

  std::vector<double> acc(ax);
  a.apply_add(x, acc);
  for (std::size_t i = 0; i < acc.size(); ++i) CHECK(acc[i] == doctest::Approx(2.0 * ax[i]).epsilon(1e-14));
}

TEST_CASE("built matrix round-trips bit-identically") {
  const VoxelGrid3D g = VoxelGrid3D::centered(16, 8, 1.0);
  const std::vector<double> radii{0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  const auto a = build_xy_crt(g, Vec2{3.0, -1.0}, radii, {});
  const std::string bytes = serialized(a);
  std::istringstream in(bytes, std::ios::binary);
  const auto b = deserialize(in);
  CHECK(b == a);
  CHECK(b.description() == a.description());
  CHECK(std::memcmp(a.values().data(), b.values().data(), a.nnz() * sizeof(double)) == 0);
  CHECK(serialized(b) == bytes);
}

TEST_CASE("empty matrix round-trips") {
  const auto a = SparseOperator::empty(5, 3);
  CHECK(a.nnz() == 0);
  std::istringstream in(serialized(a), std::ios::binary);
  const auto b = deserialize(in);
  CHECK(b == a);
  CHECK(b.n_rows() == 5);
  CHECK(b.n_cols() == 3);
}

TEST_CASE("corrupted or truncated matrix streams are format errors") {
  const auto a = random_operator(10, 10, 0.3, 3);
  const std::string good = serialized(a);

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  std::istringstream in1(bad_magic, std::ios::binary);
  CHECK_THROWS_AS(deserialize(in1), FormatError);

  std::string bad_header = good;
  bad_header[8] ^= 0x01; // n_rows
  std::istringstream in2(bad_header, std::ios::binary);
  CHECK_THROWS_AS(deserialize(in2), FormatError);

  std::string bad_value = good;
  bad_value[good.size() / 2] ^= 0x40;
  std::istringstream in3(bad_value, std::ios::binary);
  CHECK_THROWS_AS(deserialize(in3), FormatError);

  for (std::size_t cut : {std::size_t{0}, std::size_t{7}, std::size_t{20}, good.size() - 1}) {
    std::istringstream in(good.substr(0, cut), std::ios::binary);
    CHECK_THROWS_AS(deserialize(in), FormatError);
  }
}

TEST_CASE("array codec round-trips and checks dims") {
  const VoxelGrid3D g(3, 2, 1.0, {});
  std::vector<double> v(g.voxel_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(static_cast<double>(i)) * 1e-3;
  const Image3D f(g, v);
  const auto arr = to_array(f);
  CHECK(arr.dims == std::vector<std::uint64_t>{3, 3, 2});

  std::stringstream s(std::ios::in | std::ios::out | std::ios::binary);
  codec::write_array(arr, s);
  const auto back = codec::read_array(s);
  CHECK(back.dims == arr.dims);
  CHECK(std::memcmp(back.data.data(), v.data(), v.size() * sizeof(double)) == 0);
  CHECK(image_from_array(back, g).values() == v);

  const VoxelGrid3D other(3, 3, 1.0, {});
  try {
    image_from_array(back, other);
    FAIL("expected DimensionError");
  } catch (const DimensionError &e) {
    CHECK(std::string(e.what()).find("m_z") != std::string::npos);
  }

  codec::Array empty{{0}, {}};
  std::stringstream s2(std::ios::in | std::ios::out | std::ios::binary);
  codec::write_array(empty, s2);
  CHECK(codec::read_array(s2).data.empty());

  std::string bytes;
  {
    std::ostringstream o(std::ios::binary);
    codec::write_array(arr, o);
    bytes = o.str();
  }
  bytes[bytes.size() - 12] ^= 0x10;
  std::istringstream in(bytes, std::ios::binary);
  CHECK_THROWS_AS(codec::read_array(in), FormatError);
}

TEST_CASE("missing files are io errors") {
  CHECK_THROWS_AS(read_operator("/nonexistent/dir/a.srtcrt"), IoError);
  CHECK_THROWS_AS(codec::read_array_file("/nonexistent/dir/a.srtarr"), IoError);
}
