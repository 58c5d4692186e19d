#include "repspace/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "repspace/error.hpp"

namespace repspace {

EmbeddingMatrix::EmbeddingMatrix(Matrix rows) : m_(std::move(rows)) {
  if (m_.rows() < 1) throw Error(ErrorKind::invalid_argument, "EmbeddingMatrix: n must be >= 1");
  if (m_.cols() < 2) throw Error(ErrorKind::invalid_argument, "EmbeddingMatrix: d must be >= 2");
  if (!m_.all_finite()) throw Error(ErrorKind::non_finite, "EmbeddingMatrix: non-finite entry");
  for (std::size_t i = 0; i < m_.rows(); ++i) {
    const double norm = std::sqrt(squared_norm(m_.row(i)));
    if (std::abs(norm - 1.0) > kUnitNormTolerance) {
      throw Error(ErrorKind::norm_violation,
                  "EmbeddingMatrix: row " + std::to_string(i) + " has norm " + format_double(norm));
    }
  }
}

EmbeddingMatrix EmbeddingMatrix::normalized(Matrix rows) {
  l2_normalize_rows(rows);
  return EmbeddingMatrix(std::move(rows));
}

std::size_t LabelVector::num_classes() const noexcept {
  std::size_t c = 0;
  for (auto l : labels) c = std::max<std::size_t>(c, std::size_t{l} + 1);
  return c;
}

void PairSet::validate(std::size_t n) const {
  for (const auto& [a, b] : pairs) {
    if (a >= n || b >= n) throw Error(ErrorKind::invalid_argument, "PairSet: index out of range");
  }
}

namespace {

std::vector<char> encode_dense(const Matrix& m, std::string_view magic) {
  detail::ByteWriter w;
  w.bytes(magic);
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (double x : m.data()) w.f64(x);
  return w.buffer();
}

Matrix decode_dense(const std::vector<char>& bytes, std::string_view magic, const std::string& ctx) {
  detail::ByteReader r(bytes, ctx);
  r.expect_magic(magic);
  const std::uint32_t n = r.u32();
  const std::uint32_t d = r.u32();
  const std::size_t count = std::size_t{n} * d;
  if (count > r.remaining() / 8) throw Error(ErrorKind::truncated, ctx + ": file truncated");
  std::vector<double> data(count);
  for (double& x : data) {
    x = r.f64();
    if (!std::isfinite(x)) throw Error(ErrorKind::non_finite, ctx + ": non-finite value");
  }
  if (!r.at_end()) throw Error(ErrorKind::invalid_argument, ctx + ": trailing bytes");
  return Matrix(n, d, std::move(data));
}

}  // namespace

std::vector<char> encode_embeddings(const EmbeddingMatrix& m) { return encode_dense(m.matrix(), "EMB1"); }

EmbeddingMatrix decode_embeddings(const std::vector<char>& bytes) {
  return EmbeddingMatrix(decode_dense(bytes, "EMB1", "EMB1"));
}

void write_embeddings(const EmbeddingMatrix& m, const std::string& path) {
  detail::write_file(path, encode_embeddings(m));
}

EmbeddingMatrix read_embeddings(const std::string& path) { return decode_embeddings(detail::read_file(path)); }

std::vector<char> encode_labels(const LabelVector& labels) {
  detail::ByteWriter w;
  w.bytes("LBL1");
  w.u32(static_cast<std::uint32_t>(labels.size()));
  for (auto l : labels.labels) w.u32(l);
  return w.buffer();
}

LabelVector decode_labels(const std::vector<char>& bytes) {
  detail::ByteReader r(bytes, "LBL1");
  r.expect_magic("LBL1");
  const std::uint32_t n = r.u32();
  if (n > r.remaining() / 4) throw Error(ErrorKind::truncated, "LBL1: file truncated");
  LabelVector out;
  out.labels.resize(n);
  for (auto& l : out.labels) l = r.u32();
  if (!r.at_end()) throw Error(ErrorKind::invalid_argument, "LBL1: trailing bytes");
  return out;
}

void write_labels(const LabelVector& labels, const std::string& path) {
  detail::write_file(path, encode_labels(labels));
}

LabelVector read_labels(const std::string& path) { return decode_labels(detail::read_file(path)); }

std::vector<char> encode_features(const Matrix& m) {
  if (!m.all_finite()) throw Error(ErrorKind::non_finite, "FEA1: non-finite value");
  return encode_dense(m, "FEA1");
}

Matrix decode_features(const std::vector<char>& bytes) { return decode_dense(bytes, "FEA1", "FEA1"); }

void write_features(const Matrix& m, const std::string& path) { detail::write_file(path, encode_features(m)); }

Matrix read_features(const std::string& path) { return decode_features(detail::read_file(path)); }

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw Error(ErrorKind::invalid_argument, "format_double failed");
  return std::string(buf, ptr);
}

void write_matrix_csv(const Matrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  std::vector<double> data;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t count = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(ErrorKind::invalid_argument, path + ": bad number '" + cell + "'");
      }
      data.push_back(v);
      ++count;
    }
    if (rows == 0) cols = count;
    if (count != cols) throw Error(ErrorKind::dimension_mismatch, path + ": ragged rows");
    ++rows;
  }
  return Matrix(rows, cols, std::move(data));
}

}  // namespace repspace
