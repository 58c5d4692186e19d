#include "repspace/checkpoint.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "binary_io.hpp"
#include "repspace/error.hpp"

namespace repspace {

namespace detail {

std::vector<char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io, "write failed for " + path);
}

}  // namespace detail

namespace {

void encode_into(detail::ByteWriter& w, const MlpParams& params) {
  params.validate();
  w.bytes("RLNS");
  w.u8(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(params.layers.size()));
  for (const auto& layer : params.layers) {
    w.u32(static_cast<std::uint32_t>(layer.in_width()));
    w.u32(static_cast<std::uint32_t>(layer.out_width()));
    for (double x : layer.weight.data()) w.f64(x);
    for (double x : layer.bias) w.f64(x);
  }
  w.u8(static_cast<std::uint8_t>(params.activation));
  w.f64(params.dropout_p);
}

}  // namespace

std::vector<char> encode_mlp(const MlpParams& params) {
  detail::ByteWriter w;
  encode_into(w, params);
  return w.buffer();
}

MlpParams decode_mlp(const std::vector<char>& bytes, std::size_t& offset) {
  detail::ByteReader r(bytes, "checkpoint", offset);
  r.expect_magic("RLNS");
  const std::uint8_t version = r.u8();
  if (version != kCheckpointVersion) {
    throw Error(ErrorKind::bad_version, "checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint32_t n_layers = r.u32();
  if (n_layers == 0) throw Error(ErrorKind::invalid_argument, "checkpoint: zero layers");
  MlpParams p;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const std::uint32_t in = r.u32();
    const std::uint32_t out = r.u32();
    const std::size_t count = std::size_t{in} * out;
    if (count + out > r.remaining() / 8) throw Error(ErrorKind::truncated, "checkpoint: file truncated");
    std::vector<double> w(count);
    for (double& x : w) x = r.f64();
    std::vector<double> b(out);
    for (double& x : b) x = r.f64();
    p.layers.push_back(Layer{Matrix(out, in, std::move(w)), std::move(b)});
  }
  const std::uint8_t act = r.u8();
  if (act > static_cast<std::uint8_t>(Activation::relu)) {
    throw Error(ErrorKind::invalid_argument, "checkpoint: unknown activation byte " + std::to_string(act));
  }
  p.activation = static_cast<Activation>(act);
  p.dropout_p = r.f64();
  p.validate();
  offset = r.position();
  return p;
}

std::vector<char> encode_model(const Model& model) {
  model.validate();
  detail::ByteWriter w;
  encode_into(w, model.encoder);
  if (model.projector) encode_into(w, *model.projector);
  return w.buffer();
}

Model decode_model(const std::vector<char>& bytes) {
  std::size_t offset = 0;
  Model m;
  m.encoder = decode_mlp(bytes, offset);
  if (offset < bytes.size()) m.projector = decode_mlp(bytes, offset);
  if (offset != bytes.size()) throw Error(ErrorKind::invalid_argument, "checkpoint: trailing bytes");
  m.validate();
  return m;
}

void save_model(const std::string& path, const Model& model) {
  detail::write_file(path, encode_model(model));
}

Model load_model(const std::string& path) { return decode_model(detail::read_file(path)); }

std::string file_checksum(const std::string& path) {
  const auto bytes = detail::read_file(path);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace repspace
