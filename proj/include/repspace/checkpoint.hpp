#pragma once

#include <string>
#include <vector>

#include "repspace/model.hpp"

namespace repspace {

// "RLNS" checkpoint record:
//   magic "RLNS", version byte (1), u32 layer count,
//   per layer: u32 in_width, u32 out_width, out*in f64 weights (row-major),
//              out f64 bias,
//   activation byte, f64 dropout_p.
// All integers and floats little-endian. A model file is the encoder record
// followed by an optional projector record.

inline constexpr std::uint8_t kCheckpointVersion = 1;

std::vector<char> encode_mlp(const MlpParams& params);
/// Decodes one record starting at `offset`; advances offset past it.
MlpParams decode_mlp(const std::vector<char>& bytes, std::size_t& offset);

std::vector<char> encode_model(const Model& model);
Model decode_model(const std::vector<char>& bytes);

void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::string& path);

}  // namespace repspace
