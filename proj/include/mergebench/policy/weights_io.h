#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "mergebench/policy/model.h"

namespace mergebench {

inline constexpr char kWeightsMagic[4] = {'B', '4', 'M', 'W'};
inline constexpr std::uint32_t kWeightsVersion = 1;

// Binary layout, all integers u32 little-endian:
//   magic "B4MW", version,
//   d_model, self_layers, cross_layers, heads, history_frames,
//   channel count, then each channel name as (length, bytes),
//   tensor count, then per tensor in for_each_tensor order:
//   rows, cols, rows*cols f32 little-endian values in row-major order.
// Values are stored as f32, so a round trip rounds weights to float.
std::string weights_to_bytes(const ModelWeights& w);
// Throws ParseError on a bad magic, version, channel layout or truncation,
// ShapeError on tensor shapes inconsistent with the header.
ModelWeights weights_from_bytes(const std::string& bytes);

// Debugging twin of the binary format carrying the same header and values.
nlohmann::ordered_json weights_to_json(const ModelWeights& w);
ModelWeights weights_from_json(const nlohmann::ordered_json& j);

// Binary by default; ".json" paths use the JSON twin. Writes are atomic.
void save_weights(const std::filesystem::path& path, const ModelWeights& w);
// Detects the format from the leading magic.
ModelWeights load_weights(const std::filesystem::path& path);

}  // namespace mergebench
