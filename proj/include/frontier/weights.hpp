#pragma once

#include "frontier/encoder.hpp"

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace frontier {

class WeightFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Serializable parameter set: config echo, tensor table, float32 payload.
struct WeightBundle {
    EncoderConfig config;
    std::vector<TensorInfo> tensors;  // offsets in elements
    std::vector<float> payload;
};

inline constexpr char kWeightMagic[8] = {'F', 'R', 'N', 'T', 'W', 'B', '0', '1'};
inline constexpr int kWeightFormatVersion = 1;

nlohmann::ordered_json config_to_json(const EncoderConfig& config);
EncoderConfig config_from_json(const nlohmann::json& j);

template <typename T>
WeightBundle to_bundle(const Model<T>& model);

/// Throws WeightFormatError when the tensor table does not match the config.
template <typename T>
Model<T> from_bundle(const WeightBundle& bundle);

/// File image: 8-byte magic, u64 little-endian manifest length, JSON manifest
/// (format version, dtype, config, tensor table, payload size, crc32), then
/// the little-endian float32 payload.
std::string serialize_weights(const WeightBundle& bundle);
WeightBundle deserialize_weights(const std::string& bytes);

void save_weights(const WeightBundle& bundle, const std::string& path);
WeightBundle load_weights(const std::string& path);

std::uint32_t crc32_of(const void* data, std::size_t size);

}  // namespace frontier
