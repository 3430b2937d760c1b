#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "embedkit/numcore/params.hpp"
#include "embedkit/numcore/tensor.hpp"

namespace embedkit::numcore {

// Single-file tensor container ("EKTF"): magic, version, payload dtype, then
// a manifest of (name, shape, offset, byte length) and raw little-endian
// values. Checkpoints use the f32 payload; the f64 payload exists for
// internal optimizer state. Round trips are bit-exact.
enum class Dtype : std::uint32_t { f32 = 0, f64 = 1 };

struct NamedTensorData {
  Shape shape;
  std::vector<double> values;
};

using TensorMap = std::map<std::string, NamedTensorData>;

void save_tensor_file(const std::filesystem::path& path, const TensorMap& tensors,
                      Dtype dtype = Dtype::f32);
TensorMap load_tensor_file(const std::filesystem::path& path);
Dtype tensor_file_dtype(const std::filesystem::path& path);

void save_params(const std::filesystem::path& path, const ParamSet& params,
                 Dtype dtype = Dtype::f32);
// Loads values into an existing ParamSet; names and shapes must match.
void load_params(const std::filesystem::path& path, ParamSet& params);

}  // namespace embedkit::numcore
