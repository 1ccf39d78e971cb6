#pragma once

#include <cstdint>
#include <string>

#include "cvqkd/mlp.hpp"

namespace cvqkd {

// FNV-1a 64-bit, streamed; chain calls by passing the previous value.
inline constexpr std::uint64_t kFnvOffset = 0xCBF29CE484222325ull;
std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t h = kFnvOffset);

// Checksum over the model's canonical serialization payload (dims,
// amplification, ordering id, parameter block).  Stable across save/load.
std::uint64_t model_checksum(const MlpModel& model);

// Versioned little-endian binary container:
//   magic "CVQKDML1", u32 version, u32 dim count, i32 dims[],
//   f64 amplification, note string, u32 p, ordering-id string,
//   f64 params[p] in canonical order (softplus shift last), u64 checksum.
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace cvqkd
