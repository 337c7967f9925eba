#pragma once

// Checkpoint layout (all integers little-endian):
//   "FOPC" | u32 version | u64 face_dim | u64 voice_dim | u64 embed_dim |
//   u64 num_identities | u8 fusion | u32 param_count |
//   per parameter: u32 name_len | name | u64 rows | u64 cols | rows*cols f64

#include <cstdint>
#include <string>
#include <string_view>

#include "fopkit/model.h"

namespace fopkit {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  FopConfig config;
  FopParams params;
};

std::string encode_checkpoint(const FopConfig& config, const FopParams& params);
Checkpoint decode_checkpoint(std::string_view bytes, const std::string& source = "<memory>");

void save_checkpoint(const std::string& path, const FopConfig& config, const FopParams& params);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace fopkit
