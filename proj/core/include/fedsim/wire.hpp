#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/flat_params.hpp"

namespace fedsim {

// Wire format for parameter vectors (models and control variates share it):
// "FSIM" magic, u16 format version, u32 parameter count, then one 32-bit
// little-endian IEEE-754 float per parameter. 10 header bytes + 4 per value.
inline constexpr std::uint16_t kWireVersion = 1;
inline constexpr std::size_t kWireHeaderBytes = 10;

std::vector<std::uint8_t> serialize_model(const FlatParams& params);
FlatParams deserialize_model(const std::vector<std::uint8_t>& bytes);

// Serialized size without materializing the payload.
std::size_t serialized_size(std::size_t param_count);

// FNV-1a over the serialized form; used to compare model snapshots.
std::uint64_t params_hash(const FlatParams& params);
std::string hash_hex(std::uint64_t hash);
std::string params_hash_hex(const FlatParams& params);

void write_params_file(const std::string& path, const FlatParams& params);
FlatParams read_params_file(const std::string& path);

}  // namespace fedsim
