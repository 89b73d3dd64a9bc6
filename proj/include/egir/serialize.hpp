#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "egir/graph.hpp"

namespace egir {

/// .egir container: magic "EGIR", u32 LE version (=1), u64 LE manifest
/// length, UTF-8 JSON manifest, then a raw region of row-major float32
/// little-endian tensor data. See docs/format.md for the manifest schema.
///
/// serialize() is deterministic, so round-trips are bit-exact:
/// serialize(deserialize(serialize(m))) == serialize(m) byte for byte.
std::vector<uint8_t> serialize(const ModelGraph& model);
ModelGraph deserialize(const std::vector<uint8_t>& bytes);

void save_model(const ModelGraph& model, const std::string& path);
ModelGraph load_model(const std::string& path);

inline constexpr uint32_t kFormatVersion = 1;

} // namespace egir
