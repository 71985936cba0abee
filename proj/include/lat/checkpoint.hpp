// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "lat/model.hpp"

namespace lat {

/// Versioned binary checkpoint:
///   magic "LATCKPT1", u32 version, u32 reserved,
///   u64 config size + "key=value\n" ModelConfig block,
///   u64 FNV-1a checksum of the array region, u32 array count,
///   then per array: u16 name length, name, u64 rows, u64 cols,
///   rows*cols little-endian f64 values in row-major order.
/// Array order is the array_refs enumeration order.
void save_checkpoint(const ModelParams& params, const std::string& path);

/// Throws std::runtime_error with a descriptive message on bad magic,
/// unsupported version, checksum mismatch (including truncation) or
/// config/array disagreement ("malformed checkpoint").
ModelParams load_checkpoint(const std::string& path);

}  // namespace lat
