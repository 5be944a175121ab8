// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>

#include "fsdet/autodiff.hpp"

namespace fsdet {

/// Versioned flat binary parameter blob:
///   magic "FSDP", u32 version, u32 count, then per parameter
///   u32 name length, name bytes, u32 rank, u32 dims..., float32 LE values.
/// Values are written little-endian regardless of host order.
void save_params(std::ostream& os, const ParamSet& params);

/// Reads a blob written by save_params; gradients come back zeroed.
/// Throws on bad magic, version mismatch, or truncation.
ParamSet load_params(std::istream& is);

void save_params_file(const std::string& path, const ParamSet& params);
ParamSet load_params_file(const std::string& path);

}  // namespace fsdet
