// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// GKDC container shared by teacher and student checkpoints:
//   "GKDC" | u32 version = 1 | u64 metadata length | metadata (UTF-8 JSON)
//   | tensors as f64 little-endian, row-major, in manifest order.
// The metadata object is {"model": <caller metadata>, "tensors": [{name, rows, cols}, ...]}.

#pragma once

#include "gkd/parameters.h"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace gkd {

struct Checkpoint {
    nlohmann::json metadata;
    ParameterSet params;
};

std::string encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(std::string_view bytes);
void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace gkd
