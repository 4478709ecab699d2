// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0
//
// Flat named-tensor container. Layout (all integers little-endian):
//
//   magic    8 bytes  "PIETSNT1"
//   count    u32      number of records
//   record   repeated `count` times:
//     name_len u32, name bytes (UTF-8, no terminator)
//     rank     u32, extents u64 x rank
//     values   f64 x product(extents), row-major, IEEE-754 little-endian
//
// See docs/formats.md.

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "piets/autodiff.hpp"

namespace piets {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

std::string encode_tensors(const NamedTensors& tensors);
NamedTensors decode_tensors(const std::string& bytes);

void save_tensors(const std::filesystem::path& path, const NamedTensors& tensors);
NamedTensors load_tensors(const std::filesystem::path& path);

/// Copies of every parameter whose name starts with `prefix`, in store order.
NamedTensors snapshot(const ParameterStore& params, const std::string& prefix = "");

/// Overwrites parameters by name. Every tensor must name an existing
/// parameter with the same shape; otherwise ContractError names the tensor.
void restore(ParameterStore& params, const NamedTensors& tensors);

}  // namespace piets
