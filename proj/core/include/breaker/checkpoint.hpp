/*
 * Copyright 2026 Breaker Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>

#include "breaker/trainer.hpp"

namespace breaker {

// Binary model snapshot:
//   magic "BRKR", one version byte (0x01),
//   u32-LE length-prefixed UTF-8 JSON blob (train config, model shape, step),
//   tensor table - per tensor: u16-LE name length, name bytes, u8 ndim,
//   u32-LE dims, IEEE-754 64-bit LE values,
//   trailing CRC32 (IEEE) of every preceding byte.
struct Checkpoint {
  int version = 1;
  TrainConfig config;
  std::vector<std::size_t> cardinalities;
  std::size_t n_items = 0;
  std::uint64_t step = 0;
  ParamSet tensors;  // main parameters plus centroids; "adam." entries optional

  ModelDims dims() const;
};

Checkpoint make_checkpoint(const TrainConfig& cfg, const TrainResult& result,
                           const DatasetManifest& manifest);

void save_checkpoint(const std::filesystem::path& file, const Checkpoint& ck);

// Validates magic, version, CRC, blob schema, and tensor shapes against the
// embedded config. Throws CheckpointCorrupt / CheckpointVersionError /
// CheckpointShapeError.
Checkpoint load_checkpoint(const std::filesystem::path& file);

std::uint32_t crc32_ieee(const void* data, std::size_t len);

}  // namespace breaker
