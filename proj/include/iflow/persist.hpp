#pragma once

#include <string>

#include "iflow/trainer.hpp"

namespace iflow {

// Checkpoint container ("IFCK", version 1). Layout, all integers little-endian:
//   magic "IFCK" | u32 version | u64 metadata length | metadata (UTF-8 JSON)
//   | u64 tensor count | tensors
// each tensor: u32 name length | name | u32 rank | u64 dims[rank] | fp32
// payload (little-endian). Metadata carries the process spec, net config,
// train config, step, seed, the four stream counters, and buffer bookkeeping.
// Tensors hold params, EMA params, optimizer moments, the estimate buffer, and
// any staged per-epoch writes. Writes go to a temp file in the target
// directory and are renamed into place.
constexpr uint32_t CHECKPOINT_VERSION = 1;

void save_checkpoint(const TrainState& state, const std::string& path);
TrainState load_checkpoint(const std::string& path);

}  // namespace iflow
