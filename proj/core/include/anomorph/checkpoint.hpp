#pragma once

#include <map>
#include <string>

#include "anomorph/networks.hpp"

namespace anomorph {

// Single-file model snapshot: magic "MRPH1", a length-prefixed JSON table
// of {name, shape, offset} plus architecture/meta blocks, then the raw f32
// payloads (parameter values and Adam moments) at the listed offsets.

struct CheckpointMeta {
    std::map<std::string, long> adam_steps; // optimizer step counters by group
    int stage = 0;                          // last completed training stage
};

void save_checkpoint(const std::string& path, ModelSet& models,
                     const CheckpointMeta& meta);
ModelSet load_checkpoint(const std::string& path, CheckpointMeta* meta = nullptr);

// FNV-1a digest over the exact value bytes of the given parameters, in
// order. Used by freeze contracts and determinism checks.
uint64_t params_digest(const std::vector<Parameter*>& params);

} // namespace anomorph
