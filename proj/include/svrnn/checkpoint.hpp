#pragma once

// Flat, versioned binary container of named tensors plus string metadata.
// Layout is documented in docs/checkpoint_format.md.

#include <cstdint>
#include <map>
#include <string>

#include "svrnn/graph.hpp"

namespace svrnn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::map<std::string, nn::Matrix> tensors;
};

/// Serializes to bytes; deterministic for equal inputs.
std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

/// Writes to `path.tmp` and renames over `path`.
void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace svrnn
