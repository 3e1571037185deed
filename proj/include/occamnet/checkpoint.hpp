#pragma once

// Single-file parameter snapshot.
//
//   "OCCAMNET"                8 bytes
//   version                   u32
//   metadata length           u64, then that many bytes of JSON text
//   tensor count              u64
//   per tensor:
//     name length             u32, then the name bytes
//     rows, cols              u64, u64
//     values                  rows*cols f64, row-major
//
// Every integer and float is little-endian.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "occamnet/graph.hpp"

namespace occamnet {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kCheckpointMagic[8] = {'O', 'C', 'C', 'A', 'M', 'N', 'E', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor value;
};

struct Checkpoint {
  std::string metadata;
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(const std::string& name) const;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

Checkpoint snapshot_parameters(const ParameterRefs& params, std::string metadata);
/// Copies tensors into parameters by name. Throws CheckpointError when a
/// parameter is missing, a shape differs, or the checkpoint holds extras.
void load_parameters(const Checkpoint& ckpt, const ParameterRefs& params);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace occamnet
