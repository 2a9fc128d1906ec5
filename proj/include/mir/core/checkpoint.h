#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "mir/core/tensor.h"

namespace mir {

/// Named tensors persisted in the checkpoint archive format:
///
///   offset  size  field
///   0       8     magic "MIRCKPT\0"
///   8       4     format version (uint32, currently 1)
///   12      4     entry count (uint32)
///   then, per entry in ascending name order:
///           4     name length L (uint32)
///           L     name bytes (UTF-8, no terminator)
///           4     rank R (uint32)
///           8*R   extents (uint64 each)
///           8*N   values, IEEE-754 binary64, N = product of extents
///
/// All integers and floats are little-endian regardless of host order.
using TensorMap = std::map<std::string, Tensor>;

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& os, const TensorMap& tensors);
TensorMap read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, const TensorMap& tensors);
TensorMap load_checkpoint(const std::filesystem::path& path);

}  // namespace mir
