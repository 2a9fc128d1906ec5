#pragma once

#include <filesystem>
#include <string>

#include "mir/data/dataset.h"

namespace mir::data {

// Binary record: 1 label byte then 3072 pixel bytes (R, G, B planes of a
// row-major 32x32 image).
inline constexpr std::int64_t kCifarRecordBytes = 3073;
inline constexpr std::int64_t kCifarFileBytes = 30730000;

// Parses any file made of whole records. Ids are first_id + record index.
Dataset parse_cifar_file(const std::filesystem::path& path, std::int64_t first_id = 0);
void write_cifar_file(const std::filesystem::path& path, const Dataset& ds);

struct CifarSplits {
  Dataset train;
  Dataset test;
};

// Reads data_batch_1..5.bin and test_batch.bin; each must be a full
// 10000-record file.
CifarSplits load_cifar10(const std::filesystem::path& dir);

}  // namespace mir::data
