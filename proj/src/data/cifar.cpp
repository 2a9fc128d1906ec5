#include "mir/data/cifar.h"

#include <fstream>
#include <iterator>

#include "mir/core/errors.h"

namespace mir::data {

Dataset parse_cifar_file(const std::filesystem::path& path, std::int64_t first_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto size = static_cast<std::int64_t>(raw.size());
  if (size == 0) throw ParseError(path.string() + ": empty file");
  if (size % kCifarRecordBytes != 0) {
    const std::int64_t offset = size / kCifarRecordBytes * kCifarRecordBytes;
    throw ParseError(path.string() + ": truncated record at offset " + std::to_string(offset) + " (file size " +
                     std::to_string(size) + " is not a multiple of " + std::to_string(kCifarRecordBytes) + ")");
  }
  Dataset ds;
  ds.norm = cifar10_normalization();
  const std::int64_t records = size / kCifarRecordBytes;
  ds.pixels.reserve(records * (kCifarRecordBytes - 1));
  for (std::int64_t r = 0; r < records; ++r) {
    const std::int64_t off = r * kCifarRecordBytes;
    const int label = raw[off];
    if (label > 9) {
      throw ParseError(path.string() + ": label byte " + std::to_string(label) + " > 9 at offset " + std::to_string(off));
    }
    ds.labels.push_back(label);
    ds.ids.push_back(first_id + r);
    ds.pixels.insert(ds.pixels.end(), raw.begin() + off + 1, raw.begin() + off + kCifarRecordBytes);
  }
  return ds;
}

void write_cifar_file(const std::filesystem::path& path, const Dataset& ds) {
  if (ds.channels != 3 || ds.height != 32 || ds.width != 32) throw ConfigError("CIFAR records must be 3x32x32");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] < 0 || ds.labels[i] > 255) throw ConfigError("label does not fit in a byte");
    out.put(static_cast<char>(ds.labels[i]));
    auto b = ds.bytes(i);
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

Dataset concat(std::vector<Dataset> parts) {
  Dataset out = std::move(parts.front());
  for (std::size_t i = 1; i < parts.size(); ++i) {
    out.pixels.insert(out.pixels.end(), parts[i].pixels.begin(), parts[i].pixels.end());
    out.labels.insert(out.labels.end(), parts[i].labels.begin(), parts[i].labels.end());
    out.ids.insert(out.ids.end(), parts[i].ids.begin(), parts[i].ids.end());
  }
  return out;
}

Dataset load_full(const std::filesystem::path& file, std::int64_t first_id) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(file, ec);
  if (ec) throw ParseError("cannot stat " + file.string());
  if (static_cast<std::int64_t>(size) != kCifarFileBytes) {
    throw ParseError(file.string() + ": wrong file size " + std::to_string(size) + " (expected " +
                     std::to_string(kCifarFileBytes) + ")");
  }
  return parse_cifar_file(file, first_id);
}

}  // namespace

CifarSplits load_cifar10(const std::filesystem::path& dir) {
  std::vector<Dataset> train;
  for (int b = 1; b <= 5; ++b) {
    train.push_back(load_full(dir / ("data_batch_" + std::to_string(b) + ".bin"), (b - 1) * 10000));
  }
  CifarSplits s{concat(std::move(train)), load_full(dir / "test_batch.bin", 50000)};
  return s;
}

}  // namespace mir::data
