#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <set>

#include "mir/core/errors.h"
#include "mir/data/augment.h"
#include "mir/data/cifar.h"
#include "mir/data/sampler.h"
#include "mir/data/synthetic.h"

using namespace mir;
using namespace mir::data;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("mir_test_data_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream os(p, std::ios::binary);
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> read_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

Dataset synth(std::uint64_t seed, int per_class, int classes = 10) { return synth_dataset(seed, {classes, per_class}); }

}  // namespace

TEST(Cifar, SingleRecord) {
  fs::path dir = temp_dir("single");
  std::vector<unsigned char> rec(kCifarRecordBytes, 255);
  rec[0] = 3;
  write_bytes(dir / "one.bin", rec);
  Dataset ds = parse_cifar_file(dir / "one.bin");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.labels[0], 3);
  LabeledImage img = ds.image(0);
  EXPECT_EQ(img.pixels.shape(), (Shape{3, 32, 32}));
  for (double v : img.pixels.data()) EXPECT_EQ(v, 1.0);
}

TEST(Cifar, ChannelPlanesAreRowMajor) {
  fs::path dir = temp_dir("planes");
  std::vector<unsigned char> rec(kCifarRecordBytes, 0);
  rec[0] = 1;
  rec[1 + 1024 + 2 * 32 + 5] = 51;  // green plane, row 2, column 5
  write_bytes(dir / "p.bin", rec);
  LabeledImage img = parse_cifar_file(dir / "p.bin").image(0);
  EXPECT_DOUBLE_EQ(img.pixels.data()[1 * 1024 + 2 * 32 + 5], 0.2);
  EXPECT_DOUBLE_EQ(std::accumulate(img.pixels.data().begin(), img.pixels.data().end(), 0.0), 0.2);
}

TEST(Cifar, TruncatedFileNamesFileAndOffset) {
  fs::path dir = temp_dir("trunc");
  std::vector<unsigned char> bytes(kCifarRecordBytes + 100, 1);
  write_bytes(dir / "short.bin", bytes);
  try {
    parse_cifar_file(dir / "short.bin");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("short.bin"), std::string::npos) << msg;
    EXPECT_NE(msg.find(std::to_string(kCifarRecordBytes)), std::string::npos) << msg;
  }
}

TEST(Cifar, RejectsLabelAboveNine) {
  fs::path dir = temp_dir("label");
  std::vector<unsigned char> rec(2 * kCifarRecordBytes, 0);
  rec[kCifarRecordBytes] = 10;
  write_bytes(dir / "bad.bin", rec);
  try {
    parse_cifar_file(dir / "bad.bin");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(kCifarRecordBytes)), std::string::npos) << e.what();
  }
}

TEST(Cifar, RoundTripReproducesBytes) {
  fs::path dir = temp_dir("roundtrip");
  Dataset ds = synth(5, 3);
  write_cifar_file(dir / "a.bin", ds);
  Dataset back = parse_cifar_file(dir / "a.bin");
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.pixels, ds.pixels);
  write_cifar_file(dir / "b.bin", back);
  EXPECT_EQ(read_bytes(dir / "a.bin"), read_bytes(dir / "b.bin"));
  EXPECT_EQ(fs::file_size(dir / "a.bin"), 30u * kCifarRecordBytes);
}

TEST(Cifar, LoaderRequiresCanonicalFileSizes) {
  fs::path dir = temp_dir("loader");
  std::vector<unsigned char> rec(kCifarRecordBytes, 0);
  for (int b = 1; b <= 5; ++b) write_bytes(dir / ("data_batch_" + std::to_string(b) + ".bin"), rec);
  write_bytes(dir / "test_batch.bin", rec);
  try {
    load_cifar10(dir);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("data_batch_1.bin"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_cifar10(dir / "missing"), std::exception);
}

TEST(Cifar, CanonicalDatasetClassBalance) {
  const char* dir = std::getenv("MIR_CIFAR10_DIR");
  if (!dir) GTEST_SKIP() << "MIR_CIFAR10_DIR not set";
  CifarSplits s = load_cifar10(dir);
  ASSERT_EQ(s.train.size(), 50000u);
  ASSERT_EQ(s.test.size(), 10000u);
  for (auto c : s.train.class_counts()) EXPECT_EQ(c, 5000u);
  EXPECT_EQ(s.test.ids.front(), 50000);
}

TEST(Synth, SameSeedIsBitIdentical) {
  Dataset a = synth(11, 5), b = synth(11, 5), c = synth(12, 5);
  EXPECT_EQ(a.pixels, b.pixels);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.ids, b.ids);
  EXPECT_NE(a.pixels, c.pixels);
}

TEST(Synth, CountsAndRanges) {
  Dataset ds = synth(1, 2);
  ASSERT_EQ(ds.size(), 20u);
  for (auto c : ds.class_counts()) EXPECT_EQ(c, 2u);
  for (int l : ds.labels) EXPECT_TRUE(l >= 0 && l < 10);
  std::set<std::int64_t> ids(ds.ids.begin(), ds.ids.end());
  EXPECT_EQ(ids.size(), 20u);
  LabeledImage img = ds.image(7);
  for (double v : img.pixels.data()) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
  EXPECT_THROW(synth_dataset(1, {10, 0}), ConfigError);
}

TEST(Synth, SplitsUseDisjointIds) {
  SynthSplits s = synth_splits(3, 4, 2);
  EXPECT_EQ(s.train.size(), 40u);
  EXPECT_EQ(s.test.size(), 20u);
  std::set<std::int64_t> train(s.train.ids.begin(), s.train.ids.end());
  for (auto id : s.test.ids) EXPECT_EQ(train.count(id), 0u);
}

TEST(Synth, ClassesSurviveHorizontalFlip) {
  // the diagonal classes draw +45 and -45 degree gratings equally often; the
  // sign of the mixed gradient moment tells them apart
  Dataset ds = synth(8, 200);
  int positive = 0, total = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] != 4 && ds.labels[i] != 5) continue;
    LabeledImage img = ds.image(i);
    auto p = img.pixels.data();
    double s = 0;
    for (int y = 1; y + 1 < 32; ++y)
      for (int x = 1; x + 1 < 32; ++x)
        s += (p[y * 32 + x + 1] - p[y * 32 + x - 1]) * (p[(y + 1) * 32 + x] - p[(y - 1) * 32 + x]);
    positive += s > 0;
    ++total;
  }
  EXPECT_EQ(total, 400);
  EXPECT_NEAR(positive / 400.0, 0.5, 0.1);
}

TEST(Sampler, OneShotPerClass) {
  Dataset ds = synth(1, 6);
  FewSampleSpec spec = parse_few_sample_spec("10way1shot", 4);
  auto idx = sample_few(ds, spec);
  ASSERT_EQ(idx.size(), 10u);
  std::set<int> labels;
  for (auto i : idx) labels.insert(ds.labels[i]);
  EXPECT_EQ(labels.size(), 10u);
}

TEST(Sampler, KShotCountsAreExact) {
  Dataset ds = synth(1, 8);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    FewSampleSpec spec{FewSampleSpec::Mode::n_way_k_shot, 5, 3, 0, seed};
    auto idx = sample_few(ds, spec);
    ASSERT_EQ(idx.size(), spec.expected_size());
    std::map<int, int> counts;
    for (auto i : idx) ++counts[ds.labels[i]];
    EXPECT_EQ(counts.size(), 5u);
    for (auto [c, n] : counts) EXPECT_EQ(n, 3);
    EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), idx.size());
  }
}

TEST(Sampler, RandomMDrawsDistinctIds) {
  Dataset ds = synth(1, 10);
  FewSampleSpec spec = parse_few_sample_spec("random50", 9);
  auto idx = sample_few(ds, spec);
  ASSERT_EQ(idx.size(), 50u);
  std::set<std::int64_t> ids;
  for (auto i : idx) ids.insert(ds.ids[i]);
  EXPECT_EQ(ids.size(), 50u);
}

TEST(Sampler, SeedDeterminism) {
  Dataset ds = synth(1, 20);
  for (const char* text : {"10way3shot", "random50"}) {
    auto a = sample_few(ds, parse_few_sample_spec(text, 1));
    auto b = sample_few(ds, parse_few_sample_spec(text, 1));
    auto c = sample_few(ds, parse_few_sample_spec(text, 2));
    EXPECT_EQ(a, b) << text;
    EXPECT_NE(a, c) << text;
  }
}

TEST(Sampler, SubsetIsContainedInTrainingSet) {
  Dataset ds = synth(1, 10);
  auto idx = sample_few(ds, parse_few_sample_spec("10way3shot", 3));
  Dataset few = subset(ds, idx);
  std::set<std::int64_t> all(ds.ids.begin(), ds.ids.end());
  for (std::size_t i = 0; i < few.size(); ++i) {
    EXPECT_EQ(all.count(few.ids[i]), 1u);
    EXPECT_EQ(few.labels[i], ds.labels[idx[i]]);
    EXPECT_TRUE(std::equal(few.bytes(i).begin(), few.bytes(i).end(), ds.bytes(idx[i]).begin()));
  }
}

TEST(Sampler, Errors) {
  Dataset ds = synth(1, 2);
  EXPECT_THROW(sample_few(ds, parse_few_sample_spec("10way3shot")), ConfigError);
  EXPECT_THROW(sample_few(ds, parse_few_sample_spec("random21")), ConfigError);
  EXPECT_THROW(parse_few_sample_spec("three shots"), ConfigError);
}

TEST(Sampler, JsonRoundTrip) {
  for (const char* text : {"10way3shot", "random500"}) {
    FewSampleSpec spec = parse_few_sample_spec(text, 77);
    FewSampleSpec back = few_sample_spec_from_json(to_json(spec));
    EXPECT_EQ(back.label(), text);
    EXPECT_EQ(back.seed, 77u);
    EXPECT_EQ(back.expected_size(), spec.expected_size());
  }
}

TEST(EpochStreamTest, EpochsArePermutations) {
  EpochStream s(7, 3);
  auto a = s.next(7), b = s.next(7);
  auto sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<std::size_t> all(7);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(sa, all);
  EXPECT_EQ(sb, all);
  EpochStream t(7, 3);
  auto c = t.next(5), d = t.next(9);
  c.insert(c.end(), d.begin(), d.end());
  a.insert(a.end(), b.begin(), b.end());
  EXPECT_EQ(c, a);
}

TEST(Augment, CentreCropWithoutFlipIsIdentity) {
  Dataset ds = synth(2, 1);
  Tensor img = ds.image(3).pixels;
  AugmentOptions opts;
  Tensor out = augment(img, identity_draw(opts), opts.pad);
  EXPECT_TRUE(std::equal(img.data().begin(), img.data().end(), out.data().begin()));
}

TEST(Augment, FlipIsAnInvolution) {
  Dataset ds = synth(2, 1);
  Tensor img = ds.image(4).pixels;
  AugmentDraw flip{true, 4, 4};
  Tensor once = augment(img, flip, 4);
  Tensor twice = augment(once, flip, 4);
  EXPECT_TRUE(std::equal(img.data().begin(), img.data().end(), twice.data().begin()));
  EXPECT_FALSE(std::equal(img.data().begin(), img.data().end(), once.data().begin()));
  EXPECT_EQ(once.data()[0], img.data()[31]);
}

TEST(Augment, CropShiftsWithZeroPadding) {
  Tensor img({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor out = augment(img, AugmentDraw{false, 2, 1}, 1);  // one right, none down
  const std::vector<double> expect{2, 3, 0, 5, 6, 0, 8, 9, 0};
  EXPECT_TRUE(std::equal(expect.begin(), expect.end(), out.data().begin()));
}

TEST(Augment, FlipFrequencyIsOneHalf) {
  std::mt19937_64 rng(123);
  AugmentOptions opts;
  int flips = 0;
  for (int i = 0; i < 10000; ++i) flips += draw_augment(rng, opts).flip;
  EXPECT_NEAR(flips / 10000.0, 0.5, 0.02);
}

TEST(Augment, BatchesPreserveShapeRangeAndLabels) {
  Dataset ds = synth(2, 2);
  std::vector<std::size_t> idx{0, 5, 9};
  std::mt19937_64 rng(1);
  AugmentOptions opts;
  Batch b = make_batch(ds, idx, &opts, &rng);
  EXPECT_EQ(b.images.shape(), (Shape{3, 3, 32, 32}));
  EXPECT_EQ(b.labels, (std::vector<int>{ds.labels[0], ds.labels[5], ds.labels[9]}));
  const double lo = (0.0 - 0.5) / 0.25, hi = (1.0 - 0.5) / 0.25;
  for (double v : b.images.data()) EXPECT_TRUE(v >= lo && v <= hi);
  Batch plain = make_batch(ds, idx, nullptr, nullptr);
  const double raw = ds.bytes(5)[100] / 255.0;
  EXPECT_DOUBLE_EQ(plain.images.data()[3072 + 100], (raw - 0.5) / 0.25);
}
