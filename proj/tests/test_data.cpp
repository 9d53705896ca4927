#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "dcdgan/data.hpp"
#include "dcdgan/errors.hpp"
#include "dcdgan/image_io.hpp"
#include "support.hpp"

using namespace dcdgan;
using dcdgan::testing::temp_dir;

namespace {

bool same(const Tensor& a, const Tensor& b) {
  if (!(a.shape() == b.shape())) return false;
  for (std::int64_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

}  // namespace

TEST(Paired, DeterministicAndInRange) {
  const Split a = gen_paired_split(32, 2, 7), b = gen_paired_split(32, 2, 7);
  ASSERT_EQ(a.a.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_TRUE(same(a.a[i], b.a[i]));
    EXPECT_TRUE(same(a.b[i], b.b[i]));
    for (double v : a.a[i].values()) EXPECT_TRUE(v == -1.0 || v == 1.0);
    EXPECT_GE(a.b[i].min(), -1.0);
    EXPECT_LE(a.b[i].max(), 1.0);
    EXPECT_EQ(a.b[i].shape(), (Shape{1, 3, 32, 32}));
  }
  EXPECT_FALSE(same(gen_paired_split(32, 1, 8).b[0], a.b[0]));
}

TEST(Paired, ValuesSitOnTheEightBitGrid) {
  const Split s = gen_paired_split(16, 3, 1);
  for (const auto& img : s.b)
    for (double v : img.values()) {
      const double p = (v + 1.0) * 127.5;
      EXPECT_NEAR(p, std::round(p), 1e-9);
    }
}

TEST(Paired, BlankCanvasHasNoEdges) {
  const std::vector<int> labels(16 * 16, 0);
  const Tensor e = edge_map(labels, 16);
  for (double v : e.values()) EXPECT_EQ(v, -1.0);
  std::vector<int> split = labels;
  for (int y = 0; y < 16; ++y)
    for (int x = 8; x < 16; ++x) split[static_cast<std::size_t>(y * 16 + x)] = 1;
  const Tensor e2 = edge_map(split, 16);
  EXPECT_EQ(e2.at(0, 0, 3, 7), 1.0);
  EXPECT_EQ(e2.at(0, 0, 3, 8), 1.0);
  EXPECT_EQ(e2.at(0, 0, 3, 2), -1.0);
}

TEST(Unpaired, HueOffsetBetweenDomains) {
  const Split s = gen_unpaired_split(32, 256, 3, 180.0);
  const double ha = mean_hue(s.a), hb = mean_hue(s.b);
  double diff = std::fmod(hb - ha + 360.0, 360.0);
  EXPECT_NEAR(diff, 180.0, 10.0);
  EXPECT_NEAR(ha, kDomainAHue, 10.0);
  const Split s90 = gen_unpaired_split(32, 256, 3, 90.0);
  EXPECT_NEAR(std::fmod(mean_hue(s90.b) - mean_hue(s90.a) + 360.0, 360.0), 90.0, 10.0);
}

TEST(Unpaired, DeterministicAndMinimalEval) {
  DatasetSpec spec;
  spec.task = Task::unpaired_palette_shift;
  spec.resolution = 16;
  spec.n_train = 3;
  spec.n_eval = 1;
  const Dataset a = make_dataset(spec), b = make_dataset(spec);
  EXPECT_FALSE(a.paired);
  ASSERT_EQ(a.eval.a.size(), 1u);
  ASSERT_EQ(a.eval.b.size(), 1u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(same(a.train.b[i], b.train.b[i]));
}

TEST(Spec, Validation) {
  DatasetSpec s;
  s.resolution = 30;
  EXPECT_THROW(s.validate(), ConfigError);
  s.resolution = 32;
  s.n_eval = 0;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(ImageIo, AffineMap) {
  EXPECT_EQ(pixel_to_unit(255), 1.0);
  EXPECT_EQ(pixel_to_unit(0), -1.0);
  EXPECT_EQ(pixel_to_unit(127.5), 0.0);
  EXPECT_EQ(unit_to_pixel(-1.0), 0);
  EXPECT_EQ(unit_to_pixel(1.0), 255);
  EXPECT_EQ(unit_to_pixel(3.0), 255);
}

TEST(ImageIo, PngRoundTripIsExactOnTheGrid) {
  const auto dir = temp_dir("png_rt");
  std::filesystem::create_directories(dir);
  const Tensor img = gen_paired_split(16, 1, 4).b[0];
  write_png(dir / "a.png", img);
  const Tensor back = read_png(dir / "a.png");
  EXPECT_TRUE(same(img, back));
}

TEST(Folder, LexicographicOrderAndErrors) {
  const auto dir = temp_dir("folder");
  std::filesystem::create_directories(dir / "imgs");
  const Split s = gen_paired_split(16, 3, 5);
  write_png(dir / "imgs" / "b.png", s.b[1]);
  write_png(dir / "imgs" / "a.png", s.b[0]);
  write_png(dir / "imgs" / "c.png", s.b[2]);
  const auto items = load_image_folder(dir / "imgs", 16);
  ASSERT_EQ(items.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(same(items[i], s.b[i]));
  const auto resized = load_image_folder(dir / "imgs", 8);
  EXPECT_EQ(resized[0].shape(), (Shape{1, 3, 8, 8}));

  std::filesystem::create_directories(dir / "empty");
  EXPECT_THROW(load_image_folder(dir / "empty", 16), IoError);
  {
    std::ofstream bad(dir / "imgs" / "d.png");
    bad << "not a png";
  }
  try {
    load_image_folder(dir / "imgs", 16);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("d.png"), std::string::npos);
  }
}

TEST(Manifest, WriteReadAndDigestStability) {
  const auto d1 = temp_dir("ds1"), d2 = temp_dir("ds2");
  DatasetSpec spec;
  spec.resolution = 16;
  spec.n_train = 4;
  spec.n_eval = 2;
  spec.seed = RngSeed{7};
  const std::string h1 = write_dataset(make_dataset(spec), spec, d1);
  const std::string h2 = write_dataset(make_dataset(spec), spec, d2);
  EXPECT_EQ(h1, h2);
  DatasetSpec back;
  const Dataset ds = read_dataset(d1, &back);
  EXPECT_EQ(back.echo(), spec.echo());
  EXPECT_EQ(ds.train.a.size(), 4u);
  EXPECT_TRUE(same(ds.train.b[2], make_dataset(spec).train.b[2]));
  // Tamper with one image.
  write_png(d1 / "train" / "b" / "000000.png", Tensor(Shape{1, 3, 16, 16}, 0.0));
  EXPECT_THROW(read_dataset(d1), CorruptionError);
}

TEST(Batching, CountsOrdersAndErrors) {
  EXPECT_EQ(batches_per_epoch(10, 4), 2u);
  EXPECT_EQ(batches_per_epoch(8, 4), 2u);
  EXPECT_THROW(batches_per_epoch(3, 4), ConfigError);
  const auto o1 = epoch_order(50, 9, 0), o2 = epoch_order(50, 9, 0), o3 = epoch_order(50, 9, 1);
  EXPECT_EQ(o1, o2);
  EXPECT_NE(o1, o3);
  EXPECT_EQ(std::set<std::size_t>(o1.begin(), o1.end()).size(), 50u);
  std::vector<Tensor> items;
  for (int i = 0; i < 10; ++i) items.push_back(Tensor(Shape{1, 1, 1, 1}, i));
  const auto batches = batch_iterator(items, 4, 9, 0);
  ASSERT_EQ(batches.size(), 2u);
  EXPECT_EQ(batches[0].shape(), (Shape{4, 1, 1, 1}));
  const auto order = epoch_order(10, 9, 0);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(batches[1][i], static_cast<double>(order[static_cast<std::size_t>(4 + i)]));
}
