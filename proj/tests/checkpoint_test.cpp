#include <gtest/gtest.h>

#include <cstring>
#include <fstream>

#include "rcc/checkpoint.hpp"
#include "rcc/random.hpp"
#include "test_util.hpp"

namespace rcc {
namespace {

CheckpointErrorKind load_error(const Bytes& bytes) {
  try {
    load_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "load succeeded";
  return CheckpointErrorKind::kMalformed;
}

std::uint32_t read_u32(const Bytes& b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const NetworkParams p = init_params(seed);
    const NetworkParams q = load_checkpoint(save_checkpoint(p));
    EXPECT_TRUE(p == q);
    EXPECT_EQ(save_checkpoint(q), save_checkpoint(p));
  }
}

TEST(Checkpoint, HeaderLayout) {
  const Bytes b = save_checkpoint(init_params(0));
  ASSERT_GE(b.size(), 12u);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "RCC1");
  EXPECT_EQ(read_u32(b, 4), kCheckpointVersion);
  EXPECT_EQ(read_u32(b, 8), 6u);
  EXPECT_EQ(b[12], 0);  // conv
  EXPECT_EQ(read_u32(b, 13), 4u);
  EXPECT_EQ(read_u32(b, 17), 8u);

  // First weight is stored as raw little-endian IEEE bits.
  const double w0 = init_params(0).conv[0].filters[0];
  std::uint64_t bits = 0;
  std::memcpy(&bits, &w0, sizeof bits);
  const std::size_t at = 13 + 4 + 4 * 4;
  for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(b[at + k], static_cast<std::uint8_t>(bits >> (8 * k)));

  const std::size_t values = init_params(0).parameter_count();
  EXPECT_EQ(b.size(), 12 + 3 * (1 + 4 + 16) + 3 * (1 + 4 + 8) + 8 * values);
}

TEST(Checkpoint, BadMagic) {
  Bytes b = save_checkpoint(init_params(0));
  b[0] = 'X';
  EXPECT_EQ(load_error(b), CheckpointErrorKind::kBadMagic);
}

TEST(Checkpoint, BadVersion) {
  Bytes b = save_checkpoint(init_params(0));
  b[4] = 2;
  EXPECT_EQ(load_error(b), CheckpointErrorKind::kBadVersion);
}

TEST(Checkpoint, TruncatedAnywhere) {
  const Bytes full = save_checkpoint(init_params(0));
  for (std::size_t len : {std::size_t{0}, std::size_t{3}, std::size_t{10}, std::size_t{14}, std::size_t{100},
                          full.size() / 2, full.size() - 1}) {
    EXPECT_EQ(load_error(Bytes(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(len))),
              CheckpointErrorKind::kTruncated)
        << len;
  }
}

TEST(Checkpoint, WrongArchitectureIsMalformed) {
  Bytes b = save_checkpoint(init_params(0));
  b[12] = 1;  // first layer claims to be fully connected
  EXPECT_THROW(load_checkpoint(b), CheckpointError);
  Bytes extra = save_checkpoint(init_params(0));
  extra.push_back(0);
  EXPECT_THROW(load_checkpoint(extra), CheckpointError);
}

TEST(Checkpoint, FileRoundTripPreservesPredictions) {
  test::TempDir dir("ckpt");
  const NetworkParams p = init_params(4);
  save_checkpoint_file(dir.path() / "m.bin", p);
  const NetworkParams q = load_checkpoint_file(dir.path() / "m.bin");
  Xoshiro256 rng(4);
  for (int i = 0; i < 20; ++i) {
    const Image cube = test::random_image(rng, kCubeSize, kCubeSize);
    EXPECT_EQ(network_forward(cube, p), network_forward(cube, q));
  }
}

TEST(Checkpoint, MissingFileIsIoError) {
  EXPECT_THROW(load_checkpoint_file("/nonexistent/rcc/model.bin"), IoError);
}

}  // namespace
}  // namespace rcc
