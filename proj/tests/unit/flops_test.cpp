#include <gtest/gtest.h>

#include "searchlab/error.hpp"
#include "searchlab/flops.hpp"

using namespace searchlab;
using namespace searchlab::flops;

namespace {

__extension__ typedef unsigned __int128 u128;

// Separate evaluation of the cost model in 128-bit arithmetic.
u128 reference_total(const ModelConfig& c, std::uint64_t T, std::uint64_t N) {
  const u128 d = c.d_model, dkv = c.d_model / c.heads * c.kv_heads, dff = c.d_ff;
  const u128 linear = 2 * d * d + 2 * d * dkv + 3 * d * dff;
  const u128 attention = d * T * (T + 1) / 2;
  return u128(N) * c.layers * (linear * T + attention);
}

}  // namespace

TEST(Flops, ToyConfig) {
  const ModelConfig toy{"toy", 4, 1, 2, 1, 8};
  EXPECT_EQ(kv_dim(toy), 2u);
  const auto b = flops_breakdown(toy, 2, 1);
  EXPECT_EQ(b.linear_per_token, 144u);
  EXPECT_EQ(b.attention_quadratic, 12u);
  EXPECT_EQ(b.total, 300u);
}

TEST(Flops, NamedConfigs) {
  ASSERT_EQ(named_configs().size(), 4u);
  EXPECT_EQ(kv_dim(named_config("17M")), 128u);
  EXPECT_EQ(kv_dim(named_config("144M")), 256u);
  EXPECT_THROW(named_config("7B"), LookupError);
  for (const auto& c : named_configs()) {
    EXPECT_NO_THROW(c.validate());
    for (std::uint64_t T : {0ull, 1ull, 2ull, 100ull, 4096ull, 100000ull})
      for (std::uint64_t N : {1ull, 2ull, 64ull})
        EXPECT_TRUE(u128(flops_breakdown(c, T, N).total) == reference_total(c, T, N)) << c.name << " " << T;
  }
}

TEST(Flops, Properties) {
  for (const auto& c : named_configs()) {
    EXPECT_EQ(flops_breakdown(c, 0, 5).total, 0u);
    for (std::uint64_t T : {1ull, 7ull, 512ull, 4096ull}) {
      EXPECT_EQ(flops_breakdown(c, T, 2).total, 2 * flops_breakdown(c, T, 1).total);
      EXPECT_GT(flops_breakdown(c, 2 * T, 1).total, flops_breakdown(c, T, 2).total);
    }
  }
}

TEST(Flops, KvHeadsEqualHeads) {
  const ModelConfig c{"mha", 512, 2, 8, 8, 1024};
  EXPECT_EQ(kv_dim(c), 512u);
}

TEST(Flops, Validation) {
  EXPECT_THROW((ModelConfig{"x", 510, 1, 4, 1, 8}.validate()), ConfigError);
  EXPECT_THROW((ModelConfig{"x", 512, 1, 4, 3, 8}.validate()), ConfigError);
  EXPECT_THROW((ModelConfig{"x", 512, 0, 4, 1, 8}.validate()), ConfigError);
}

TEST(Flops, ConfigText) {
  const auto c = config_from_text("# custom\nname=tiny\nd_model=4\nlayers=1\nheads=2\nkv_heads=1\nd_ff=8\n");
  EXPECT_EQ(c, (ModelConfig{"tiny", 4, 1, 2, 1, 8}));
  EXPECT_THROW(config_from_text("d_model=4\nbogus=1\n"), ConfigError);
}

TEST(Flops, Overflow) {
  EXPECT_THROW(flops_breakdown(named_config("144M"), 4000000000ull, 1000000), DomainError);
}
