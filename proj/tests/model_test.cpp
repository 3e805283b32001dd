#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "rhythm/model.h"
#include "rhythm/random.h"

namespace rhythm {
namespace {

TEST(DivisionCatalogTest, Enumeration) {
  const DivisionCatalog c(8);
  ASSERT_EQ(c.for_value(1).size(), 1u);
  EXPECT_EQ(c.for_value(1)[0].parts, (std::vector<int>{1}));
  const auto& four = c.for_value(4);
  ASSERT_EQ(four.size(), 4u);
  EXPECT_EQ(four[0].parts, (std::vector<int>{4}));
  EXPECT_EQ(four[1].parts, (std::vector<int>{1, 3}));
  EXPECT_EQ(four[2].parts, (std::vector<int>{2, 2}));
  EXPECT_EQ(four[3].parts, (std::vector<int>{3, 1}));
  EXPECT_EQ(c.for_value(8).size(), 8u);
  EXPECT_EQ(c.size(), 36);
  EXPECT_EQ(c.at(c.global_index(4, 2)).label(), "2+2");
  EXPECT_EQ(c.local_index(c.global_index(6, 3)), 3);
}

TEST(ModelConfigTest, ParseAndName) {
  const auto c = ModelConfig::Parse("PatMM1SDB");
  EXPECT_EQ(c.family, Family::kPat);
  EXPECT_EQ(c.order, 1);
  EXPECT_TRUE(c.shift && c.division && c.bayesian);
  EXPECT_EQ(c.name(), "patmm1sdb");
  EXPECT_EQ(ModelConfig::Parse("metmm2").name(), "metmm2");
  EXPECT_THROW(ModelConfig::Parse("patmm2"), Error);
  EXPECT_THROW(ModelConfig::Parse("notemm2s"), Error);
  EXPECT_THROW(ModelConfig::Parse("notemm1ds"), Error);
  EXPECT_THROW(ModelConfig::Parse("foomm1"), Error);
}

TEST(ModelConfigTest, ListedVariants) {
  const auto v = listed_variants();
  EXPECT_EQ(v.size(), 25u);
  int pat = 0;
  for (const auto& c : v) {
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(ModelConfig::Parse(c.name()), c);
    pat += c.family == Family::kPat;
  }
  EXPECT_EQ(pat, 7);
}

TEST(PatternVocabularyTest, Exhaustive) {
  const auto v = PatternVocabulary::Exhaustive(8);
  EXPECT_EQ(v.size(), 255);
  EXPECT_EQ(v.at(0).label(), "00000001");
  EXPECT_EQ(v.at(254).label(), "11111111");
  EXPECT_EQ(v.find(NotePattern({0, 4}, 8)), 0b10001000 - 1);
  EXPECT_EQ(PatternVocabulary({NotePattern({0}, 8)}).find(NotePattern({1}, 8)), -1);
}

TEST(ModelParamsTest, ValidateShapes) {
  Rng rng = make_rng(1);
  for (const auto& c : listed_variants()) {
    const int nb = c.family == Family::kPat ? 4 : 8;
    const ModelParams p = random_params(c, nb, rng);
    EXPECT_NO_THROW(p.validate()) << c.name();
  }
  ModelParams p = make_empty_params(ModelConfig::Parse("notemm1"), 8);
  EXPECT_THROW(p.validate(), Error);
}

TEST(DirichletTest, MeanMatchesBase) {
  Rng rng = make_rng(11);
  const std::vector<double> base{0.5, 0.3, 0.15, 0.05};
  const double alpha = 10.0;
  std::vector<double> scaled(base.size());
  for (size_t i = 0; i < base.size(); ++i) scaled[i] = alpha * base[i];
  const int draws = 20000;
  std::vector<double> mean(base.size(), 0.0);
  for (int t = 0; t < draws; ++t) {
    const auto x = sample_dirichlet(scaled, rng);
    EXPECT_NEAR(std::accumulate(x.begin(), x.end(), 0.0), 1.0, 1e-12);
    for (size_t i = 0; i < x.size(); ++i) mean[i] += x[i] / draws;
  }
  for (size_t i = 0; i < base.size(); ++i) {
    const double sd = std::sqrt(base[i] * (1 - base[i]) / (alpha + 1));
    EXPECT_NEAR(mean[i], base[i], 3 * sd / std::sqrt(draws)) << i;
  }
}

TEST(DirichletTest, ZeroEntriesStayZeroAndTinyShapesWork) {
  Rng rng = make_rng(2);
  const std::vector<double> a{0.0, 1e-4, 1e-4, 0.0};
  for (int t = 0; t < 100; ++t) {
    const auto x = sample_dirichlet(a, rng);
    EXPECT_EQ(x[0], 0.0);
    EXPECT_EQ(x[3], 0.0);
    EXPECT_NEAR(x[1] + x[2], 1.0, 1e-12);
  }
  const std::vector<double> bad{-1.0, 2.0};
  EXPECT_THROW(sample_dirichlet(bad, rng), Error);
  const std::vector<double> huge{1e9, 1.0, 1.0};
  EXPECT_GT(sample_dirichlet(huge, rng)[0], 0.999);
}

TEST(RandomTest, StreamsAreReproducibleAndDistinct) {
  Rng a = make_rng(5, 1), b = make_rng(5, 1), c = make_rng(5, 2);
  const auto x = a(), y = b(), z = c();
  EXPECT_EQ(x, y);
  EXPECT_NE(x, z);
}

}  // namespace
}  // namespace rhythm
