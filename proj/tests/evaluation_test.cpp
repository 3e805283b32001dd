#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <numeric>

#include "rhythm/evaluation.h"

namespace rhythm {
namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

TEST(EntropyTest, Distributions) {
  EXPECT_DOUBLE_EQ(distribution_entropy(Distribution(8, 0.125)), 3.0);
  EXPECT_EQ(distribution_entropy(Distribution{0, 1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(distribution_entropy(Distribution{0.5, 0.5}), 1.0);
}

TEST(EntropyTest, Rates) {
  EXPECT_NEAR(entropy_rate({{0.9, 0.1}, {0.1, 0.9}}), 0.4690, 1e-4);
  const Distribution p{0.1, 0.2, 0.3, 0.4};
  EXPECT_NEAR(entropy_rate(std::vector<Distribution>(4, p)), distribution_entropy(p), 1e-12);
  EXPECT_NEAR(entropy_rate({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}), 0.0, 1e-12);
  const std::vector<double> mu = stationary_distribution({{0.9, 0.1}, {0.5, 0.5}});
  EXPECT_NEAR(mu[0], 5.0 / 6.0, 1e-9);
  EXPECT_NEAR(mu[1], 1.0 / 6.0, 1e-9);
  EXPECT_THROW(stationary_distribution({{1, 0}, {0, 1}}, 0.0), Error);
  // Two absorbing states; under uniform smoothing state 0 leaks to 1 both
  // directly and through 2, so mass settles 1:2.
  const std::vector<double> tied = stationary_distribution({{1, 0, 0}, {0, 1, 0}, {0, 0.5, 0.5}});
  EXPECT_NEAR(tied[0], 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(tied[1], 2.0 / 3.0, 1e-9);
  // Nearly decomposable: two sticky blocks joined by rare transitions.
  const double e = 1e-9;
  const std::vector<double> sticky = stationary_distribution({{1 - e, e}, {3 * e, 1 - 3 * e}}, 0.0);
  EXPECT_NEAR(sticky[0], 0.75, 1e-12);
  EXPECT_NEAR(weighted_row_entropy({{0.5, 0.5}, {1, 0}}, std::vector<double>{3, 1}), 0.75, 1e-15);
}

TEST(ErrorRateTest, Examples) {
  const std::vector<int> t{1, 2, 3, 4};
  EXPECT_EQ(error_rate(t, t), 0.0);
  EXPECT_EQ(error_rate(std::vector<int>{1, 2, 3, 5}, t), 0.25);
  EXPECT_EQ(error_rate(std::vector<int>{2, 3, 4, 5}, t), 1.0);
  EXPECT_THROW(error_rate(std::vector<int>{1}, t), Error);
}

TEST(CrossEntropyTest, DeterministicModelScoresZero) {
  ModelParams p = make_empty_params(ModelConfig::Parse("notemm1"), 8);
  p.initial[1] = 1.0;
  for (int a = 0; a < 8; ++a) p.transition[a][(a + 1) % 8] = 1.0;
  Corpus c;
  c.add("a", RhythmScore::FromNoteValues(0, std::vector<int>{2, 3, 4, 5, 6}));
  const CrossEntropyReport r = cross_entropy(p, c);
  EXPECT_EQ(r.bits_per_note, 0.0);
  EXPECT_EQ(r.notes, 5u);
  c.add("b", RhythmScore::FromNoteValues(0, std::vector<int>{2, 2}));
  EXPECT_TRUE(std::isinf(cross_entropy(p, c).bits_per_note));
}

TEST(CrossEntropyTest, ApproachesEntropyRateOfGenerator) {
  Rng rng = make_rng(1);
  const ModelParams p = random_params(ModelConfig::Parse("notemm1"), 8, rng, 0.5);
  Corpus c;
  for (int i = 0; i < 100; ++i) c.add(std::to_string(i), sample_score(p, 200, rng));
  EXPECT_NEAR(cross_entropy(p, c).bits_per_note, entropy_rate(p.transition), 0.05);
}

TEST(CrossEntropyTest, InitialPositionConvention) {
  Rng rng = make_rng(2);
  const ModelParams p = random_params(ModelConfig::Parse("metmm1"), 8, rng);
  Corpus c;
  for (int i = 0; i < 5; ++i) c.add(std::to_string(i), sample_score(p, 20, rng));
  const CrossEntropyReport r = cross_entropy(p, c);
  EXPECT_GT(r.bits_per_note_with_initial, r.bits_per_note);
  for (size_t i = 0; i < c.size(); ++i) {
    const std::vector<int> b = to_metrical(c.pieces[i]);
    double lp = std::log2(p.initial[b[0]]);
    for (size_t n = 1; n < b.size(); ++n) lp += std::log2(p.transition[b[n - 1]][b[n]]);
    EXPECT_NEAR(r.piece_log2_with_initial[i], lp, 1e-9);
  }
}

TEST(SampleScoreTest, LengthAndDeterminism) {
  Rng rng = make_rng(3);
  for (const char* name : {"notemm2", "metmm1sd", "patmm1"}) {
    const ModelParams p = random_params(ModelConfig::Parse(name), 8, rng);
    Rng a = make_rng(4), b = make_rng(4);
    const RhythmScore x = sample_score(p, 37, a), y = sample_score(p, 37, b);
    EXPECT_EQ(x.note_count(), 37);
    EXPECT_EQ(x.onsets(), y.onsets());
    EXPECT_LT(x.onsets()[0], 8);
  }
}

TEST(SparsenessTest, RepetitivePieces) {
  Corpus c;
  for (int i = 0; i < 8; ++i) c.add(std::to_string(i), RhythmScore::FromNoteValues(0, std::vector<int>(40, i + 1)));
  Rng rng = make_rng(5);
  const ModelParams generic = estimate_params(c, ModelConfig::Parse("notemm0"));
  const EntropyPopulations pop = sparseness_study(generic, c, 10.0, 200, rng);
  ASSERT_EQ(pop.piece.size(), 8u);
  ASSERT_EQ(pop.sampled.size(), 8u);
  ASSERT_EQ(pop.dirichlet.size(), 200u);
  for (double h : pop.piece) EXPECT_EQ(h, 0.0);
  EXPECT_GT(mean(pop.sampled), mean(pop.piece));
  EXPECT_NEAR(pop.generic, 3.0, 1e-12);
  const double dense = mean(pop.dirichlet);
  const double sparse = mean(sparseness_study(generic, c, 0.5, 200, rng).dirichlet);
  EXPECT_LT(sparse, dense);

  const ModelParams first = estimate_params(c, ModelConfig::Parse("notemm1"));
  const EntropyPopulations pop1 = sparseness_study(first, c, 10.0, 20, rng);
  for (double h : pop1.piece) EXPECT_EQ(h, 0.0);
  EXPECT_GT(mean(pop1.sampled), 0.0);
  EXPECT_THROW(sparseness_study(estimate_params(c, ModelConfig::Parse("notemm2")), c, 10.0, 1, rng), Error);
}

TEST(ParallelForTest, VisitsEveryIndexAndRethrows) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](size_t i) { ++hits[i]; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3, [](size_t i) {
                 if (i == 7) throw Error("boom");
               }),
               Error);
}

TEST(BenchmarkTest, IsolatesFailuresAndAveragesSeeds) {
  Rng rng = make_rng(6);
  const ModelParams truth = random_params(ModelConfig::Parse("metmm1"), 8, rng, 0.3);
  Corpus train, test;
  for (int i = 0; i < 20; ++i) train.add(std::to_string(i), sample_score(truth, 50, rng));
  for (int i = 0; i < 3; ++i) test.add(std::to_string(i), sample_score(truth, 30, rng));
  TimingParams tp;
  std::vector<Performance> perfs;
  for (const auto& s : test.pieces) perfs.push_back(synthesize(s, tp, rng));
  BenchmarkSetup setup;
  setup.models = {"metmm1", "metmm1b", "nonsense"};
  setup.seeds = {1, 2, 3};
  setup.timing = tp;
  setup.iterations = 3;
  setup.jobs = 2;
  const std::vector<BenchmarkEntry> out = benchmark(setup, train, test, perfs);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_TRUE(out[0].ok);
  EXPECT_EQ(out[0].seed_error_rates.size(), 3u);
  EXPECT_EQ(out[0].sd_error, 0.0);
  EXPECT_TRUE(out[1].ok) << out[1].failure;
  EXPECT_EQ(out[1].seed_error_rates.size(), 3u);
  EXPECT_FALSE(out[2].ok);
  EXPECT_FALSE(out[2].failure.empty());

  setup.jobs = 1;
  setup.models = {"metmm1b"};
  EXPECT_EQ(benchmark(setup, train, test, perfs)[0].seed_error_rates, out[1].seed_error_rates);
}

}  // namespace
}  // namespace rhythm
