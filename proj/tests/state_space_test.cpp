#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracle.h"
#include "rhythm/random.h"
#include "rhythm/state_space.h"

namespace rhythm {
namespace {

int test_bar_length(const ModelConfig& c) {
  if (c.family == Family::kPat) return 3;
  return c.modified() ? 3 : 4;
}

ModelParams one_hot_note1(int nb) {
  ModelParams p = make_empty_params(ModelConfig::Parse("notemm1"), nb);
  p.initial[1] = 1.0;
  for (int a = 0; a < nb; ++a) p.transition[a][(a + 1) % nb] = 1.0;
  return p;
}

TEST(StateSpaceTest, MetricalFirstOrderHasEightStochasticStates) {
  Rng rng = make_rng(1);
  const LatentStateSpace space(random_params(ModelConfig::Parse("metmm1"), 8, rng));
  EXPECT_EQ(space.state_count(), 8u);
  EXPECT_EQ(space.boundary_count(), 8u);
  for (uint32_t z = 0; z < 8; ++z) {
    double sum = 0.0;
    space.for_each_successor(z, [&](uint32_t to, double p, int v) {
      sum += p;
      EXPECT_EQ(v, interval(static_cast<int>(z), static_cast<int>(to), 8));
    });
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(StateSpaceTest, PatternChainComposition) {
  ModelParams p = make_empty_params(ModelConfig::Parse("patmm1"), 8,
                                    PatternVocabulary({NotePattern({0}, 8), NotePattern({0, 4}, 8)}));
  p.initial = {0.5, 0.5};
  p.transition = {{0.3, 0.7}, {0.6, 0.4}};
  const LatentStateSpace space(p);
  ASSERT_EQ(space.state_count(), 3u);
  EXPECT_EQ(space.describe(space.label(0)), "k:10000000/i:1");
  EXPECT_EQ(space.describe(space.label(1)), "k:10001000/i:1");
  EXPECT_EQ(space.describe(space.label(2)), "k:10001000/i:2");
  // psi_{(k'i')(ki)} = delta_{kk'} delta_{i(i'+1)} + delta_{i'I_k'} Gamma_{k'k} delta_{i1}.
  const int I[2] = {1, 2};
  for (uint32_t from = 0; from < 3; ++from) {
    for (uint32_t to = 0; to < 3; ++to) {
      const auto a = space.label(from).base, b = space.label(to).base;
      const double expected = (a.symbol == b.symbol && b.index == a.index + 1 ? 1.0 : 0.0) +
                              (a.index == I[a.symbol] && b.index == 1 ? p.transition[a.symbol][b.symbol] : 0.0);
      EXPECT_DOUBLE_EQ(space.transition(from, to).prob, expected) << from << "->" << to;
    }
  }
  EXPECT_EQ(space.transition(1, 2).value, 4);
  EXPECT_EQ(space.transition(2, 1).value, 4);
  EXPECT_EQ(space.transition(0, 0).value, 8);
}

TEST(StateSpaceTest, ZerothOrderRowsIgnoreSource) {
  Rng rng = make_rng(2);
  const LatentStateSpace space(random_params(ModelConfig::Parse("notemm0"), 8, rng));
  for (uint32_t z = 0; z < 8; ++z) {
    for (uint32_t from = 1; from < 8; ++from) {
      EXPECT_EQ(space.transition(from, z).prob, space.transition(0, z).prob);
    }
  }
}

TEST(StateSpaceTest, ShiftOutputAddsShiftDifference) {
  Rng rng = make_rng(3);
  const LatentStateSpace space(random_params(ModelConfig::Parse("notemm1s"), 8, rng));
  const long from = oracle::find_state(space, [](const StateLabel& l) { return l.base.symbol == 3 && l.shift == 0; });
  const long to = oracle::find_state(space, [](const StateLabel& l) { return l.base.symbol == 1 && l.shift == 1; });
  ASSERT_GE(from, 0);
  ASSERT_GE(to, 0);
  const Transition t = space.transition(from, to);
  EXPECT_GT(t.prob, 0.0);
  EXPECT_EQ(t.value, 3);
}

TEST(StateSpaceTest, DivisionContinuationIsForced) {
  Rng rng = make_rng(4);
  const LatentStateSpace space(random_params(ModelConfig::Parse("notemm1d"), 8, rng));
  const int h = space.catalog().global_index(4, 2);  // 2+2
  const long first = oracle::find_state(space, [&](const StateLabel& l) {
    return l.base.symbol == 3 && l.division == h && l.part == 0;
  });
  ASSERT_GE(first, 0);
  int successors = 0;
  space.for_each_successor(first, [&](uint32_t z, double p, int v) {
    ++successors;
    const StateLabel l = space.label(z);
    EXPECT_EQ(l.base.symbol, 3);
    EXPECT_EQ(l.division, h);
    EXPECT_EQ(l.part, 1);
    EXPECT_DOUBLE_EQ(p, 1.0);
    EXPECT_EQ(v, 2);
  });
  EXPECT_EQ(successors, 1);
}

class VariantTest : public ::testing::TestWithParam<ModelConfig> {};

TEST_P(VariantTest, RowsAreStochasticAndMatchPointQueries) {
  const ModelConfig c = GetParam();
  Rng rng = make_rng(10);
  const LatentStateSpace space(random_params(c, test_bar_length(c), rng, 0.7));
  double init = 0.0;
  space.for_each_initial([&](uint32_t z0, double p) {
    init += p;
    EXPECT_DOUBLE_EQ(p, space.initial(z0));
  });
  EXPECT_NEAR(init, 1.0, 1e-9);

  auto check_row = [&](auto enumerate, auto query) {
    std::map<uint32_t, Transition> seen;
    double sum = 0.0;
    enumerate([&](uint32_t z, double p, int v) {
      EXPECT_TRUE(seen.emplace(z, Transition{p, v}).second);
      EXPECT_GE(v, 1);
      EXPECT_LE(v, space.bar_length());
      sum += p;
    });
    if (!seen.empty()) EXPECT_NEAR(sum, 1.0, 1e-9);
    for (uint32_t z = 0; z < space.state_count(); ++z) {
      const Transition t = query(z);
      const auto it = seen.find(z);
      if (it == seen.end()) {
        EXPECT_EQ(t.prob, 0.0);
      } else {
        EXPECT_NEAR(t.prob, it->second.prob, 1e-15);
        EXPECT_EQ(t.value, it->second.value);
      }
    }
  };
  for (uint32_t z0 = 0; z0 < space.boundary_count(); ++z0) {
    if (space.initial(z0) <= 0.0) continue;
    check_row([&](auto f) { space.for_each_boundary_successor(z0, f); },
              [&](uint32_t z) { return space.boundary_transition(z0, z); });
  }
  for (uint32_t from = 0; from < space.state_count(); ++from) {
    check_row([&](auto f) { space.for_each_successor(from, f); },
              [&](uint32_t z) { return space.transition(from, z); });
  }
}

TEST_P(VariantTest, SequenceProbabilitiesSumToOne) {
  const ModelConfig c = GetParam();
  const int nb = test_bar_length(c);
  Rng rng = make_rng(20);
  const LatentStateSpace space(random_params(c, nb, rng));
  const int n = 3;
  double total = 0.0;
  std::vector<int> r(n, 1);
  for (;;) {
    total += std::exp2(sequence_log_prob(space, RhythmScore::FromNoteValues(0, r, nb)));
    int i = 0;
    while (i < n && r[i] == nb) r[i++] = 1;
    if (i == n) break;
    ++r[i];
  }
  EXPECT_NEAR(total, 1.0, 1e-9) << c.name();
}

TEST_P(VariantTest, SequenceProbabilityMatchesPathEnumeration) {
  const ModelConfig c = GetParam();
  const int nb = test_bar_length(c);
  Rng rng = make_rng(30);
  const LatentStateSpace space(random_params(c, nb, rng));
  std::map<std::vector<int>, double> by_values;
  oracle::enumerate_paths(space, 3, [&](const LatentPath&, double p, const std::vector<int>& v) {
    by_values[v] += p;
  });
  for (const auto& [values, prob] : by_values) {
    const double got = std::exp2(sequence_log_prob(space, RhythmScore::FromNoteValues(0, values, nb)));
    EXPECT_NEAR(got, prob, 1e-12 + 1e-9 * prob);
  }
}

TEST_P(VariantTest, PathCountsUseEveryStep) {
  const ModelConfig c = GetParam();
  const int nb = test_bar_length(c);
  Rng rng = make_rng(40);
  const LatentStateSpace space(random_params(c, nb, rng));
  int checked = 0;
  oracle::enumerate_paths(space, 3, [&](const LatentPath& path, double, const std::vector<int>& v) {
    if (checked++ > 50) return;
    EXPECT_EQ(space.path_values(path), v);
    ModelParams counts = make_empty_params(c, nb, space.params().patterns);
    space.accumulate_counts(path, counts);
    double init = 0.0, trans = 0.0, shift = 0.0, div = 0.0;
    for (double x : counts.initial) init += x;
    for (double x : counts.unigram) trans += x;
    for (const auto& row : counts.transition) for (double x : row) trans += x;
    for (const auto& row : counts.transition2) for (double x : row) trans += x;
    for (const auto& row : counts.division) for (double x : row) div += x;
    for (double x : counts.shift) shift += x;
    if (c.family != Family::kNote) EXPECT_EQ(init, 1.0);
    if (c.shift) EXPECT_EQ(shift, 4.0);
    if (c.family == Family::kNote && !c.division) EXPECT_EQ(init + trans, 3.0);
    if (c.family == Family::kMet && !c.division) EXPECT_EQ(trans, 3.0);
    if (c.division) EXPECT_LE(div, 3.0);
  });
  EXPECT_GT(checked, 0);
}

INSTANTIATE_TEST_SUITE_P(AllVariants, VariantTest, ::testing::ValuesIn([] {
                           std::vector<ModelConfig> out;
                           for (auto c : listed_variants()) {
                             c.bayesian = false;
                             if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
                           }
                           return out;
                         }()),
                         [](const auto& info) { return info.param.name(); });

TEST(SequenceProbTest, FirstOrderProduct) {
  Rng rng = make_rng(5);
  const ModelParams p = random_params(ModelConfig::Parse("notemm1"), 8, rng);
  const LatentStateSpace space(p);
  const double expected = std::log2(p.initial[1] * p.transition[1][1] * p.transition[1][3]);
  EXPECT_NEAR(sequence_log_prob(space, RhythmScore({0, 2, 4, 8})), expected, 1e-12);
}

TEST(SequenceProbTest, DeterministicModel) {
  const LatentStateSpace space(one_hot_note1(8));
  EXPECT_EQ(sequence_log_prob(space, RhythmScore::FromNoteValues(0, std::vector<int>{2, 3, 4, 5})), 0.0);
  EXPECT_TRUE(std::isinf(sequence_log_prob(space, RhythmScore::FromNoteValues(0, std::vector<int>{2, 4}))));
}

TEST(SequenceProbTest, ModificationsCollapseToBaseModel) {
  Rng rng = make_rng(6);
  for (Family f : {Family::kNote, Family::kMet, Family::kPat}) {
    const int nb = f == Family::kPat ? 4 : 8;
    const ModelParams base = random_params({f, 1}, nb, rng);
    const LatentStateSpace base_space(base);
    for (auto [s, d] : {std::pair{true, false}, {false, true}, {true, true}}) {
      ModelParams mod = make_empty_params({f, 1, s, d}, nb, base.patterns);
      mod.initial = base.initial;
      mod.transition = base.transition;
      set_trivial_modifications(mod);
      const LatentStateSpace mod_space(mod);
      for (int t = 0; t < 10; ++t) {
        std::vector<int> r(6);
        for (int& x : r) x = 1 + static_cast<int>(rng() % nb);
        const RhythmScore score = RhythmScore::FromNoteValues(static_cast<int>(rng() % nb), r, nb);
        for (auto conv : {SymbolConvention::kNoteValues, SymbolConvention::kInitialPosition}) {
          EXPECT_NEAR(sequence_log_prob(mod_space, score, conv), sequence_log_prob(base_space, score, conv), 1e-9)
              << mod.config.name();
        }
      }
    }
  }
}

TEST(SequenceProbTest, ZerothOrderEqualsFirstOrderWithRepeatedRows) {
  Rng rng = make_rng(7);
  for (Family f : {Family::kNote, Family::kMet}) {
    const ModelParams p0 = random_params({f, 0}, 8, rng);
    ModelParams p1 = make_empty_params({f, 1}, 8);
    p1.initial = p0.initial;
    p1.transition.assign(8, p0.unigram);
    const LatentStateSpace s0(p0), s1(p1);
    for (int t = 0; t < 10; ++t) {
      std::vector<int> r(5);
      for (int& x : r) x = 1 + static_cast<int>(rng() % 8);
      const RhythmScore score = RhythmScore::FromNoteValues(3, r);
      EXPECT_NEAR(sequence_log_prob(s0, score), sequence_log_prob(s1, score), 1e-12);
    }
  }
}

TEST(SequenceProbTest, InitialPositionConvention) {
  Rng rng = make_rng(8);
  const ModelParams p = random_params(ModelConfig::Parse("metmm1"), 8, rng);
  const LatentStateSpace space(p);
  const RhythmScore score({4, 6, 8, 12});
  const double joint = std::log2(p.initial[4] * p.transition[4][6] * p.transition[6][0] * p.transition[0][4]);
  EXPECT_NEAR(sequence_log_prob(space, score, SymbolConvention::kInitialPosition), joint, 1e-12);
  double marginal = 0.0;
  for (int b0 = 0; b0 < 8; ++b0) {
    marginal += std::exp2(sequence_log_prob(space, RhythmScore({b0, b0 + 2, b0 + 4, b0 + 8}),
                                            SymbolConvention::kInitialPosition));
  }
  EXPECT_NEAR(sequence_log_prob(space, score), std::log2(marginal), 1e-12);
}

TEST(MaskPolicyTest, UnnormalizedRowsOnlyLoseMass) {
  Rng rng = make_rng(9);
  const ModelParams p = random_params(ModelConfig::Parse("metmm1sd"), 4, rng);
  const LatentStateSpace norm(p), raw(p, MaskPolicy::kUnnormalized);
  for (uint32_t z = 0; z < raw.state_count(); ++z) {
    double sum = 0.0;
    raw.for_each_successor(z, [&](uint32_t, double q, int) { sum += q; });
    EXPECT_LE(sum, 1.0 + 1e-12);
    raw.for_each_successor(z, [&](uint32_t to, double q, int) {
      const double renormalized = norm.transition(z, to).prob;
      if (renormalized > 0.0) EXPECT_LE(q, renormalized + 1e-15);
    });
  }
}

}  // namespace
}  // namespace rhythm
