#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rhythm/io.h"

namespace rhythm {
namespace {

void expect_same_params(const ModelParams& a, const ModelParams& b) {
  EXPECT_EQ(a.config, b.config);
  EXPECT_EQ(a.bar_length, b.bar_length);
  EXPECT_EQ(a.patterns, b.patterns);
  EXPECT_EQ(a.initial, b.initial);
  EXPECT_EQ(a.unigram, b.unigram);
  EXPECT_EQ(a.transition, b.transition);
  EXPECT_EQ(a.transition2, b.transition2);
  EXPECT_EQ(a.division, b.division);
  EXPECT_EQ(a.shift, b.shift);
}

TEST(IoTest, CorpusRoundTrip) {
  Corpus c;
  c.add("a", RhythmScore({0, 2, 4, 8}));
  c.add("b", RhythmScore({3, 4, 12}));
  const Json j = corpus_to_json(c);
  EXPECT_EQ(j.dump(), R"({"bar_length":8,"pieces":[{"id":"a","onsets":[0,2,4,8]},{"id":"b","onsets":[3,4,12]}]})");
  const Corpus d = corpus_from_json(Json::parse(j.dump()));
  EXPECT_EQ(d.ids, c.ids);
  EXPECT_EQ(d.pieces[1].onsets(), c.pieces[1].onsets());
  EXPECT_THROW(corpus_from_json(Json::parse(R"({"pieces":[{"id":"x","onsets":[4,2]}]})")), Error);
  EXPECT_THROW(corpus_from_json(Json::parse(R"({"bar_length":8})")), Error);
}

TEST(IoTest, RawCorpusDefaults) {
  const auto raw = raw_corpus_from_json(Json::parse(
      R"({"ticks_per_quarter":96,"pieces":[{"id":"a","onsets":[0,24]},{"meter":"3/4","onsets":[0,1]}]})"));
  ASSERT_EQ(raw.size(), 2u);
  EXPECT_EQ(raw[0].ticks_per_quarter, 96);
  EXPECT_EQ(raw[0].meter, "4/4");
  EXPECT_EQ(raw[1].meter, "3/4");
  EXPECT_EQ(raw[1].id, "piece1");
}

TEST(IoTest, ParamsRoundTripEveryVariant) {
  Rng rng = make_rng(1);
  for (ModelConfig c : listed_variants()) {
    c.bayesian = false;
    const int nb = c.family == Family::kPat ? 4 : 8;
    const ModelParams p = random_params(c, nb, rng, 0.3);
    const Json j = params_to_json(p);
    expect_same_params(params_from_json(Json::parse(j.dump())), p);
  }
}

TEST(IoTest, ParamsUseReadableKeys) {
  ModelParams p = make_empty_params(ModelConfig::Parse("notemm1sd"), 8);
  p.initial[1] = 1.0;
  for (auto& row : p.transition) row[3] = 1.0;
  set_trivial_modifications(p);
  p.division[3] = {0.5, 0.5, 0.0, 0.0};
  const Json j = params_to_json(p);
  EXPECT_EQ(j.at("initial").at("r:2"), 1.0);
  EXPECT_EQ(j.at("transition").at("r:2->r:4"), 1.0);
  EXPECT_EQ(j.at("division").at("r:4->h:4"), 0.5);
  EXPECT_EQ(j.at("division").at("r:4->h:1+3"), 0.5);
  EXPECT_EQ(j.at("shift").at("s:0"), 1.0);
  EXPECT_FALSE(j.at("shift").contains("s:-1"));

  Rng rng = make_rng(3);
  const ModelParams q = random_params(ModelConfig::Parse("notemm2"), 8, rng);
  EXPECT_TRUE(params_to_json(q).at("transition2").contains("r:1,r:2->r:4"));
  const ModelParams pat = random_params(ModelConfig::Parse("patmm1"), 8, rng);
  EXPECT_EQ(params_to_json(pat).at("patterns").size(), 255u);
  EXPECT_TRUE(params_to_json(pat).at("transition").contains("k:10001000->k:10000000"));

  Json bad = j;
  bad["transition"]["r:2->r:9"] = 0.0;
  EXPECT_THROW(params_from_json(bad), Error);
  Json unnormalized = j;
  unnormalized["initial"]["r:3"] = 0.5;
  EXPECT_THROW(params_from_json(unnormalized), Error);
}

TEST(IoTest, HyperparamsRoundTrip) {
  Rng rng = make_rng(2);
  Hyperparams hp;
  hp.base = random_params(ModelConfig::Parse("metmm1sd"), 8, rng);
  hp.alpha = {1.0, 2.0, 3.0, 4.0};
  hp.xi0 = 0.8;
  hp.zeta0 = 0.7;
  const ModelConfig model = ModelConfig::Parse("metmm1sdb");
  ModelConfig back;
  const Hyperparams got = hyperparams_from_json(Json::parse(hyperparams_to_json(hp, model).dump()), &back);
  EXPECT_EQ(back, model);
  EXPECT_EQ(got.alpha.division, 3.0);
  EXPECT_EQ(got.xi0, 0.8);
  EXPECT_EQ(got.zeta0, 0.7);
  expect_same_params(got.base, hp.base);
  EXPECT_THROW(hyperparams_from_json(hyperparams_to_json(hp, ModelConfig::Parse("metmm1b"))), Error);
}

TEST(IoTest, PerformancesRoundTrip) {
  PerformanceSet set;
  set.ids = {"a", "b"};
  set.performances = {{{0.0, 0.1, 0.30000000000000004}}, {{1.0, 2.5}}};
  set.timing = TimingParams::FromTempo(144, 0.04);
  set.has_timing = true;
  set.seed = 42;
  const PerformanceSet got = performances_from_json(Json::parse(performances_to_json(set).dump()));
  EXPECT_EQ(got.ids, set.ids);
  EXPECT_EQ(got.performances[0].onsets, set.performances[0].onsets);
  EXPECT_NEAR(got.timing.v, set.timing.v, 1e-15);
  EXPECT_EQ(got.seed, 42u);

  const Performance p{{0.0, 0.125, 1.0 / 3.0}};
  EXPECT_EQ(performance_from_csv(performance_to_csv(p)).onsets, p.onsets);
  EXPECT_EQ(performance_from_csv("0\n0.5\r\n\n1\n").onsets, (std::vector<double>{0, 0.5, 1}));
  EXPECT_THROW(performance_from_csv("onset\n0\nx\n"), Error);
  EXPECT_THROW(performance_from_csv("onset\n1\n0.5\n"), Error);
}

TEST(IoTest, TranscriptionsAndErrorReport) {
  PieceTranscription a;
  a.id = "a";
  a.result.note_values = {2, 2, 4};
  a.result.first_position = 0;
  a.result.log_likelihood = 1.5;
  a.result.trace = {-1.0, -std::numeric_limits<double>::infinity(), 1.5};
  a.result.path = {3, {1, 2, 3}};
  a.result.state_labels = {"b:0", "b:2", "b:4", "b:0"};
  PieceTranscription b;
  b.id = "b";
  b.ok = false;
  b.failure = "no path";
  const auto back = transcriptions_from_json(Json::parse(transcriptions_to_json("metmm1", {a, b}).dump()));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].result.note_values, a.result.note_values);
  EXPECT_EQ(back[0].result.trace[0], -1.0);
  EXPECT_TRUE(std::isinf(back[0].result.trace[1]));
  EXPECT_EQ(back[0].result.path.states, a.result.path.states);
  EXPECT_EQ(back[0].result.state_labels, a.result.state_labels);
  EXPECT_FALSE(back[1].ok);
  EXPECT_EQ(back[1].failure, "no path");
  EXPECT_EQ(transcription_score(a.result, 8).onsets(), (std::vector<int>{0, 2, 4, 8}));

  Corpus truth;
  truth.add("a", RhythmScore({0, 2, 4, 6}));
  const ErrorReport r = compare_transcriptions({a}, truth);
  EXPECT_EQ(r.total_errors, 1u);
  EXPECT_DOUBLE_EQ(r.error_rate(), 1.0 / 3.0);
  EXPECT_EQ(error_report_to_csv(r), "id,notes,errors,error_rate\na,3,1,0.33333333333333331\ntotal,3,1,0.33333333333333331\n");
  EXPECT_THROW(compare_transcriptions({a, b}, truth), Error);
  Corpus other;
  other.add("z", RhythmScore({0, 2}));
  EXPECT_THROW(compare_transcriptions({a}, other), Error);
}

}  // namespace
}  // namespace rhythm
