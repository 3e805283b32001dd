#include <gtest/gtest.h>

#include <cmath>

#include "oracle.h"
#include "rhythm/performance.h"

namespace rhythm {
namespace {

TEST(TimingTest, DensityPeaksAtMean) {
  const TimingParams tp = TimingParams::FromTempo(105.0, 0.04);
  EXPECT_NEAR(tp.v, 60.0 / 420.0, 1e-15);
  EXPECT_NEAR(tp.tempo_bpm(), 105.0, 1e-12);
  const double peak = std::log(1.0 / (0.04 * std::sqrt(2.0 * M_PI)));
  EXPECT_NEAR(duration_log_density(2, 2.0 * tp.v, tp), peak, 1e-12);
  EXPECT_NEAR(duration_log_density(2, 2.0 * tp.v + 0.04, tp), peak - 0.5, 1e-12);
  EXPECT_NEAR(duration_log_density(3, 0.123, tp), oracle::gaussian_log_density(0.123, 3.0 * tp.v, 0.04),
              1e-12);
}

TEST(TimingTest, DensityIntegratesToOne) {
  const TimingParams tp = TimingParams::FromTempo(144.0, 0.04);
  const double mean = 4.0 * tp.v, lo = mean - 12 * tp.sigma, hi = mean + 12 * tp.sigma;
  const int steps = 20000;
  const double h = (hi - lo) / steps;
  double sum = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * std::exp(duration_log_density(4, lo + i * h, tp));
  }
  EXPECT_NEAR(sum * h / 3.0, 1.0, 1e-6);
}

TEST(TimingTest, RejectsInvalidParameters) {
  EXPECT_THROW(TimingParams::FromTempo(0.0, 0.04), Error);
  EXPECT_THROW(TimingParams::FromTempo(120.0, 0.0).validate(), Error);
}

TEST(PerformanceTest, DurationsAndValidation) {
  const Performance p = Performance::FromDurations(std::vector<double>{0.5, 0.25, 0.25}, 1.0);
  EXPECT_EQ(p.onsets, (std::vector<double>{1.0, 1.5, 1.75, 2.0}));
  EXPECT_EQ(p.durations(), (std::vector<double>{0.5, 0.25, 0.25}));
  EXPECT_EQ(p.note_count(), 3);
  EXPECT_NO_THROW(p.validate());
  EXPECT_THROW((Performance{{0.0}}).validate(), Error);
  EXPECT_THROW((Performance{{0.0, 0.5, 0.5}}).validate(), Error);
}

TEST(SynthesisTest, SampleMeanMatchesTempo) {
  const TimingParams tp = TimingParams::FromTempo(144.0, 0.04);
  const int n = 10000;
  const RhythmScore score = RhythmScore::FromNoteValues(0, std::vector<int>(n, 4));
  Rng rng = make_rng(11);
  const std::vector<double> d = synthesize(score, tp, rng).durations();
  double mean = 0.0;
  for (double x : d) mean += x / n;
  EXPECT_NEAR(mean, 4.0 * tp.v, 3.0 * 0.04 / std::sqrt(n));
  EXPECT_NEAR(4.0 * tp.v, 0.4167, 1e-4);
}

TEST(SynthesisTest, DeterministicPerSeed) {
  const TimingParams tp;
  const RhythmScore score = RhythmScore::FromNoteValues(0, std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
  Rng a = make_rng(5), b = make_rng(5), c = make_rng(6);
  const Performance pa = synthesize(score, tp, a), pb = synthesize(score, tp, b), pc = synthesize(score, tp, c);
  EXPECT_EQ(pa.onsets, pb.onsets);
  EXPECT_NE(pa.onsets, pc.onsets);
  EXPECT_EQ(pa.onsets[0], 0.0);
}

TEST(SynthesisTest, NoiselessLimit) {
  TimingParams tp;
  tp.sigma = 1e-9;
  const std::vector<int> r{2, 2, 4, 1, 1, 6};
  Rng rng = make_rng(1);
  const std::vector<double> d = synthesize(RhythmScore::FromNoteValues(0, r), tp, rng).durations();
  for (size_t n = 0; n < r.size(); ++n) EXPECT_NEAR(d[n], tp.v * r[n], 1e-6);
}

TEST(SynthesisTest, RedrawsNonPositiveDurations) {
  TimingParams tp;
  tp.sigma = 1.0;
  SynthesisStats stats;
  Rng rng = make_rng(2);
  const Performance p = synthesize(RhythmScore::FromNoteValues(0, std::vector<int>(500, 1)), tp, rng, 1e-3, &stats);
  EXPECT_GT(stats.redraws, 0u);
  for (double d : p.durations()) EXPECT_GT(d, 1e-3);
}

TEST(TranscriptionHmmTest, EmissionTable) {
  const TimingParams tp;
  Rng rng = make_rng(3);
  auto space = std::make_shared<const LatentStateSpace>(random_params(ModelConfig::Parse("notemm1"), 8, rng));
  const std::vector<double> d{0.2, 0.31};
  const TranscriptionHmm hmm = build_transcription_hmm(space, tp, d);
  EXPECT_EQ(hmm.length(), 2);
  for (int n = 0; n < 2; ++n) {
    EXPECT_TRUE(std::isinf(hmm.log_emission(n, 0)));
    for (int r = 1; r <= 8; ++r) EXPECT_DOUBLE_EQ(hmm.log_emission(n, r), duration_log_density(r, d[n], tp));
  }
  EXPECT_THROW(build_transcription_hmm(space, tp, std::vector<double>{}), Error);
}

}  // namespace
}  // namespace rhythm
