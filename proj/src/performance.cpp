#include "rhythm/performance.h"

#include <cmath>
#include <limits>
#include <numbers>

namespace rhythm {

TimingParams TimingParams::FromTempo(double bpm, double sigma) {
  if (!(bpm > 0.0)) throw Error("tempo must be positive");
  TimingParams tp{60.0 / (bpm * 4.0), sigma};
  tp.validate();
  return tp;
}

void TimingParams::validate() const {
  if (!(v > 0.0) || !std::isfinite(v)) throw Error("inverse tempo must be positive");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error("sigma_t must be positive");
}

Performance Performance::FromDurations(std::span<const double> durations, double t0) {
  Performance p;
  p.onsets.reserve(durations.size() + 1);
  p.onsets.push_back(t0);
  for (double d : durations) p.onsets.push_back(p.onsets.back() + d);
  return p;
}

std::vector<double> Performance::durations() const {
  std::vector<double> d;
  for (size_t n = 1; n < onsets.size(); ++n) d.push_back(onsets[n] - onsets[n - 1]);
  return d;
}

void Performance::validate() const {
  if (onsets.size() < 2) throw Error("a performance needs at least two onsets");
  for (size_t n = 0; n < onsets.size(); ++n) {
    if (!std::isfinite(onsets[n])) throw Error("non-finite onset time");
    if (n > 0 && !(onsets[n] > onsets[n - 1])) throw Error("onset times must increase strictly");
  }
}

double duration_log_density(int r, double d, const TimingParams& tp) {
  const double u = (d - tp.v * r) / tp.sigma;
  return -0.5 * std::log(2.0 * std::numbers::pi * tp.sigma * tp.sigma) - 0.5 * u * u;
}

Performance synthesize(const RhythmScore& score, const TimingParams& tp, Rng& rng, double d_min,
                       SynthesisStats* stats) {
  tp.validate();
  std::normal_distribution<double> noise(0.0, tp.sigma);
  std::vector<double> durations;
  for (int r : to_note_values(score)) {
    double d = tp.v * r + noise(rng);
    while (!(d > d_min)) {
      if (stats) ++stats->redraws;
      d = tp.v * r + noise(rng);
    }
    durations.push_back(d);
  }
  return Performance::FromDurations(durations);
}

TranscriptionHmm::TranscriptionHmm(std::shared_ptr<const LatentStateSpace> space,
                                   const TimingParams& tp, std::span<const double> durations)
    : space_(std::move(space)),
      timing_(tp),
      durations_(durations.begin(), durations.end()),
      stride_(static_cast<size_t>(space_->bar_length()) + 1) {
  tp.validate();
  if (durations_.empty()) throw Error("transcription needs at least one note");
  emission_.assign(durations_.size() * stride_, -std::numeric_limits<double>::infinity());
  for (size_t n = 0; n < durations_.size(); ++n) {
    if (!std::isfinite(durations_[n])) throw Error("non-finite duration");
    for (size_t r = 1; r < stride_; ++r) {
      emission_[n * stride_ + r] = duration_log_density(static_cast<int>(r), durations_[n], tp);
    }
  }
}

TranscriptionHmm build_transcription_hmm(std::shared_ptr<const LatentStateSpace> space,
                                         const TimingParams& tp,
                                         std::span<const double> durations) {
  return TranscriptionHmm(std::move(space), tp, durations);
}

}  // namespace rhythm
