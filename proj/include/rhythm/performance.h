// Constant-tempo Gaussian timing model and the transcription HMM built from a
// score-model state space and one performance.

#ifndef RHYTHM_PERFORMANCE_H_
#define RHYTHM_PERFORMANCE_H_

#include <memory>
#include <span>
#include <vector>

#include "rhythm/random.h"
#include "rhythm/state_space.h"

namespace rhythm {

struct TimingParams {
  double v = 60.0 / (144.0 * 4.0);  // seconds per 16th note
  double sigma = 0.04;              // onset deviation, seconds

  static TimingParams FromTempo(double bpm, double sigma);
  double tempo_bpm() const { return 60.0 / (4.0 * v); }
  void validate() const;
};

/// Performed onset times in seconds.
struct Performance {
  std::vector<double> onsets;

  static Performance FromDurations(std::span<const double> durations, double t0 = 0.0);
  std::vector<double> durations() const;
  int note_count() const { return static_cast<int>(onsets.size()) - 1; }
  /// Throws unless there are at least two strictly increasing onsets.
  void validate() const;
};

/// log Gauss(d; v r, sigma^2), natural log.
double duration_log_density(int r, double d, const TimingParams& tp);

struct SynthesisStats {
  size_t redraws = 0;
};

/// Draws d_n ~ Gauss(v r_n, sigma^2), redrawing any d_n <= d_min; t_0 = 0.
Performance synthesize(const RhythmScore& score, const TimingParams& tp, Rng& rng,
                       double d_min = 1e-3, SynthesisStats* stats = nullptr);

/// A score-model state space paired with per-note emission log-densities.
class TranscriptionHmm {
 public:
  TranscriptionHmm(std::shared_ptr<const LatentStateSpace> space, const TimingParams& tp,
                   std::span<const double> durations);

  const LatentStateSpace& space() const { return *space_; }
  const std::shared_ptr<const LatentStateSpace>& shared_space() const { return space_; }
  const TimingParams& timing() const { return timing_; }
  int length() const { return static_cast<int>(durations_.size()); }
  const std::vector<double>& durations() const { return durations_; }

  /// Emission log-densities of note n (0-based) indexed by note value;
  /// entry 0 is -infinity.
  const double* emission_row(int n) const { return &emission_[static_cast<size_t>(n) * stride_]; }
  double log_emission(int n, int value) const { return emission_row(n)[value]; }

 private:
  std::shared_ptr<const LatentStateSpace> space_;
  TimingParams timing_;
  std::vector<double> durations_;
  size_t stride_;
  std::vector<double> emission_;
};

TranscriptionHmm build_transcription_hmm(std::shared_ptr<const LatentStateSpace> space,
                                         const TimingParams& tp,
                                         std::span<const double> durations);

}  // namespace rhythm

#endif  // RHYTHM_PERFORMANCE_H_
