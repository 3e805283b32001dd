// Piece-specific parameter learning by Gibbs sampling, and transcription.

#ifndef RHYTHM_GIBBS_H_
#define RHYTHM_GIBBS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "rhythm/inference.h"

namespace rhythm {

struct Concentrations {
  double initial = 10.0;
  double transition = 10.0;  // also used for unigrams and second-order rows
  double division = 10.0;
  double shift = 10.0;
};

/// Dirichlet-process priors: every parameter row of `base` is a base
/// distribution, scaled by the matching concentration.
struct Hyperparams {
  ModelParams base;
  Concentrations alpha;
  double xi0 = 0.9;    // presets the modification rows of `base` were built from
  double zeta0 = 0.9;
};

struct GibbsConfig {
  int iterations = 100;
  size_t beam_width = kNoBeam;
  uint64_t seed = 0;
  uint64_t stream = 0;  // per-piece stream index
  MaskPolicy policy = MaskPolicy::kRenormalize;
};

struct TranscriptionResult {
  std::vector<int> note_values;
  int first_position = 0;  // b_0 of the decoded path; 0 for note-value models
  LatentPath path;
  std::vector<std::string> state_labels;  // z_0 .. z_N
  double log_likelihood = 0.0;            // log P(d_{1:N}) under the final parameters
  double path_log_prob = 0.0;             // log P(path, d_{1:N}) of the decoded path
  std::vector<double> trace;              // log-likelihood after each parameter sweep
  int best_iteration = -1;
};

struct GibbsFit {
  ModelParams params;
  TranscriptionResult result;
};

/// Beam width used when none is configured: 200 for pattern models with
/// divisions, exact otherwise.
size_t default_beam_width(const ModelConfig& config);

/// One draw from Dir(alpha * base + counts) for every row of the model.
ModelParams sample_posterior(const Hyperparams& hp, const ModelParams& counts, Rng& rng);

/// Alternates path resampling (FFBS) and parameter resampling, starting from
/// the base distributions; returns the sampled parameters with the highest
/// likelihood and the Viterbi transcription under them.
GibbsFit gibbs_fit(const Hyperparams& hp, const Performance& performance, const TimingParams& tp,
                   const GibbsConfig& gibbs);

/// Viterbi transcription under fixed parameters.
TranscriptionResult transcribe(const ModelParams& params, const Performance& performance,
                               const TimingParams& tp, size_t beam_width = kNoBeam,
                               MaskPolicy policy = MaskPolicy::kRenormalize);

/// Dispatches on config.bayesian: Gibbs fitting, or decoding under hp.base.
TranscriptionResult transcribe(const ModelConfig& config, const Hyperparams& hp,
                               const Performance& performance, const TimingParams& tp,
                               const GibbsConfig& gibbs);

}  // namespace rhythm

#endif  // RHYTHM_GIBBS_H_
