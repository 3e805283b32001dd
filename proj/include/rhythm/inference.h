// Decoding, likelihood and posterior sampling on a transcription HMM.

#ifndef RHYTHM_INFERENCE_H_
#define RHYTHM_INFERENCE_H_

#include <cstddef>
#include <vector>

#include "rhythm/performance.h"
#include "rhythm/random.h"

namespace rhythm {

class InferenceError : public Error {
 public:
  using Error::Error;
};

/// Beam width meaning "keep every state".
constexpr size_t kNoBeam = 0;

struct DecodeResult {
  LatentPath path;
  double log_prob = 0.0;  // natural log of P(path, d_{1:N})
  std::vector<int> note_values;
};

/// Exact max-product decoding. Ties go to the lowest predecessor index and,
/// at the end, to the lowest final state index.
DecodeResult viterbi(const TranscriptionHmm& hmm);
/// Viterbi restricted to the `width` best-scoring states at every step.
DecodeResult beam_viterbi(const TranscriptionHmm& hmm, size_t width);

/// Forward variables log alpha_n(z) for every retained state; step 0 holds
/// the boundary states.
struct ForwardLattice {
  struct Step {
    std::vector<uint32_t> states;
    std::vector<double> log_alpha;
  };
  std::vector<Step> steps;
  double log_likelihood = 0.0;
};

ForwardLattice forward(const TranscriptionHmm& hmm, size_t beam_width = kNoBeam);
/// Natural-log data likelihood log P(d_{1:N}).
double forward_loglik(const TranscriptionHmm& hmm, size_t beam_width = kNoBeam);

/// Posterior path sample by forward filtering, backward sampling.
LatentPath ffbs_sample(const TranscriptionHmm& hmm, const ForwardLattice& lattice, Rng& rng);

/// log P(path, d_{1:N}); -infinity for infeasible paths.
double path_log_prob(const TranscriptionHmm& hmm, const LatentPath& path);

}  // namespace rhythm

#endif  // RHYTHM_INFERENCE_H_
