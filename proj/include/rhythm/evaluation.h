// Metrics: cross entropy, error rate, entropies, and the repetition study.

#ifndef RHYTHM_EVALUATION_H_
#define RHYTHM_EVALUATION_H_

#include <functional>
#include <string>
#include <vector>

#include "rhythm/gibbs.h"
#include "rhythm/training.h"

namespace rhythm {

struct CrossEntropyReport {
  size_t notes = 0;
  /// -log2 P(r_1..r_N) per note, first position marginalized.
  double bits_per_note = 0.0;
  /// -log2 P(b_0, r_1..r_N) per note; equals bits_per_note for note-value
  /// models, which do not encode b_0.
  double bits_per_note_with_initial = 0.0;
  std::vector<double> piece_log2;
  std::vector<double> piece_log2_with_initial;
};

/// Infinite when any piece has zero probability.
CrossEntropyReport cross_entropy(const ModelParams& params, const Corpus& corpus,
                                 MaskPolicy policy = MaskPolicy::kRenormalize);

double error_rate(std::span<const int> estimated, std::span<const int> truth);

double distribution_entropy(std::span<const double> p);

/// Stationary distribution of the matrix with `smoothing` added to every
/// entry, solved by elimination; throws if the smoothed chain is reducible.
std::vector<double> stationary_distribution(const std::vector<Distribution>& t,
                                            double smoothing = 1e-12);

/// Entropy rate in bits per symbol, weighting rows by the stationary
/// distribution.
double entropy_rate(const std::vector<Distribution>& t, double smoothing = 1e-12);

/// Row entropies weighted by `occupancy` (for example visit counts).
double weighted_row_entropy(const std::vector<Distribution>& t, std::span<const double> occupancy);

struct EntropyPopulations {
  std::vector<double> piece;    // (a) piece-specific
  std::vector<double> sampled;  // (b) length-matched samples from the generic model
  std::vector<double> dirichlet;  // (c) draws from the Dirichlet process
  double generic = 0.0;           // entropy (rate) of the generic model itself
};

/// Order-0 generic models give distribution entropies; first-order models
/// give transition entropies, where per-piece and sampled matrices are
/// weighted by their visit counts and Dirichlet draws by their stationary
/// distribution.
EntropyPopulations sparseness_study(const ModelParams& generic, const Corpus& corpus,
                                    double alpha, int n_samples, Rng& rng);

/// Draws a score of `length` notes from the model's generative process.
RhythmScore sample_score(const ModelParams& params, int length, Rng& rng);

struct BenchmarkEntry {
  std::string model;
  bool ok = true;
  std::string failure;
  std::vector<double> seed_error_rates;  // note-weighted over pieces, one per seed
  double mean_error = 0.0;
  double sd_error = 0.0;
  double seconds = 0.0;
};

struct BenchmarkSetup {
  std::vector<std::string> models;
  std::vector<uint64_t> seeds;
  TimingParams timing;
  int iterations = 100;
  size_t beam_width = kNoBeam;  // kNoBeam picks default_beam_width per model
  Concentrations alpha;
  double xi0 = 0.9;
  double zeta0 = 0.9;
  SmoothingConfig smoothing;
  int jobs = 1;
};

/// Trains each model on `train`, transcribes every performance of `test`
/// for every seed, and reports error-rate mean and standard deviation over
/// seeds with the wall-clock time per model. Failures are isolated per
/// model.
std::vector<BenchmarkEntry> benchmark(const BenchmarkSetup& setup, const Corpus& train,
                                      const Corpus& test,
                                      const std::vector<Performance>& performances);

/// Runs f(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(size_t count, int jobs, const std::function<void(size_t)>& f);

}  // namespace rhythm

#endif  // RHYTHM_EVALUATION_H_
