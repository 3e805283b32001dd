#include "rhythm/gibbs.h"

#include <memory>

namespace rhythm {

size_t default_beam_width(const ModelConfig& config) {
  return config.family == Family::kPat && config.division ? 200 : kNoBeam;
}

namespace {

void resample_row(const Distribution& base, const Distribution& counts, double alpha,
                  Distribution& out, Rng& rng) {
  std::vector<double> a(base.size());
  double total = 0.0;
  for (size_t i = 0; i < base.size(); ++i) {
    a[i] = alpha * base[i] + (counts.empty() ? 0.0 : counts[i]);
    total += a[i];
  }
  out = total > 0.0 ? sample_dirichlet(a, rng) : base;
}

void resample_table(const std::vector<Distribution>& base, const std::vector<Distribution>& counts,
                    double alpha, std::vector<Distribution>& out, Rng& rng) {
  out.resize(base.size());
  for (size_t r = 0; r < base.size(); ++r) resample_row(base[r], counts.at(r), alpha, out[r], rng);
}

}  // namespace

ModelParams sample_posterior(const Hyperparams& hp, const ModelParams& counts, Rng& rng) {
  const ModelParams& b = hp.base;
  ModelParams out = b;
  resample_row(b.initial, counts.initial, hp.alpha.initial, out.initial, rng);
  if (!b.unigram.empty()) resample_row(b.unigram, counts.unigram, hp.alpha.transition, out.unigram, rng);
  resample_table(b.transition, counts.transition, hp.alpha.transition, out.transition, rng);
  resample_table(b.transition2, counts.transition2, hp.alpha.transition, out.transition2, rng);
  if (b.config.division) resample_table(b.division, counts.division, hp.alpha.division, out.division, rng);
  if (b.config.shift) resample_row(b.shift, counts.shift, hp.alpha.shift, out.shift, rng);
  return out;
}

TranscriptionResult transcribe(const ModelParams& params, const Performance& performance,
                               const TimingParams& tp, size_t beam_width, MaskPolicy policy) {
  performance.validate();
  auto space = std::make_shared<const LatentStateSpace>(params, policy);
  const std::vector<double> d = performance.durations();
  const TranscriptionHmm hmm(space, tp, d);
  const DecodeResult decoded = beam_width == kNoBeam ? viterbi(hmm) : beam_viterbi(hmm, beam_width);
  TranscriptionResult result;
  result.note_values = decoded.note_values;
  result.first_position = space->initial_position(decoded.path.boundary).value_or(0);
  result.path = decoded.path;
  result.path_log_prob = decoded.log_prob;
  result.log_likelihood = forward_loglik(hmm, beam_width);
  result.state_labels.push_back(space->describe(space->boundary_label(decoded.path.boundary)));
  for (uint32_t z : decoded.path.states) result.state_labels.push_back(space->describe(space->label(z)));
  return result;
}

GibbsFit gibbs_fit(const Hyperparams& hp, const Performance& performance, const TimingParams& tp,
                   const GibbsConfig& gibbs) {
  if (gibbs.iterations < 1) throw Error("Gibbs sampling needs at least one iteration");
  performance.validate();
  hp.base.validate(1e-6);
  const std::vector<double> d = performance.durations();
  Rng rng = make_rng(gibbs.seed, gibbs.stream);

  ModelParams theta = hp.base;
  auto space = std::make_shared<const LatentStateSpace>(theta, gibbs.policy);
  auto hmm = std::make_unique<TranscriptionHmm>(space, tp, d);
  ForwardLattice lattice = forward(*hmm, gibbs.beam_width);

  std::vector<double> trace{lattice.log_likelihood};
  ModelParams best = theta;
  double best_ll = lattice.log_likelihood;
  int best_iteration = 0;

  for (int it = 1; it <= gibbs.iterations; ++it) {
    const LatentPath path = ffbs_sample(*hmm, lattice, rng);
    ModelParams counts = make_empty_params(theta.config, theta.bar_length, theta.patterns);
    space->accumulate_counts(path, counts);
    theta = sample_posterior(hp, counts, rng);

    space = std::make_shared<const LatentStateSpace>(theta, gibbs.policy);
    hmm = std::make_unique<TranscriptionHmm>(space, tp, d);
    lattice = forward(*hmm, gibbs.beam_width);
    trace.push_back(lattice.log_likelihood);
    if (lattice.log_likelihood > best_ll) {
      best_ll = lattice.log_likelihood;
      best = theta;
      best_iteration = it;
    }
  }

  GibbsFit fit;
  fit.params = std::move(best);
  fit.result = transcribe(fit.params, performance, tp, gibbs.beam_width, gibbs.policy);
  fit.result.trace = std::move(trace);
  fit.result.best_iteration = best_iteration;
  return fit;
}

TranscriptionResult transcribe(const ModelConfig& config, const Hyperparams& hp,
                               const Performance& performance, const TimingParams& tp,
                               const GibbsConfig& gibbs) {
  if (config.non_bayesian() != hp.base.config.non_bayesian()) {
    throw Error("model " + config.name() + " does not match parameters for " + hp.base.config.name());
  }
  if (config.bayesian) return gibbs_fit(hp, performance, tp, gibbs).result;
  return transcribe(hp.base, performance, tp, gibbs.beam_width, gibbs.policy);
}

}  // namespace rhythm
