#include "rhythm/random.h"

#include <cmath>
#include <limits>
#include <vector>

namespace rhythm {

Rng make_rng(uint64_t seed, uint64_t stream) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream), static_cast<uint32_t>(stream >> 32)};
  return Rng(seq);
}

namespace {

// log of a Gamma(shape, 1) draw.
double log_gamma_draw(double shape, Rng& rng) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> g(shape, 1.0);
    double x = g(rng);
    while (!(x > 0.0)) x = g(rng);
    return std::log(x);
  }
  std::gamma_distribution<double> g(shape + 1.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = g(rng);
  while (!(x > 0.0)) x = g(rng);
  double v = u(rng);
  while (!(v > 0.0)) v = u(rng);
  return std::log(x) + std::log(v) / shape;
}

}  // namespace

Distribution sample_dirichlet(std::span<const double> alpha, Rng& rng) {
  std::vector<double> logs(alpha.size(), -std::numeric_limits<double>::infinity());
  double top = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] < 0.0 || !std::isfinite(alpha[i])) throw Error("invalid Dirichlet parameter");
    if (alpha[i] == 0.0) continue;
    logs[i] = log_gamma_draw(alpha[i], rng);
    top = std::max(top, logs[i]);
  }
  if (!std::isfinite(top)) throw Error("Dirichlet parameters are all zero");
  Distribution out(alpha.size(), 0.0);
  double sum = 0.0;
  for (size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] == 0.0) continue;
    out[i] = std::exp(logs[i] - top);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

size_t sample_index(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw Error("cannot sample from zero weights");
  std::uniform_real_distribution<double> u(0.0, total);
  const double x = u(rng);
  double acc = 0.0;
  size_t last = 0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (x < acc) return i;
  }
  return last;
}

ModelParams random_params(const ModelConfig& config, int bar_length, Rng& rng,
                          double concentration, PatternVocabulary patterns) {
  ModelParams p = make_empty_params(config, bar_length, std::move(patterns));
  p.config.bayesian = config.bayesian;
  auto fill = [&](Distribution& row) {
    const std::vector<double> alpha(row.size(), concentration);
    row = sample_dirichlet(alpha, rng);
  };
  fill(p.initial);
  if (!p.unigram.empty()) fill(p.unigram);
  for (auto& row : p.transition) fill(row);
  for (auto& row : p.transition2) fill(row);
  for (auto& row : p.division) fill(row);
  if (!p.shift.empty()) fill(p.shift);
  return p;
}

}  // namespace rhythm
