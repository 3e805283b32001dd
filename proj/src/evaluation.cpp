#include "rhythm/evaluation.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <thread>

namespace rhythm {

CrossEntropyReport cross_entropy(const ModelParams& params, const Corpus& corpus, MaskPolicy policy) {
  if (corpus.empty()) throw Error("cross entropy needs a nonempty corpus");
  const LatentStateSpace space(params, policy);
  CrossEntropyReport report;
  double sum = 0.0, sum_initial = 0.0;
  for (const RhythmScore& score : corpus.pieces) {
    const double lp = sequence_log_prob(space, score, SymbolConvention::kNoteValues);
    const double lp0 = sequence_log_prob(space, score, SymbolConvention::kInitialPosition);
    report.piece_log2.push_back(lp);
    report.piece_log2_with_initial.push_back(lp0);
    sum += lp;
    sum_initial += lp0;
    report.notes += static_cast<size_t>(score.note_count());
  }
  report.bits_per_note = -sum / static_cast<double>(report.notes);
  report.bits_per_note_with_initial = -sum_initial / static_cast<double>(report.notes);
  return report;
}

double error_rate(std::span<const int> estimated, std::span<const int> truth) {
  if (estimated.size() != truth.size()) throw Error("note sequences differ in length");
  if (truth.empty()) throw Error("error rate of an empty sequence");
  size_t wrong = 0;
  for (size_t n = 0; n < truth.size(); ++n) wrong += estimated[n] != truth[n];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

double distribution_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log2(x);
  }
  return h;
}

std::vector<double> stationary_distribution(const std::vector<Distribution>& t, double smoothing) {
  const size_t S = t.size();
  if (S == 0) throw Error("empty transition matrix");
  if (!(smoothing >= 0.0)) throw Error("smoothing must be non-negative");
  std::vector<Distribution> m(S, Distribution(S));
  for (size_t i = 0; i < S; ++i) {
    if (t[i].size() != S) throw Error("transition matrix is not square");
    double total = 0.0;
    for (size_t j = 0; j < S; ++j) total += t[i][j] + smoothing;
    if (!(total > 0.0)) throw Error("transition row " + std::to_string(i) + " has no mass");
    for (size_t j = 0; j < S; ++j) m[i][j] = (t[i][j] + smoothing) / total;
  }
  // Grassmann-Taksar-Heyman elimination: subtraction-free, so nearly
  // decomposable chains keep full relative accuracy.
  for (size_t k = S - 1; k > 0; --k) {
    double out = 0.0;
    for (size_t j = 0; j < k; ++j) out += m[k][j];
    if (!(out > 0.0)) {
      throw Error("transition matrix is reducible: state " + std::to_string(k) +
                  " cannot reach any lower-numbered state");
    }
    for (size_t i = 0; i < k; ++i) m[i][k] /= out;
    for (size_t i = 0; i < k; ++i) {
      const double f = m[i][k];
      if (f == 0.0) continue;
      for (size_t j = 0; j < k; ++j) m[i][j] += f * m[k][j];
    }
  }
  std::vector<double> mu(S, 0.0);
  mu[0] = 1.0;
  double total = 1.0;
  for (size_t k = 1; k < S; ++k) {
    for (size_t i = 0; i < k; ++i) mu[k] += mu[i] * m[i][k];
    total += mu[k];
  }
  for (double& x : mu) x /= total;
  return mu;
}

double entropy_rate(const std::vector<Distribution>& t, double smoothing) {
  const std::vector<double> mu = stationary_distribution(t, smoothing);
  double h = 0.0;
  for (size_t i = 0; i < t.size(); ++i) h += mu[i] * distribution_entropy(t[i]);
  return h;
}

double weighted_row_entropy(const std::vector<Distribution>& t, std::span<const double> occupancy) {
  if (occupancy.size() != t.size()) throw Error("occupancy does not match the matrix");
  double h = 0.0, total = 0.0;
  for (size_t i = 0; i < t.size(); ++i) {
    if (occupancy[i] <= 0.0) continue;
    h += occupancy[i] * distribution_entropy(t[i]);
    total += occupancy[i];
  }
  return total > 0.0 ? h / total : 0.0;
}

namespace {

double empirical_entropy(std::span<const int> x, size_t symbols) {
  Distribution p(symbols, 0.0);
  for (int s : x) p[static_cast<size_t>(s)] += 1.0;
  for (double& c : p) c /= static_cast<double>(x.size());
  return distribution_entropy(p);
}

double empirical_transition_entropy(std::span<const int> x, size_t symbols) {
  std::vector<Distribution> counts(symbols, Distribution(symbols, 0.0));
  std::vector<double> occupancy(symbols, 0.0);
  for (size_t n = 1; n < x.size(); ++n) {
    counts[x[n - 1]][x[n]] += 1.0;
    occupancy[x[n - 1]] += 1.0;
  }
  for (size_t i = 0; i < symbols; ++i) {
    if (occupancy[i] > 0.0) {
      for (double& c : counts[i]) c /= occupancy[i];
    }
  }
  return weighted_row_entropy(counts, occupancy);
}

}  // namespace

EntropyPopulations sparseness_study(const ModelParams& generic, const Corpus& corpus, double alpha,
                                    int n_samples, Rng& rng) {
  if (generic.config.modified() || generic.config.order > 1) {
    throw Error("the repetition study needs an order-0 or first-order unmodified model");
  }
  if (!(alpha > 0.0)) throw Error("concentration must be positive");
  const size_t S = static_cast<size_t>(generic.symbol_count());
  const bool zeroth = generic.config.order == 0;
  EntropyPopulations out;
  out.generic = zeroth ? distribution_entropy(generic.unigram) : entropy_rate(generic.transition);

  for (const RhythmScore& score : corpus.pieces) {
    const std::vector<int> x = symbol_sequence(score, generic.config.family, generic.patterns);
    std::vector<int> y(x.size());
    if (zeroth) {
      for (int& s : y) s = static_cast<int>(sample_index(generic.unigram, rng));
      out.piece.push_back(empirical_entropy(x, S));
      out.sampled.push_back(empirical_entropy(y, S));
    } else {
      y[0] = static_cast<int>(sample_index(generic.initial, rng));
      for (size_t n = 1; n < y.size(); ++n) {
        y[n] = static_cast<int>(sample_index(generic.transition[static_cast<size_t>(y[n - 1])], rng));
      }
      out.piece.push_back(empirical_transition_entropy(x, S));
      out.sampled.push_back(empirical_transition_entropy(y, S));
    }
  }

  auto scaled = [&](const Distribution& base) {
    std::vector<double> a(base.size());
    for (size_t i = 0; i < base.size(); ++i) a[i] = alpha * base[i];
    return a;
  };
  for (int t = 0; t < n_samples; ++t) {
    if (zeroth) {
      out.dirichlet.push_back(distribution_entropy(sample_dirichlet(scaled(generic.unigram), rng)));
    } else {
      std::vector<Distribution> drawn;
      for (const auto& row : generic.transition) drawn.push_back(sample_dirichlet(scaled(row), rng));
      out.dirichlet.push_back(entropy_rate(drawn));
    }
  }
  return out;
}

RhythmScore sample_score(const ModelParams& params, int length, Rng& rng) {
  if (length < 1) throw Error("sampled scores need at least one note");
  const LatentStateSpace space(params);
  std::vector<uint32_t> states;
  std::vector<double> probs;
  std::vector<int> values;
  space.for_each_initial([&](uint32_t z0, double p) {
    states.push_back(z0);
    probs.push_back(p);
  });
  uint32_t z0 = states[sample_index(probs, rng)];
  const int first = space.initial_position(z0).value_or(0);

  std::vector<int> r;
  uint32_t z = z0;
  for (int n = 0; n < length; ++n) {
    states.clear();
    probs.clear();
    values.clear();
    auto collect = [&](uint32_t to, double p, int v) {
      states.push_back(to);
      probs.push_back(p);
      values.push_back(v);
    };
    if (n == 0) {
      space.for_each_boundary_successor(z, collect);
    } else {
      space.for_each_successor(z, collect);
    }
    const size_t i = sample_index(probs, rng);
    z = states[i];
    r.push_back(values[i]);
  }
  return RhythmScore::FromNoteValues(first, r, params.bar_length);
}

void parallel_for(size_t count, int jobs, const std::function<void(size_t)>& f) {
  const size_t workers = std::min(count, static_cast<size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (size_t i = next++; i < count; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<BenchmarkEntry> benchmark(const BenchmarkSetup& setup, const Corpus& train,
                                      const Corpus& test,
                                      const std::vector<Performance>& performances) {
  if (performances.size() != test.size()) throw Error("one performance per test piece is required");
  if (setup.seeds.empty()) throw Error("benchmark needs at least one seed");
  std::vector<BenchmarkEntry> out;
  for (const std::string& name : setup.models) {
    BenchmarkEntry entry;
    entry.model = name;
    const auto start = std::chrono::steady_clock::now();
    try {
      const ModelConfig config = ModelConfig::Parse(name);
      const ModelParams generic = estimate_params(train, {config.family, config.order}, setup.smoothing);
      const Hyperparams hp = assemble_hyperparams(generic, config, setup.alpha, setup.xi0, setup.zeta0);
      GibbsConfig gibbs;
      gibbs.iterations = setup.iterations;
      gibbs.beam_width = setup.beam_width == kNoBeam ? default_beam_width(config) : setup.beam_width;

      const size_t runs = config.bayesian ? setup.seeds.size() : 1;
      std::vector<std::vector<double>> wrong(runs, std::vector<double>(test.size(), 0.0));
      parallel_for(runs * test.size(), setup.jobs, [&](size_t job) {
        const size_t s = job / test.size(), p = job % test.size();
        GibbsConfig g = gibbs;
        g.seed = setup.seeds[s];
        g.stream = p;
        const TranscriptionResult res = transcribe(config, hp, performances[p], setup.timing, g);
        const std::vector<int> truth = to_note_values(test.pieces[p]);
        wrong[s][p] = error_rate(res.note_values, truth) * static_cast<double>(truth.size());
      });
      const double notes = static_cast<double>(test.total_notes());
      for (size_t s = 0; s < setup.seeds.size(); ++s) {
        const auto& w = wrong[config.bayesian ? s : 0];
        entry.seed_error_rates.push_back(std::accumulate(w.begin(), w.end(), 0.0) / notes);
      }
      const double k = static_cast<double>(entry.seed_error_rates.size());
      entry.mean_error = std::accumulate(entry.seed_error_rates.begin(), entry.seed_error_rates.end(), 0.0) / k;
      double var = 0.0;
      for (double e : entry.seed_error_rates) var += (e - entry.mean_error) * (e - entry.mean_error);
      const bool constant = std::all_of(entry.seed_error_rates.begin(), entry.seed_error_rates.end(),
                                        [&](double e) { return e == entry.seed_error_rates[0]; });
      entry.sd_error = k > 1 && !constant ? std::sqrt(var / (k - 1)) : 0.0;
    } catch (const std::exception& e) {
      entry.ok = false;
      entry.failure = e.what();
    }
    entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace rhythm
