#include "rhythm/inference.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rhythm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Below this the scaled linear forward step is redone in log space.
constexpr double kUnderflowGuard = 1e-280;

double max_of(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  return m;
}

double log_sum_exp(const std::vector<double>& v) {
  const double m = max_of(v);
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - m);
  return m + std::log(sum);
}

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Positions of the `width` largest values, ties to the lower state index,
// returned in their original order.
std::vector<size_t> beam_positions(const std::vector<uint32_t>& states,
                                   const std::vector<double>& values, size_t width) {
  std::vector<size_t> order(states.size());
  std::iota(order.begin(), order.end(), size_t{0});
  if (width == kNoBeam || states.size() <= width) return order;
  auto better = [&](size_t a, size_t b) {
    return values[a] > values[b] || (values[a] == values[b] && states[a] < states[b]);
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(width), order.end(), better);
  order.resize(width);
  std::sort(order.begin(), order.end());
  return order;
}

template <class T>
void keep_positions(std::vector<T>& v, const std::vector<size_t>& keep) {
  if (keep.size() == v.size()) return;
  std::vector<T> out;
  out.reserve(keep.size());
  for (size_t i : keep) out.push_back(v[i]);
  v = std::move(out);
}

template <class F>
void visit_successors(const LatentStateSpace& space, int n, uint32_t from, F&& f) {
  if (n == 1) {
    space.for_each_boundary_successor(from, f);
  } else {
    space.for_each_successor(from, f);
  }
}

struct ViterbiStep {
  std::vector<uint32_t> states;
  std::vector<double> score;
  std::vector<uint32_t> back;  // position in the previous step
};

DecodeResult run_viterbi(const TranscriptionHmm& hmm, size_t width) {
  const LatentStateSpace& space = hmm.space();
  const int N = hmm.length();
  std::vector<ViterbiStep> steps(static_cast<size_t>(N) + 1);

  space.for_each_initial([&](uint32_t z0, double p) {
    steps[0].states.push_back(z0);
    steps[0].score.push_back(std::log(p));
  });
  {
    const auto keep = beam_positions(steps[0].states, steps[0].score, width);
    keep_positions(steps[0].states, keep);
    keep_positions(steps[0].score, keep);
  }
  if (steps[0].states.empty()) throw InferenceError("model has no initial state");

  std::vector<double> best(space.state_count(), kNegInf);
  std::vector<uint32_t> back_pos(space.state_count(), 0), back_state(space.state_count(), 0);
  std::vector<uint32_t> touched;
  for (int n = 1; n <= N; ++n) {
    const ViterbiStep& prev = steps[n - 1];
    const double* lphi = hmm.emission_row(n - 1);
    for (size_t i = 0; i < prev.states.size(); ++i) {
      const double s = prev.score[i];
      const uint32_t zprev = prev.states[i];
      visit_successors(space, n, zprev, [&](uint32_t z, double p, int v) {
        const double c = s + std::log(p) + lphi[v];
        if (c == kNegInf) return;
        if (best[z] == kNegInf) touched.push_back(z);
        if (c > best[z] || (c == best[z] && zprev < back_state[z])) {
          best[z] = c;
          back_pos[z] = static_cast<uint32_t>(i);
          back_state[z] = zprev;
        }
      });
    }
    ViterbiStep& cur = steps[n];
    cur.states.reserve(touched.size());
    for (uint32_t z : touched) {
      cur.states.push_back(z);
      cur.score.push_back(best[z]);
      cur.back.push_back(back_pos[z]);
      best[z] = kNegInf;
    }
    touched.clear();
    const auto keep = beam_positions(cur.states, cur.score, width);
    keep_positions(cur.states, keep);
    keep_positions(cur.score, keep);
    keep_positions(cur.back, keep);
    if (cur.states.empty()) {
      throw InferenceError("no path with nonzero probability reaches note " + std::to_string(n));
    }
  }

  const ViterbiStep& last = steps[static_cast<size_t>(N)];
  size_t arg = 0;
  for (size_t i = 1; i < last.states.size(); ++i) {
    if (last.score[i] > last.score[arg] ||
        (last.score[i] == last.score[arg] && last.states[i] < last.states[arg])) {
      arg = i;
    }
  }
  DecodeResult result;
  result.log_prob = last.score[arg];
  result.path.states.resize(static_cast<size_t>(N));
  size_t pos = arg;
  for (int n = N; n >= 1; --n) {
    result.path.states[static_cast<size_t>(n) - 1] = steps[static_cast<size_t>(n)].states[pos];
    pos = steps[static_cast<size_t>(n)].back[pos];
  }
  result.path.boundary = steps[0].states[pos];
  result.note_values = space.path_values(result.path);
  return result;
}

}  // namespace

DecodeResult viterbi(const TranscriptionHmm& hmm) { return run_viterbi(hmm, kNoBeam); }

DecodeResult beam_viterbi(const TranscriptionHmm& hmm, size_t width) {
  if (width == 0) throw Error("beam width must be positive");
  return run_viterbi(hmm, width);
}

ForwardLattice forward(const TranscriptionHmm& hmm, size_t beam_width) {
  const LatentStateSpace& space = hmm.space();
  const int N = hmm.length();
  const int nb = space.bar_length();
  ForwardLattice lat;
  lat.steps.resize(static_cast<size_t>(N) + 1);

  auto prune = [&](ForwardLattice::Step& step) {
    const auto keep = beam_positions(step.states, step.log_alpha, beam_width);
    keep_positions(step.states, keep);
    keep_positions(step.log_alpha, keep);
  };

  space.for_each_initial([&](uint32_t z0, double p) {
    lat.steps[0].states.push_back(z0);
    lat.steps[0].log_alpha.push_back(std::log(p));
  });
  prune(lat.steps[0]);
  if (lat.steps[0].states.empty()) throw InferenceError("model has no initial state");

  std::vector<double> acc(space.state_count(), 0.0);
  std::vector<uint32_t> touched;
  std::vector<double> e(static_cast<size_t>(nb) + 1, 0.0);
  for (int n = 1; n <= N; ++n) {
    const auto& prev = lat.steps[static_cast<size_t>(n) - 1];
    auto& cur = lat.steps[static_cast<size_t>(n)];
    const double* lphi = hmm.emission_row(n - 1);
    double top_e = kNegInf;
    for (int r = 1; r <= nb; ++r) top_e = std::max(top_e, lphi[r]);
    for (int r = 1; r <= nb; ++r) e[r] = std::exp(lphi[r] - top_e);
    const double top_a = max_of(prev.log_alpha);

    // Scaled linear step.
    for (size_t i = 0; i < prev.states.size(); ++i) {
      const double w = std::exp(prev.log_alpha[i] - top_a);
      if (w == 0.0) continue;
      visit_successors(space, n, prev.states[i], [&](uint32_t z, double p, int v) {
        const double x = w * p * e[v];
        if (x == 0.0) return;
        if (acc[z] == 0.0) touched.push_back(z);
        acc[z] += x;
      });
    }
    double top = 0.0;
    for (uint32_t z : touched) top = std::max(top, acc[z]);

    if (top >= kUnderflowGuard) {
      cur.states.reserve(touched.size());
      cur.log_alpha.reserve(touched.size());
      for (uint32_t z : touched) {
        cur.states.push_back(z);
        cur.log_alpha.push_back(std::log(acc[z]) + top_a + top_e);
        acc[z] = 0.0;
      }
      touched.clear();
    } else {
      // Exact log-space step for sharply peaked emissions.
      for (uint32_t z : touched) acc[z] = 0.0;
      touched.clear();
      std::vector<double> lacc(space.state_count(), kNegInf);
      for (size_t i = 0; i < prev.states.size(); ++i) {
        const double la = prev.log_alpha[i];
        visit_successors(space, n, prev.states[i], [&](uint32_t z, double p, int v) {
          const double x = la + std::log(p) + lphi[v];
          if (x == kNegInf) return;
          if (lacc[z] == kNegInf) touched.push_back(z);
          lacc[z] = log_add(lacc[z], x);
        });
      }
      for (uint32_t z : touched) {
        cur.states.push_back(z);
        cur.log_alpha.push_back(lacc[z]);
      }
      touched.clear();
    }
    prune(cur);
    if (cur.states.empty()) {
      throw InferenceError("no path with nonzero probability reaches note " + std::to_string(n));
    }
  }
  lat.log_likelihood = log_sum_exp(lat.steps.back().log_alpha);
  return lat;
}

double forward_loglik(const TranscriptionHmm& hmm, size_t beam_width) {
  return forward(hmm, beam_width).log_likelihood;
}

LatentPath ffbs_sample(const TranscriptionHmm& hmm, const ForwardLattice& lattice, Rng& rng) {
  const LatentStateSpace& space = hmm.space();
  const int N = hmm.length();
  if (lattice.steps.size() != static_cast<size_t>(N) + 1) throw Error("lattice does not match HMM");
  const bool on_state = space.emits_on_state();

  auto draw = [&](const std::vector<double>& logw) {
    const double m = max_of(logw);
    if (!std::isfinite(m)) throw InferenceError("degenerate posterior in backward sampling");
    std::vector<double> w(logw.size());
    for (size_t i = 0; i < w.size(); ++i) w[i] = std::exp(logw[i] - m);
    return sample_index(w, rng);
  };

  LatentPath path;
  path.states.resize(static_cast<size_t>(N));
  const auto& last = lattice.steps.back();
  uint32_t z = last.states[draw(last.log_alpha)];
  path.states[static_cast<size_t>(N) - 1] = z;

  std::vector<double> logw;
  for (int n = N - 1; n >= 0; --n) {
    const auto& step = lattice.steps[static_cast<size_t>(n)];
    const double* lphi = hmm.emission_row(n);
    logw.assign(step.states.size(), kNegInf);
    for (size_t i = 0; i < step.states.size(); ++i) {
      const Transition t = n == 0 ? space.boundary_transition(step.states[i], z)
                                  : space.transition(step.states[i], z);
      if (!(t.prob > 0.0)) continue;
      // With emissions tied to the target state, phi is common to all
      // candidates and drops out of the kernel.
      logw[i] = step.log_alpha[i] + std::log(t.prob) + (on_state ? 0.0 : lphi[t.value]);
    }
    z = step.states[draw(logw)];
    if (n > 0) {
      path.states[static_cast<size_t>(n) - 1] = z;
    } else {
      path.boundary = z;
    }
  }
  return path;
}

double path_log_prob(const TranscriptionHmm& hmm, const LatentPath& path) {
  const LatentStateSpace& space = hmm.space();
  if (path.states.size() != static_cast<size_t>(hmm.length())) return kNegInf;
  double lp = std::log(space.initial(path.boundary));
  for (size_t n = 0; n < path.states.size(); ++n) {
    const Transition t = n == 0 ? space.boundary_transition(path.boundary, path.states[0])
                                : space.transition(path.states[n - 1], path.states[n]);
    if (!(t.prob > 0.0)) return kNegInf;
    lp += std::log(t.prob) + hmm.log_emission(static_cast<int>(n), t.value);
  }
  return lp;
}

}  // namespace rhythm
