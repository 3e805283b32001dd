// Brute-force references shared by unit and acceptance tests. Everything
// here walks the state space through point queries only, never through the
// successor enumerators the production code uses.

#ifndef RHYTHM_TESTS_ORACLE_H_
#define RHYTHM_TESTS_ORACLE_H_

#include <cmath>
#include <functional>
#include <vector>

#include "rhythm/state_space.h"

namespace rhythm::oracle {

using PathVisitor =
    std::function<void(const LatentPath& path, double prob, const std::vector<int>& values)>;

/// Calls `visit` for every latent path of length n with nonzero probability.
inline void enumerate_paths(const LatentStateSpace& space, int n, const PathVisitor& visit) {
  LatentPath path;
  std::vector<int> values;
  path.states.resize(n);
  values.resize(n);
  std::function<void(int, double)> rec = [&](int depth, double prob) {
    if (depth == n) {
      visit(path, prob, values);
      return;
    }
    for (uint32_t z = 0; z < space.state_count(); ++z) {
      const Transition t = depth == 0 ? space.boundary_transition(path.boundary, z)
                                      : space.transition(path.states[depth - 1], z);
      if (!(t.prob > 0.0)) continue;
      path.states[depth] = z;
      values[depth] = t.value;
      rec(depth + 1, prob * t.prob);
    }
  };
  for (uint32_t z0 = 0; z0 < space.boundary_count(); ++z0) {
    const double p0 = space.initial(z0);
    if (!(p0 > 0.0)) continue;
    path.boundary = z0;
    rec(0, p0);
  }
}

/// Index of the first state whose label satisfies `pred`, or -1.
template <class Pred>
long find_state(const LatentStateSpace& space, Pred pred) {
  for (uint32_t z = 0; z < space.state_count(); ++z) {
    if (pred(space.label(z))) return z;
  }
  return -1;
}

inline double gaussian_log_density(double x, double mean, double sigma) {
  const double u = (x - mean) / sigma;
  return -0.5 * std::log(2.0 * M_PI * sigma * sigma) - 0.5 * u * u;
}

}  // namespace rhythm::oracle

#endif  // RHYTHM_TESTS_ORACLE_H_
