// Seeded random streams and Dirichlet sampling.

#ifndef RHYTHM_RANDOM_H_
#define RHYTHM_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>

#include "rhythm/model.h"

namespace rhythm {

using Rng = std::mt19937_64;

/// Independent stream for (seed, stream); used to give each piece its own
/// generator so results do not depend on scheduling.
Rng make_rng(uint64_t seed, uint64_t stream = 0);

/// Draw from Dir(alpha). Entries with alpha == 0 stay exactly zero. Small
/// shapes are handled in log space so tiny concentrations do not underflow.
Distribution sample_dirichlet(std::span<const double> alpha, Rng& rng);

/// Index drawn with probability proportional to `weights`.
size_t sample_index(std::span<const double> weights, Rng& rng);

/// Parameters with every row drawn from a symmetric Dirichlet. Pattern
/// models use `patterns`, or the exhaustive vocabulary when it is empty.
ModelParams random_params(const ModelConfig& config, int bar_length, Rng& rng,
                          double concentration = 1.0, PatternVocabulary patterns = {});

}  // namespace rhythm

#endif  // RHYTHM_RANDOM_H_
