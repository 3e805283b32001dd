// Supervised estimation of generic models and construction of priors.

#ifndef RHYTHM_TRAINING_H_
#define RHYTHM_TRAINING_H_

#include <vector>

#include "rhythm/gibbs.h"

namespace rhythm {

struct SmoothingConfig {
  double epsilon = 0.1;         // additive constant over the full support
  double unigram_weight = 0.8;  // pattern model rows: w * unigram + (1 - w) * transition
};

/// A score as the symbol sequence a model family generates: note values
/// (r - 1) for r_1..r_N, metrical positions b_0..b_N, or pattern indices for
/// every bar.
std::vector<int> symbol_sequence(const RhythmScore& score, Family family,
                                 const PatternVocabulary& patterns = {});

/// Maximum-likelihood tables with additive smoothing. The initial
/// distribution counts first symbols; unigram, first- and second-order
/// tables count the symbols that follow. Rows without any observation and
/// no smoothing fall back to uniform.
ModelParams estimate_params(const Corpus& corpus, const ModelConfig& config,
                            const SmoothingConfig& smoothing = {},
                            PatternVocabulary patterns = {});

struct ModificationBase {
  std::vector<Distribution> division;  // by note value - 1
  Distribution shift;
};

/// Shift row with mass xi0 at s = 0, the rest uniform; division rows with
/// mass zeta0 on the identity, the rest uniform over two-part splits.
/// Presets of 1 give point masses.
ModificationBase build_modification_base(int bar_length, double xi0, double zeta0);

/// Priors for `config` centred on a trained generic model of the same family
/// and order. Modification rows come from build_modification_base.
Hyperparams assemble_hyperparams(const ModelParams& generic, const ModelConfig& config,
                                 const Concentrations& alpha = {}, double xi0 = 0.9,
                                 double zeta0 = 0.9);

}  // namespace rhythm

#endif  // RHYTHM_TRAINING_H_
