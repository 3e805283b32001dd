#include "rhythm/training.h"

#include <numeric>

namespace rhythm {

std::vector<int> symbol_sequence(const RhythmScore& score, Family family,
                                 const PatternVocabulary& patterns) {
  switch (family) {
    case Family::kNote: {
      std::vector<int> out = to_note_values(score);
      for (int& r : out) --r;
      return out;
    }
    case Family::kMet:
      return to_metrical(score);
    case Family::kPat: {
      std::vector<int> out;
      for (const NotePattern& p : segment_patterns(score)) {
        const int k = patterns.empty() ? static_cast<int>(p.mask()) - 1 : patterns.find(p);
        if (k < 0) throw Error("pattern " + p.label() + " is not in the vocabulary");
        out.push_back(k);
      }
      return out;
    }
  }
  return {};
}

namespace {

void normalize_row(Distribution& row, double epsilon) {
  double total = 0.0;
  for (double& c : row) {
    c += epsilon;
    total += c;
  }
  if (total > 0.0) {
    for (double& c : row) c /= total;
  } else {
    std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(row.size()));
  }
}

}  // namespace

ModelParams estimate_params(const Corpus& corpus, const ModelConfig& config,
                            const SmoothingConfig& smoothing, PatternVocabulary patterns) {
  config.validate();
  if (config.modified()) throw Error("modification parameters cannot be learned from scores");
  if (corpus.empty()) throw Error("cannot train on an empty corpus");
  if (!(smoothing.epsilon >= 0.0)) throw Error("smoothing constant must be non-negative");
  if (!(smoothing.unigram_weight >= 0.0 && smoothing.unigram_weight <= 1.0)) {
    throw Error("interpolation weight must lie in [0, 1]");
  }
  const int nb = corpus.bar_length;
  ModelParams p = make_empty_params(config.non_bayesian(), nb, std::move(patterns));
  const size_t S = static_cast<size_t>(p.symbol_count());
  const bool interpolate = config.family == Family::kPat && config.order == 1;
  Distribution unigram(S, 0.0);

  size_t events = 0;
  for (const RhythmScore& score : corpus.pieces) {
    if (score.bar_length() != nb) throw Error("piece bar length differs from corpus");
    const std::vector<int> x = symbol_sequence(score, config.family, p.patterns);
    p.initial[x[0]] += 1.0;
    for (size_t n = 1; n < x.size(); ++n) {
      ++events;
      if (config.order == 0) p.unigram[x[n]] += 1.0;
      if (interpolate) unigram[x[n]] += 1.0;
      if (config.order >= 1) p.transition[x[n - 1]][x[n]] += 1.0;
      if (config.order == 2 && n >= 2) p.transition2[x[n - 2] * S + x[n - 1]][x[n]] += 1.0;
    }
  }
  if (config.order >= 1 && events == 0) throw Error("corpus has no transitions to count");

  const double eps = smoothing.epsilon;
  normalize_row(p.initial, eps);
  if (config.order == 0) normalize_row(p.unigram, eps);
  for (auto& row : p.transition) normalize_row(row, eps);
  for (auto& row : p.transition2) normalize_row(row, eps);
  if (interpolate) {
    normalize_row(unigram, eps);
    const double w = smoothing.unigram_weight;
    for (auto& row : p.transition) {
      for (size_t k = 0; k < S; ++k) row[k] = w * unigram[k] + (1.0 - w) * row[k];
    }
  }
  return p;
}

ModificationBase build_modification_base(int bar_length, double xi0, double zeta0) {
  if (!(xi0 > 0.0 && xi0 <= 1.0) || !(zeta0 > 0.0 && zeta0 <= 1.0)) {
    throw Error("modification presets must lie in (0, 1]");
  }
  ModificationBase out;
  const int shifts = 2 * bar_length - 1;
  out.shift.assign(static_cast<size_t>(shifts), shifts > 1 ? (1.0 - xi0) / (shifts - 1) : 0.0);
  out.shift[static_cast<size_t>(bar_length - 1)] = shifts > 1 ? xi0 : 1.0;
  const DivisionCatalog catalog(bar_length);
  for (int r = 1; r <= bar_length; ++r) {
    const size_t count = catalog.for_value(r).size();
    Distribution row(count, count > 1 ? (1.0 - zeta0) / static_cast<double>(count - 1) : 0.0);
    row[0] = count > 1 ? zeta0 : 1.0;
    out.division.push_back(std::move(row));
  }
  return out;
}

Hyperparams assemble_hyperparams(const ModelParams& generic, const ModelConfig& config,
                                 const Concentrations& alpha, double xi0, double zeta0) {
  config.validate();
  if (generic.config.family != config.family || generic.config.order != config.order) {
    throw Error("generic model " + generic.config.name() + " does not fit " + config.name());
  }
  for (double a : {alpha.initial, alpha.transition, alpha.division, alpha.shift}) {
    if (!(a > 0.0)) throw Error("concentration parameters must be positive");
  }
  Hyperparams hp;
  hp.base = generic;
  hp.base.config = config.non_bayesian();
  hp.alpha = alpha;
  hp.xi0 = xi0;
  hp.zeta0 = zeta0;
  const ModificationBase mods = build_modification_base(generic.bar_length, xi0, zeta0);
  hp.base.division = config.division ? mods.division : std::vector<Distribution>{};
  hp.base.shift = config.shift ? mods.shift : Distribution{};
  hp.base.validate();
  return hp;
}

}  // namespace rhythm
