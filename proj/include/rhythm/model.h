// Score-model configuration and parameter tables.

#ifndef RHYTHM_MODEL_H_
#define RHYTHM_MODEL_H_

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rhythm/core.h"

namespace rhythm {

enum class Family { kNote, kMet, kPat };

std::string_view family_name(Family family);

/// Model family x order x modification variant. Names follow the scheme
/// notemm0, metmm1b, patmm1sdb, ...
struct ModelConfig {
  Family family = Family::kNote;
  int order = 1;
  bool shift = false;
  bool division = false;
  bool bayesian = false;

  bool modified() const { return shift || division; }
  /// Throws Error for combinations outside the model table.
  void validate() const;
  std::string name() const;
  static ModelConfig Parse(std::string_view name);
  /// The same model without the Bayesian extension.
  ModelConfig non_bayesian() const;

  bool operator==(const ModelConfig&) const = default;
};

/// All 25 listed variants (9 note-value, 9 metrical, 7 pattern models).
std::vector<ModelConfig> listed_variants();

/// Split of a base note value into one or two parts.
struct Division {
  int total = 0;
  std::vector<int> parts;
  int part_count() const { return static_cast<int>(parts.size()); }
  bool identity() const { return parts.size() == 1; }
  std::string label() const;
};

/// Every division of each note value 1..bar_length into at most two parts:
/// the identity first, then (a, r - a) for a = 1..r-1.
class DivisionCatalog {
 public:
  explicit DivisionCatalog(int bar_length = kDefaultBarLength);

  int bar_length() const { return bar_length_; }
  /// Divisions of `value`; the local index is the column in zeta rows.
  const std::vector<Division>& for_value(int value) const { return by_value_.at(value - 1); }
  /// Global division index of local division `local` of `value`.
  int global_index(int value, int local) const { return offsets_.at(value - 1) + local; }
  int size() const { return offsets_.back(); }
  const Division& at(int global) const { return flat_.at(global); }
  int local_index(int global) const { return local_.at(global); }

 private:
  int bar_length_;
  std::vector<std::vector<Division>> by_value_;
  std::vector<int> offsets_;
  std::vector<Division> flat_;
  std::vector<int> local_;
};

DivisionCatalog build_division_catalog(int bar_length);

/// Ordered set of note patterns used as symbols by pattern models.
class PatternVocabulary {
 public:
  PatternVocabulary() = default;
  explicit PatternVocabulary(std::vector<NotePattern> patterns);
  /// All 2^bar_length - 1 nonempty patterns, in ascending binary-vector order.
  static PatternVocabulary Exhaustive(int bar_length);

  int size() const { return static_cast<int>(patterns_.size()); }
  bool empty() const { return patterns_.empty(); }
  const NotePattern& at(int k) const { return patterns_.at(k); }
  const std::vector<NotePattern>& patterns() const { return patterns_; }
  /// Index of a pattern, or -1.
  int find(const NotePattern& pattern) const;

  bool operator==(const PatternVocabulary& o) const { return patterns_ == o.patterns_; }

 private:
  std::vector<NotePattern> patterns_;
  std::unordered_map<uint32_t, int> index_;
};

using Distribution = std::vector<double>;

/// Parameters of one (non-Bayesian) score model.
///
/// Symbols are note values r (index r-1), metrical positions b (index b) or
/// pattern indices k. `transition2` rows are indexed prev2 * symbols + prev1.
/// `division` rows are indexed by note value - 1 with one column per local
/// division; `shift` covers s = -(bar_length-1) .. bar_length-1.
struct ModelParams {
  ModelConfig config;
  int bar_length = kDefaultBarLength;
  PatternVocabulary patterns;

  Distribution initial;
  Distribution unigram;
  std::vector<Distribution> transition;
  std::vector<Distribution> transition2;
  std::vector<Distribution> division;
  Distribution shift;

  int symbol_count() const;
  int shift_count() const { return 2 * bar_length - 1; }
  static int shift_of_index(int idx, int bar_length) { return idx - (bar_length - 1); }

  /// Checks table shapes and that every row sums to one.
  void validate(double tolerance = 1e-9) const;
  std::string symbol_label(int symbol) const;
};

/// Table shapes for a configuration, filled with zeros.
ModelParams make_empty_params(const ModelConfig& config, int bar_length,
                              PatternVocabulary patterns = {});

/// Identity-only division rows and a point mass at zero shift.
void set_trivial_modifications(ModelParams& params);

}  // namespace rhythm

#endif  // RHYTHM_MODEL_H_
