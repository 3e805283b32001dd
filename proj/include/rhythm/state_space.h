// Latent state spaces for every score-model variant.
//
// A space is a "base chain" over the unmodified model's symbols (note values,
// metrical positions, pattern positions, or symbol pairs for second-order
// models) crossed with optional modification tags: a division part (h, g) and
// an onset shift s. A path is z_0, z_1, ..., z_N where z_0 is drawn from a
// separate set of boundary states and each transition (z_{n-1}, z_n) emits
// one note value. For note-value models the boundary base state is a single
// start symbol; metrical and pattern models carry the first onset's position.
//
// Transitions are never materialized as a full matrix. Successors are
// enumerated from the base chain's sparse edge lists and the modification
// tables, which keeps pattern models with divisions and shifts tractable.

#ifndef RHYTHM_STATE_SPACE_H_
#define RHYTHM_STATE_SPACE_H_

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rhythm/model.h"

namespace rhythm {

/// How shift/output constraints are applied. kRenormalize zeroes infeasible
/// successors and rescales each row to sum to one; kUnnormalized only zeroes
/// them, so rows of modified models may sum to less than one.
enum class MaskPolicy { kRenormalize, kUnnormalized };

struct ParamRef {
  enum class Table : uint8_t { kNone, kInitial, kUnigram, kTransition, kTransition2 };
  Table table = Table::kNone;
  uint32_t row = 0;
  uint32_t col = 0;
};

struct BaseEdge {
  uint32_t to = 0;
  int value = 0;  // note value before modification
  double prob = 0.0;
  ParamRef ref;
};

struct BaseState {
  int symbol = -1;       // r - 1, b, or k; -1 for the note-model start state
  int index = 0;         // 1-based onset index inside a pattern
  int position = -1;     // metrical position, -1 when the model has none
  int prev_symbol = -1;  // preceding symbol for second-order states
};

struct Transition {
  double prob = 0.0;
  int value = 0;
};

struct StateLabel {
  BaseState base;
  bool boundary = false;
  int division = -1;  // global division index
  int part = 0;       // 0-based part inside the division
  int shift = 0;
};

struct LatentPath {
  uint32_t boundary = 0;
  std::vector<uint32_t> states;  // z_1 .. z_N

  bool operator==(const LatentPath&) const = default;
};

class LatentStateSpace {
 public:
  explicit LatentStateSpace(const ModelParams& params,
                            MaskPolicy policy = MaskPolicy::kRenormalize);

  const ModelParams& params() const { return params_; }
  const ModelConfig& config() const { return params_.config; }
  const DivisionCatalog& catalog() const { return catalog_; }
  int bar_length() const { return bar_length_; }
  MaskPolicy policy() const { return policy_; }

  size_t boundary_count() const { return boundary_base_.size() * shift_count_; }
  size_t state_count() const { return main_base_.size() * tag_count_; }
  size_t base_state_count() const { return main_base_.size(); }
  size_t base_edge_count() const { return next_edges_.size(); }

  double initial(uint32_t z0) const;
  Transition boundary_transition(uint32_t z0, uint32_t z) const;
  Transition transition(uint32_t from, uint32_t z) const;

  /// f(z0, prob) for every boundary state with nonzero probability.
  template <class F>
  void for_each_initial(F&& f) const;
  /// f(z, prob, value) for every feasible successor of boundary state z0.
  template <class F>
  void for_each_boundary_successor(uint32_t z0, F&& f) const;
  /// f(z, prob, value) for every feasible successor of state `from`.
  template <class F>
  void for_each_successor(uint32_t from, F&& f) const;

  /// True when the emitted note value is a function of the target state
  /// alone, so the backward sampling kernel may drop the emission factor.
  bool emits_on_state() const;

  StateLabel label(uint32_t z) const;
  StateLabel boundary_label(uint32_t z0) const;
  std::string describe(const StateLabel& label) const;
  /// Metrical position of the first onset, when the model encodes it.
  std::optional<int> initial_position(uint32_t z0) const;

  /// Note values emitted along a path; throws if a step is infeasible.
  std::vector<int> path_values(const LatentPath& path) const;
  /// Adds the parameter-table counts used by the path to `counts`, which
  /// must have the shape of params() (see make_empty_params).
  void accumulate_counts(const LatentPath& path, ModelParams& counts) const;

 private:
  struct PartTag {
    int division = 0;  // global index
    int part = 0;
    int value = 0;     // q_{hg}
    bool last = true;
    int next = -1;
  };
  struct DivisionChoice {
    int local = 0;
    double prob = 0.0;
    int value = 0;     // first part
    int second = 0;    // second part, 0 for the identity
    int first_tag = 0;
  };

  void build_note_chain();
  void build_met_chain();
  void build_pat_chain();
  void build_modification_tables();
  bool update_masses();

  const BaseEdge* find_edge(std::span<const BaseEdge> row, uint32_t to) const;
  std::span<const BaseEdge> first_row(uint32_t u0) const {
    return {first_edges_.data() + first_offsets_[u0], first_offsets_[u0 + 1] - first_offsets_[u0]};
  }
  std::span<const BaseEdge> next_row(uint32_t u) const {
    return {next_edges_.data() + next_offsets_[u], next_offsets_[u + 1] - next_offsets_[u]};
  }
  int shift_of(uint32_t idx) const { return static_cast<int>(idx) - shift_offset_; }
  bool feasible(int q, int s, int sp) const {
    if (shift_ && !(s > -q && s <= q)) return false;
    const int r = q + s - sp;
    return r >= 1 && r <= bar_length_;
  }
  size_t value_slot(uint32_t u, int q) const {
    return (static_cast<size_t>(u) * (bar_length_ + 1) + q) * shift_count_;
  }
  // Viability of entering base state u with a first part of value q (or a
  // whole note when second == 0); indexed by the entered shift.
  const uint8_t* entry_ok(uint32_t u, int second) const {
    if (!prune_) return nullptr;
    return second == 0 ? &viable_[static_cast<size_t>(u) * shift_count_]
                       : &continue_ok_[value_slot(u, second)];
  }
  bool viable(uint32_t z) const;
  double row_norm(std::span<const BaseEdge> row, uint32_t sp_idx) const;
  Transition fresh_transition(std::span<const BaseEdge> row, double norm, int sp,
                              uint32_t z) const;

  template <class F>
  void expand_shifts(uint32_t zbase, int q, int sp, double p, const uint8_t* ok, F& f) const;
  template <class F>
  void expand_fresh(std::span<const BaseEdge> row, int sp, double norm, F& f) const;

  ModelParams params_;
  DivisionCatalog catalog_;
  MaskPolicy policy_;
  int bar_length_;
  bool shift_;
  bool division_;
  // Drop states from which no infinite path exists, so every reachable row
  // renormalizes to one.
  bool prune_ = false;

  std::vector<BaseState> boundary_base_;
  std::vector<double> boundary_init_;
  std::vector<ParamRef> boundary_ref_;
  std::vector<BaseState> main_base_;
  std::vector<size_t> first_offsets_;
  std::vector<BaseEdge> first_edges_;
  std::vector<size_t> next_offsets_;
  std::vector<BaseEdge> next_edges_;

  uint32_t shift_count_ = 1;
  int shift_offset_ = 0;
  uint32_t tag_count_ = 1;
  std::vector<double> xi_;
  std::vector<PartTag> parts_;
  std::vector<int> first_part_of_division_;
  std::vector<std::vector<DivisionChoice>> choices_;  // by note value

  std::vector<int> entry_index_;         // [u][value] -> row of entry_mass_, or -1
  std::vector<std::pair<uint32_t, int>> entries_;
  std::vector<double> entry_mass_;       // [entry][sp]
  std::vector<double> continue_mass_;    // [u][value][sp]
  std::vector<uint8_t> continue_ok_;     // [u][value][s]
  std::vector<uint8_t> viable_;          // [u][s], states whose next note is fresh
  std::vector<double> boundary_norm_;    // [z0]
  std::vector<double> main_norm_;        // [u][sp]
  double initial_scale_ = 1.0;
};

/// Per-symbol normalization convention for sequence probabilities.
enum class SymbolConvention {
  kNoteValues,       // P(r_1..r_N), first position marginalized
  kInitialPosition,  // P(b_0, r_1..r_N) for models that encode b_0
};

/// log2 probability of the score's note values under the space, summing over
/// latent modification paths. Returns -infinity for impossible scores.
double sequence_log_prob(const LatentStateSpace& space, const RhythmScore& score,
                         SymbolConvention convention = SymbolConvention::kNoteValues);

// ---------------------------------------------------------------------------

template <class F>
void LatentStateSpace::for_each_initial(F&& f) const {
  for (uint32_t u0 = 0; u0 < boundary_base_.size(); ++u0) {
    const double base = boundary_init_[u0] * initial_scale_;
    if (base <= 0.0) continue;
    for (uint32_t s = 0; s < shift_count_; ++s) {
      const uint32_t z0 = u0 * shift_count_ + s;
      if (prune_ && !(boundary_norm_[z0] > 0.0)) continue;
      const double p = base * xi_[s];
      if (p > 0.0) f(z0, p);
    }
  }
}

template <class F>
void LatentStateSpace::expand_shifts(uint32_t zbase, int q, int sp, double p, const uint8_t* ok,
                                     F& f) const {
  if (!shift_) {
    f(zbase, p, q);
    return;
  }
  const int limit = bar_length_ - 1;
  const int lo = std::max({-q + 1, -limit, 1 - q + sp});
  const int hi = std::min({q, limit, bar_length_ - q + sp});
  for (int s = lo; s <= hi; ++s) {
    const uint32_t idx = static_cast<uint32_t>(s + shift_offset_);
    const double x = xi_[idx];
    if (x > 0.0 && (ok == nullptr || ok[idx])) f(zbase + idx, p * x, q + s - sp);
  }
}

template <class F>
void LatentStateSpace::expand_fresh(std::span<const BaseEdge> row, int sp, double norm,
                                    F& f) const {
  if (!(norm > 0.0)) return;
  const double inv = 1.0 / norm;
  for (const BaseEdge& e : row) {
    const uint32_t zbase = e.to * tag_count_;
    if (division_) {
      for (const DivisionChoice& c : choices_[e.value]) {
        if (c.prob <= 0.0) continue;
        expand_shifts(zbase + static_cast<uint32_t>(c.first_tag) * shift_count_, c.value, sp,
                      e.prob * c.prob * inv, entry_ok(e.to, c.second), f);
      }
    } else {
      expand_shifts(zbase, e.value, sp, e.prob * inv, entry_ok(e.to, 0), f);
    }
  }
}

template <class F>
void LatentStateSpace::for_each_boundary_successor(uint32_t z0, F&& f) const {
  const uint32_t u0 = z0 / shift_count_;
  const int sp = shift_of(z0 % shift_count_);
  expand_fresh(first_row(u0), sp, boundary_norm_[z0], f);
}

template <class F>
void LatentStateSpace::for_each_successor(uint32_t from, F&& f) const {
  const uint32_t u = from / tag_count_;
  const uint32_t tag = from % tag_count_;
  const uint32_t sp_idx = tag % shift_count_;
  const int sp = shift_of(sp_idx);
  if (division_) {
    const PartTag& t = parts_[tag / shift_count_];
    if (!t.last) {
      const PartTag& nx = parts_[static_cast<size_t>(t.next)];
      double norm = 1.0;
      if (policy_ == MaskPolicy::kRenormalize) {
        norm = continue_mass_[value_slot(u, nx.value) + sp_idx];
        if (!(norm > 0.0)) return;
      }
      expand_shifts(u * tag_count_ + static_cast<uint32_t>(t.next) * shift_count_, nx.value, sp,
                    1.0 / norm, entry_ok(u, 0), f);
      return;
    }
  }
  expand_fresh(next_row(u), sp, main_norm_[u * shift_count_ + sp_idx], f);
}

}  // namespace rhythm

#endif  // RHYTHM_STATE_SPACE_H_
