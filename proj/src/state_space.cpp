// Base chains, modification tags, point queries and path bookkeeping.

#include "rhythm/state_space.h"

#include <cmath>
#include <limits>

namespace rhythm {

namespace {

using Table = ParamRef::Table;

double& cell(ModelParams& p, const ParamRef& ref) {
  switch (ref.table) {
    case Table::kInitial:     return p.initial.at(ref.col);
    case Table::kUnigram:     return p.unigram.at(ref.col);
    case Table::kTransition:  return p.transition.at(ref.row).at(ref.col);
    case Table::kTransition2: return p.transition2.at(ref.row).at(ref.col);
    case Table::kNone:        break;
  }
  throw Error("parameter reference has no table");
}

}  // namespace

LatentStateSpace::LatentStateSpace(const ModelParams& params, MaskPolicy policy)
    : params_(params),
      catalog_(params.bar_length),
      policy_(policy),
      bar_length_(params.bar_length),
      shift_(params.config.shift),
      division_(params.config.division) {
  params_.validate(1e-6);
  switch (params_.config.family) {
    case Family::kNote: build_note_chain(); break;
    case Family::kMet:  build_met_chain(); break;
    case Family::kPat:  build_pat_chain(); break;
  }
  build_modification_tables();
}

// Appends a CSR row, keeping only edges with positive probability.
static void push_row(std::vector<size_t>& offsets, std::vector<BaseEdge>& edges,
                     const std::vector<BaseEdge>& row) {
  for (const BaseEdge& e : row) {
    if (e.prob > 0.0) edges.push_back(e);
  }
  offsets.push_back(edges.size());
}

void LatentStateSpace::build_note_chain() {
  const int S = bar_length_;
  const int order = params_.config.order;
  boundary_base_ = {BaseState{}};
  boundary_init_ = {1.0};
  boundary_ref_ = {ParamRef{}};

  first_offsets_ = {0};
  std::vector<BaseEdge> row;
  for (int r = 0; r < S; ++r) {
    row.push_back({static_cast<uint32_t>(r), r + 1, params_.initial[r],
                   {Table::kInitial, 0, static_cast<uint32_t>(r)}});
  }
  push_row(first_offsets_, first_edges_, row);

  next_offsets_ = {0};
  if (order <= 1) {
    for (int a = 0; a < S; ++a) main_base_.push_back({a, 0, -1, -1});
    for (int a = 0; a < S; ++a) {
      row.clear();
      for (int b = 0; b < S; ++b) {
        const auto ub = static_cast<uint32_t>(b);
        if (order == 0) {
          row.push_back({ub, b + 1, params_.unigram[b], {Table::kUnigram, 0, ub}});
        } else {
          row.push_back({ub, b + 1, params_.transition[a][b],
                         {Table::kTransition, static_cast<uint32_t>(a), ub}});
        }
      }
      push_row(next_offsets_, next_edges_, row);
    }
    return;
  }

  // Second order: states (none, r) then (a, b) at S + a * S + b.
  for (int b = 0; b < S; ++b) main_base_.push_back({b, 0, -1, -1});
  for (int a = 0; a < S; ++a) {
    for (int b = 0; b < S; ++b) main_base_.push_back({b, 0, -1, a});
  }
  for (int a = 0; a < S; ++a) {
    row.clear();
    for (int b = 0; b < S; ++b) {
      row.push_back({static_cast<uint32_t>(S + a * S + b), b + 1, params_.transition[a][b],
                     {Table::kTransition, static_cast<uint32_t>(a), static_cast<uint32_t>(b)}});
    }
    push_row(next_offsets_, next_edges_, row);
  }
  for (int a = 0; a < S; ++a) {
    for (int b = 0; b < S; ++b) {
      row.clear();
      const auto prev = static_cast<uint32_t>(a * S + b);
      for (int c = 0; c < S; ++c) {
        row.push_back({static_cast<uint32_t>(S + b * S + c), c + 1, params_.transition2[prev][c],
                       {Table::kTransition2, prev, static_cast<uint32_t>(c)}});
      }
      push_row(next_offsets_, next_edges_, row);
    }
  }
}

void LatentStateSpace::build_met_chain() {
  const int S = bar_length_;
  const int order = params_.config.order;
  for (int b = 0; b < S; ++b) {
    boundary_base_.push_back({b, 0, b, -1});
    boundary_init_.push_back(params_.initial[b]);
    boundary_ref_.push_back({Table::kInitial, 0, static_cast<uint32_t>(b)});
  }

  auto first_order_row = [&](int a, bool pair_target) {
    std::vector<BaseEdge> row;
    for (int b = 0; b < S; ++b) {
      const auto to = static_cast<uint32_t>(pair_target ? a * S + b : b);
      if (order == 0) {
        row.push_back({to, interval(a, b, S), params_.unigram[b],
                       {Table::kUnigram, 0, static_cast<uint32_t>(b)}});
      } else {
        row.push_back({to, interval(a, b, S), params_.transition[a][b],
                       {Table::kTransition, static_cast<uint32_t>(a), static_cast<uint32_t>(b)}});
      }
    }
    return row;
  };

  first_offsets_ = {0};
  next_offsets_ = {0};
  if (order <= 1) {
    for (int b = 0; b < S; ++b) main_base_.push_back({b, 0, b, -1});
    for (int a = 0; a < S; ++a) push_row(first_offsets_, first_edges_, first_order_row(a, false));
    for (int a = 0; a < S; ++a) push_row(next_offsets_, next_edges_, first_order_row(a, false));
    return;
  }

  for (int a = 0; a < S; ++a) {
    for (int b = 0; b < S; ++b) main_base_.push_back({b, 0, b, a});
  }
  for (int a = 0; a < S; ++a) push_row(first_offsets_, first_edges_, first_order_row(a, true));
  std::vector<BaseEdge> row;
  for (int a = 0; a < S; ++a) {
    for (int b = 0; b < S; ++b) {
      row.clear();
      const auto prev = static_cast<uint32_t>(a * S + b);
      for (int c = 0; c < S; ++c) {
        row.push_back({static_cast<uint32_t>(b * S + c), interval(b, c, S),
                       params_.transition2[prev][c],
                       {Table::kTransition2, prev, static_cast<uint32_t>(c)}});
      }
      push_row(next_offsets_, next_edges_, row);
    }
  }
}

void LatentStateSpace::build_pat_chain() {
  const PatternVocabulary& vocab = params_.patterns;
  const int K = vocab.size();
  std::vector<uint32_t> start(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k) {
    start[k] = static_cast<uint32_t>(main_base_.size());
    const NotePattern& pat = vocab.at(k);
    for (int i = 0; i < pat.note_count(); ++i) {
      main_base_.push_back({k, i + 1, pat.positions()[i], -1});
    }
  }

  auto row_of = [&](int k, int i) {
    std::vector<BaseEdge> row;
    const NotePattern& pat = vocab.at(k);
    if (i < pat.note_count()) {
      row.push_back({start[k] + static_cast<uint32_t>(i),
                     pat.positions()[i] - pat.positions()[i - 1], 1.0, {}});
      return row;
    }
    for (int k2 = 0; k2 < K; ++k2) {
      const int value = interval(pat.back(), vocab.at(k2).front(), bar_length_);
      if (params_.config.order == 0) {
        row.push_back({start[k2], value, params_.unigram[k2],
                       {Table::kUnigram, 0, static_cast<uint32_t>(k2)}});
      } else {
        row.push_back({start[k2], value, params_.transition[k][k2],
                       {Table::kTransition, static_cast<uint32_t>(k), static_cast<uint32_t>(k2)}});
      }
    }
    return row;
  };

  first_offsets_ = {0};
  next_offsets_ = {0};
  for (int k = 0; k < K; ++k) {
    boundary_base_.push_back({k, 1, vocab.at(k).front(), -1});
    boundary_init_.push_back(params_.initial[k]);
    boundary_ref_.push_back({Table::kInitial, 0, static_cast<uint32_t>(k)});
    push_row(first_offsets_, first_edges_, row_of(k, 1));
  }
  for (int k = 0; k < K; ++k) {
    for (int i = 1; i <= vocab.at(k).note_count(); ++i) {
      push_row(next_offsets_, next_edges_, row_of(k, i));
    }
  }
}

void LatentStateSpace::build_modification_tables() {
  const int nb = bar_length_;
  if (shift_) {
    shift_count_ = static_cast<uint32_t>(2 * nb - 1);
    shift_offset_ = nb - 1;
    xi_ = params_.shift;
  } else {
    shift_count_ = 1;
    shift_offset_ = 0;
    xi_ = {1.0};
  }
  const size_t S = shift_count_;

  choices_.assign(static_cast<size_t>(nb + 1), {});
  if (division_) {
    for (int d = 0; d < catalog_.size(); ++d) {
      const Division& div = catalog_.at(d);
      first_part_of_division_.push_back(static_cast<int>(parts_.size()));
      for (int g = 0; g < div.part_count(); ++g) {
        const bool last = g + 1 == div.part_count();
        const int idx = static_cast<int>(parts_.size());
        parts_.push_back({d, g, div.parts[g], last, last ? -1 : idx + 1});
      }
    }
  }
  for (int v = 1; v <= nb; ++v) {
    if (!division_) {
      choices_[v].push_back({0, 1.0, v, 0, 0});
      continue;
    }
    const auto& divs = catalog_.for_value(v);
    for (int local = 0; local < static_cast<int>(divs.size()); ++local) {
      const auto& parts = divs[local].parts;
      choices_[v].push_back({local, params_.division[v - 1][local], parts[0],
                             parts.size() > 1 ? parts[1] : 0,
                             first_part_of_division_[catalog_.global_index(v, local)]});
    }
  }
  tag_count_ = static_cast<uint32_t>(division_ ? parts_.size() : 1) * shift_count_;
  prune_ = shift_ && policy_ == MaskPolicy::kRenormalize;

  const size_t base = main_base_.size();
  entry_index_.assign(base * static_cast<size_t>(nb + 1), -1);
  for (const auto* edges : {&first_edges_, &next_edges_}) {
    for (const BaseEdge& e : *edges) {
      int& slot = entry_index_[e.to * static_cast<size_t>(nb + 1) + e.value];
      if (slot < 0) {
        slot = static_cast<int>(entries_.size());
        entries_.emplace_back(e.to, e.value);
      }
    }
  }
  entry_mass_.assign(entries_.size() * S, 0.0);
  if (division_) {
    continue_mass_.assign(base * static_cast<size_t>(nb + 1) * S, 0.0);
    continue_ok_.assign(continue_mass_.size(), 1);
  }
  viable_.assign(base * S, 1);
  main_norm_.assign(base * S, 0.0);
  if (prune_) {
    while (update_masses()) {
    }
  } else {
    update_masses();
  }

  boundary_norm_.assign(boundary_count(), 0.0);
  for (uint32_t u0 = 0; u0 < boundary_base_.size(); ++u0) {
    for (uint32_t sp = 0; sp < S; ++sp) boundary_norm_[u0 * S + sp] = row_norm(first_row(u0), sp);
  }
  if (policy_ == MaskPolicy::kUnnormalized || !params_.config.modified()) {
    std::fill(boundary_norm_.begin(), boundary_norm_.end(), 1.0);
    std::fill(main_norm_.begin(), main_norm_.end(), 1.0);
  }
  if (prune_) {
    double total = 0.0;
    for (uint32_t u0 = 0; u0 < boundary_base_.size(); ++u0) {
      for (uint32_t s = 0; s < S; ++s) {
        if (boundary_norm_[u0 * S + s] > 0.0) total += boundary_init_[u0] * xi_[s];
      }
    }
    initial_scale_ = total > 0.0 ? 1.0 / total : 0.0;
  }
}

// One backward sweep: recompute entry and row masses under the current
// viability sets and report whether any base state lost viability.
bool LatentStateSpace::update_masses() {
  const int nb = bar_length_;
  const uint32_t S = shift_count_;
  if (division_) {
    for (uint32_t u = 0; u < main_base_.size(); ++u) {
      for (int q = 1; q <= nb; ++q) {
        const size_t slot = value_slot(u, q);
        for (uint32_t sp = 0; sp < S; ++sp) {
          double mass = 0.0;
          for (uint32_t s = 0; s < S; ++s) {
            if (viable_[u * S + s] && feasible(q, shift_of(s), shift_of(sp))) mass += xi_[s];
          }
          continue_mass_[slot + sp] = mass;
          continue_ok_[slot + sp] = mass > 0.0;
        }
      }
    }
  }
  for (size_t i = 0; i < entries_.size(); ++i) {
    const auto [u, v] = entries_[i];
    for (uint32_t sp = 0; sp < S; ++sp) {
      double mass = 0.0;
      for (const DivisionChoice& c : choices_[v]) {
        if (c.prob <= 0.0) continue;
        const uint8_t* ok = entry_ok(u, c.second);
        double inner = 0.0;
        for (uint32_t s = 0; s < S; ++s) {
          if ((ok == nullptr || ok[s]) && feasible(c.value, shift_of(s), shift_of(sp))) inner += xi_[s];
        }
        mass += c.prob * inner;
      }
      entry_mass_[i * S + sp] = mass;
    }
  }
  bool changed = false;
  for (uint32_t u = 0; u < main_base_.size(); ++u) {
    for (uint32_t sp = 0; sp < S; ++sp) {
      const double norm = row_norm(next_row(u), sp);
      main_norm_[u * S + sp] = norm;
      const uint8_t ok = norm > 0.0;
      if (ok != viable_[u * S + sp]) {
        viable_[u * S + sp] = ok;
        changed = true;
      }
    }
  }
  return prune_ && changed;
}

double LatentStateSpace::row_norm(std::span<const BaseEdge> row, uint32_t sp_idx) const {
  double sum = 0.0;
  for (const BaseEdge& e : row) {
    const int entry = entry_index_[e.to * static_cast<size_t>(bar_length_ + 1) + e.value];
    sum += e.prob * entry_mass_[static_cast<size_t>(entry) * shift_count_ + sp_idx];
  }
  return sum;
}

bool LatentStateSpace::viable(uint32_t z) const {
  if (!prune_) return true;
  const uint32_t u = z / tag_count_;
  const uint32_t tag = z % tag_count_;
  const uint32_t s = tag % shift_count_;
  if (division_) {
    const PartTag& t = parts_[tag / shift_count_];
    if (!t.last) return continue_ok_[value_slot(u, parts_[static_cast<size_t>(t.next)].value) + s];
  }
  return viable_[static_cast<size_t>(u) * shift_count_ + s];
}

const BaseEdge* LatentStateSpace::find_edge(std::span<const BaseEdge> row, uint32_t to) const {
  const auto it = std::lower_bound(row.begin(), row.end(), to,
                                   [](const BaseEdge& e, uint32_t t) { return e.to < t; });
  return it != row.end() && it->to == to ? &*it : nullptr;
}

Transition LatentStateSpace::fresh_transition(std::span<const BaseEdge> row, double norm, int sp,
                                              uint32_t z) const {
  if (!(norm > 0.0) || z >= state_count() || !viable(z)) return {};
  const uint32_t u = z / tag_count_;
  const uint32_t tag = z % tag_count_;
  const uint32_t s_idx = tag % shift_count_;
  const BaseEdge* e = find_edge(row, u);
  if (e == nullptr) return {};
  double zeta = 1.0;
  int q = e->value;
  if (division_) {
    const PartTag& t = parts_[tag / shift_count_];
    if (t.part != 0 || catalog_.at(t.division).total != e->value) return {};
    zeta = params_.division[e->value - 1][catalog_.local_index(t.division)];
    q = t.value;
  }
  const int s = shift_of(s_idx);
  if (!feasible(q, s, sp)) return {};
  const double p = e->prob * zeta * xi_[s_idx] / norm;
  if (!(p > 0.0)) return {};
  return {p, q + s - sp};
}

double LatentStateSpace::initial(uint32_t z0) const {
  if (z0 >= boundary_count()) return 0.0;
  if (prune_ && !(boundary_norm_[z0] > 0.0)) return 0.0;
  return boundary_init_[z0 / shift_count_] * xi_[z0 % shift_count_] * initial_scale_;
}

Transition LatentStateSpace::boundary_transition(uint32_t z0, uint32_t z) const {
  if (z0 >= boundary_count()) return {};
  return fresh_transition(first_row(z0 / shift_count_), boundary_norm_[z0],
                          shift_of(z0 % shift_count_), z);
}

Transition LatentStateSpace::transition(uint32_t from, uint32_t z) const {
  if (from >= state_count() || z >= state_count()) return {};
  const uint32_t u = from / tag_count_;
  const uint32_t tag = from % tag_count_;
  const uint32_t sp_idx = tag % shift_count_;
  const int sp = shift_of(sp_idx);
  if (division_) {
    const PartTag& t = parts_[tag / shift_count_];
    if (!t.last) {
      const uint32_t to_tag = z % tag_count_;
      if (z / tag_count_ != u || static_cast<int>(to_tag / shift_count_) != t.next) return {};
      const PartTag& nx = parts_[static_cast<size_t>(t.next)];
      const uint32_t s_idx = to_tag % shift_count_;
      const int s = shift_of(s_idx);
      if (!feasible(nx.value, s, sp) || !viable(z)) return {};
      double norm = 1.0;
      if (policy_ == MaskPolicy::kRenormalize) norm = continue_mass_[value_slot(u, nx.value) + sp_idx];
      const double p = xi_[s_idx] / norm;
      if (!(p > 0.0)) return {};
      return {p, nx.value + s - sp};
    }
  }
  return fresh_transition(next_row(u), main_norm_[u * shift_count_ + sp_idx], sp, z);
}

bool LatentStateSpace::emits_on_state() const {
  return !shift_ && (params_.config.family == Family::kNote || division_);
}

StateLabel LatentStateSpace::label(uint32_t z) const {
  if (z >= state_count()) throw Error("state index out of range");
  const uint32_t tag = z % tag_count_;
  StateLabel out;
  out.base = main_base_[z / tag_count_];
  if (division_) {
    const PartTag& t = parts_[tag / shift_count_];
    out.division = t.division;
    out.part = t.part;
  }
  out.shift = shift_of(tag % shift_count_);
  return out;
}

StateLabel LatentStateSpace::boundary_label(uint32_t z0) const {
  if (z0 >= boundary_count()) throw Error("boundary state index out of range");
  StateLabel out;
  out.base = boundary_base_[z0 / shift_count_];
  out.boundary = true;
  out.shift = shift_of(z0 % shift_count_);
  return out;
}

std::string LatentStateSpace::describe(const StateLabel& label) const {
  const BaseState& b = label.base;
  std::string s;
  switch (params_.config.family) {
    case Family::kNote:
      if (b.symbol < 0) {
        s = "start";
      } else {
        if (b.prev_symbol >= 0) s = "r:" + std::to_string(b.prev_symbol + 1) + ",";
        s += "r:" + std::to_string(b.symbol + 1);
      }
      break;
    case Family::kMet:
      if (b.prev_symbol >= 0) s = "b:" + std::to_string(b.prev_symbol) + ",";
      s += "b:" + std::to_string(b.symbol);
      break;
    case Family::kPat:
      s = "k:" + params_.patterns.at(b.symbol).label() + "/i:" + std::to_string(b.index);
      break;
  }
  if (label.division >= 0) {
    s += "|h:" + catalog_.at(label.division).label() + "/g:" + std::to_string(label.part + 1);
  }
  if (shift_) s += "|s:" + std::to_string(label.shift);
  return s;
}

std::optional<int> LatentStateSpace::initial_position(uint32_t z0) const {
  const StateLabel l = boundary_label(z0);
  if (l.base.position < 0) return std::nullopt;
  return ((l.base.position + l.shift) % bar_length_ + bar_length_) % bar_length_;
}

std::vector<int> LatentStateSpace::path_values(const LatentPath& path) const {
  std::vector<int> values;
  values.reserve(path.states.size());
  for (size_t n = 0; n < path.states.size(); ++n) {
    const Transition t = n == 0 ? boundary_transition(path.boundary, path.states[0])
                                : transition(path.states[n - 1], path.states[n]);
    if (!(t.prob > 0.0)) throw Error("path has an infeasible step at note " + std::to_string(n + 1));
    values.push_back(t.value);
  }
  return values;
}

void LatentStateSpace::accumulate_counts(const LatentPath& path, ModelParams& counts) const {
  if (path.boundary >= boundary_count()) throw Error("boundary state index out of range");
  const uint32_t u0 = path.boundary / shift_count_;
  if (boundary_ref_[u0].table != Table::kNone) cell(counts, boundary_ref_[u0]) += 1.0;
  if (shift_) counts.shift.at(path.boundary % shift_count_) += 1.0;

  for (size_t n = 0; n < path.states.size(); ++n) {
    const uint32_t z = path.states[n];
    const uint32_t tag = z % tag_count_;
    if (shift_) counts.shift.at(tag % shift_count_) += 1.0;
    std::span<const BaseEdge> row;
    if (n == 0) {
      row = first_row(u0);
    } else {
      const uint32_t from = path.states[n - 1];
      if (division_ && !parts_[(from % tag_count_) / shift_count_].last) continue;
      row = next_row(from / tag_count_);
    }
    const BaseEdge* e = find_edge(row, z / tag_count_);
    if (e == nullptr) throw Error("path uses a missing edge at note " + std::to_string(n + 1));
    if (e->ref.table != Table::kNone) cell(counts, e->ref) += 1.0;
    if (division_) {
      const PartTag& t = parts_[tag / shift_count_];
      counts.division.at(e->value - 1).at(catalog_.local_index(t.division)) += 1.0;
    }
  }
}

double sequence_log_prob(const LatentStateSpace& space, const RhythmScore& score,
                         SymbolConvention convention) {
  if (score.bar_length() != space.bar_length()) throw Error("score bar length differs from model");
  const std::vector<int> values = to_note_values(score);
  const int b0 = score.onsets().front() % score.bar_length();
  const size_t count = space.state_count();

  std::vector<double> cur(count, 0.0), next(count, 0.0);
  std::vector<uint32_t> active, touched;
  double log_total = 0.0;

  auto finish_step = [&]() {
    double sum = 0.0;
    for (uint32_t z : touched) sum += next[z];
    if (!(sum > 0.0)) return false;
    log_total += std::log(sum);
    for (uint32_t z : active) cur[z] = 0.0;
    active.clear();
    for (uint32_t z : touched) {
      cur[z] = next[z] / sum;
      next[z] = 0.0;
      active.push_back(z);
    }
    touched.clear();
    return true;
  };
  auto add = [&](uint32_t z, double p) {
    if (next[z] == 0.0) touched.push_back(z);
    next[z] += p;
  };

  const int r1 = values.front();
  space.for_each_initial([&](uint32_t z0, double p0) {
    if (convention == SymbolConvention::kInitialPosition) {
      const auto pos = space.initial_position(z0);
      if (pos && *pos != b0) return;
    }
    space.for_each_boundary_successor(z0, [&](uint32_t z, double p, int v) {
      if (v == r1) add(z, p0 * p);
    });
  });
  if (!finish_step()) return -std::numeric_limits<double>::infinity();

  for (size_t n = 1; n < values.size(); ++n) {
    const int r = values[n];
    for (uint32_t from : active) {
      const double a = cur[from];
      space.for_each_successor(from, [&](uint32_t z, double p, int v) {
        if (v == r) add(z, a * p);
      });
    }
    if (!finish_step()) return -std::numeric_limits<double>::infinity();
  }
  return log_total / std::log(2.0);
}

}  // namespace rhythm
