// Score-model configuration and parameter tables.

#include "rhythm/model.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace rhythm {

std::string_view family_name(Family family) {
  switch (family) {
    case Family::kNote: return "note";
    case Family::kMet:  return "met";
    case Family::kPat:  return "pat";
  }
  return "?";
}

void ModelConfig::validate() const {
  if (order < 0 || order > 2) throw Error("model order must be 0, 1 or 2");
  if (family == Family::kPat && order == 2) {
    throw Error("second-order pattern models are not supported");
  }
  if (modified() && order != 1) throw Error("modification processes require a first-order model");
}

std::string ModelConfig::name() const {
  std::string s(family_name(family));
  s += "mm";
  s += std::to_string(order);
  if (shift) s += 's';
  if (division) s += 'd';
  if (bayesian) s += 'b';
  return s;
}

ModelConfig ModelConfig::Parse(std::string_view name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  ModelConfig config;
  size_t pos = 0;
  if (s.rfind("notemm", 0) == 0) {
    config.family = Family::kNote;
    pos = 6;
  } else if (s.rfind("metmm", 0) == 0) {
    config.family = Family::kMet;
    pos = 5;
  } else if (s.rfind("patmm", 0) == 0) {
    config.family = Family::kPat;
    pos = 5;
  } else {
    throw Error("unknown model '" + std::string(name) + "'");
  }
  if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos]))) {
    throw Error("model '" + std::string(name) + "' lacks an order digit");
  }
  config.order = s[pos++] - '0';
  if (pos < s.size() && s[pos] == 's') config.shift = true, ++pos;
  if (pos < s.size() && s[pos] == 'd') config.division = true, ++pos;
  if (pos < s.size() && s[pos] == 'b') config.bayesian = true, ++pos;
  if (pos != s.size()) throw Error("unknown model '" + std::string(name) + "'");
  config.validate();
  return config;
}

ModelConfig ModelConfig::non_bayesian() const {
  ModelConfig c = *this;
  c.bayesian = false;
  return c;
}

std::vector<ModelConfig> listed_variants() {
  std::vector<ModelConfig> out;
  for (Family f : {Family::kNote, Family::kMet, Family::kPat}) {
    for (int order = 0; order <= (f == Family::kPat ? 1 : 2); ++order) {
      out.push_back({f, order, false, false, false});
      out.push_back({f, order, false, false, true});
      if (order == 1) {
        out.push_back({f, 1, true, false, true});
        out.push_back({f, 1, false, true, true});
        out.push_back({f, 1, true, true, true});
      }
    }
  }
  return out;
}

std::string Division::label() const {
  std::string s;
  for (size_t g = 0; g < parts.size(); ++g) {
    if (g) s += '+';
    s += std::to_string(parts[g]);
  }
  return s;
}

DivisionCatalog::DivisionCatalog(int bar_length) : bar_length_(bar_length) {
  if (bar_length < 1) throw Error("bar length must be positive");
  offsets_.push_back(0);
  for (int r = 1; r <= bar_length; ++r) {
    std::vector<Division> divisions{{r, {r}}};
    for (int a = 1; a < r; ++a) divisions.push_back({r, {a, r - a}});
    for (size_t i = 0; i < divisions.size(); ++i) {
      flat_.push_back(divisions[i]);
      local_.push_back(static_cast<int>(i));
    }
    offsets_.push_back(offsets_.back() + static_cast<int>(divisions.size()));
    by_value_.push_back(std::move(divisions));
  }
}

DivisionCatalog build_division_catalog(int bar_length) { return DivisionCatalog(bar_length); }

PatternVocabulary::PatternVocabulary(std::vector<NotePattern> patterns)
    : patterns_(std::move(patterns)) {
  for (size_t k = 0; k < patterns_.size(); ++k) {
    if (!index_.emplace(patterns_[k].mask(), static_cast<int>(k)).second) {
      throw Error("duplicate pattern " + patterns_[k].label());
    }
    if (patterns_[k].bar_length() != patterns_.front().bar_length()) {
      throw Error("patterns disagree on bar length");
    }
  }
}

PatternVocabulary PatternVocabulary::Exhaustive(int bar_length) {
  if (bar_length < 1 || bar_length > 16) throw Error("exhaustive vocabulary needs 1 <= N_b <= 16");
  std::vector<NotePattern> patterns;
  const uint32_t count = (1u << bar_length) - 1;
  patterns.reserve(count);
  for (uint32_t mask = 1; mask <= count; ++mask) {
    patterns.push_back(NotePattern::FromMask(mask, bar_length));
  }
  return PatternVocabulary(std::move(patterns));
}

int PatternVocabulary::find(const NotePattern& pattern) const {
  const auto it = index_.find(pattern.mask());
  if (it == index_.end() || patterns_[it->second].bar_length() != pattern.bar_length()) return -1;
  return it->second;
}

int ModelParams::symbol_count() const {
  return config.family == Family::kPat ? patterns.size() : bar_length;
}

std::string ModelParams::symbol_label(int symbol) const {
  switch (config.family) {
    case Family::kNote: return "r:" + std::to_string(symbol + 1);
    case Family::kMet:  return "b:" + std::to_string(symbol);
    case Family::kPat:  return "k:" + patterns.at(symbol).label();
  }
  return "?";
}

namespace {

void check_row(const Distribution& row, size_t expected, double tolerance, const char* what) {
  if (row.size() != expected) {
    throw Error(std::string(what) + ": row has " + std::to_string(row.size()) +
                " entries, expected " + std::to_string(expected));
  }
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error(std::string(what) + ": invalid probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw Error(std::string(what) + ": row sums to " + std::to_string(sum));
  }
}

}  // namespace

void ModelParams::validate(double tolerance) const {
  config.validate();
  if (bar_length < 1) throw Error("bar length must be positive");
  if (config.family == Family::kPat) {
    if (patterns.empty()) throw Error("pattern model without a vocabulary");
    for (const auto& p : patterns.patterns()) {
      if (p.bar_length() != bar_length) throw Error("pattern bar length mismatch");
    }
  }
  const size_t symbols = static_cast<size_t>(symbol_count());
  check_row(initial, symbols, tolerance, "initial");
  if (config.order == 0) check_row(unigram, symbols, tolerance, "unigram");
  if (config.order >= 1) {
    if (transition.size() != symbols) throw Error("transition table has wrong row count");
    for (const auto& row : transition) check_row(row, symbols, tolerance, "transition");
  }
  if (config.order == 2) {
    if (transition2.size() != symbols * symbols) throw Error("transition2 table has wrong row count");
    for (const auto& row : transition2) check_row(row, symbols, tolerance, "transition2");
  }
  if (config.division) {
    const DivisionCatalog catalog(bar_length);
    if (division.size() != static_cast<size_t>(bar_length)) throw Error("division table has wrong row count");
    for (int r = 1; r <= bar_length; ++r) {
      check_row(division[r - 1], catalog.for_value(r).size(), tolerance, "division");
    }
  }
  if (config.shift) check_row(shift, static_cast<size_t>(shift_count()), tolerance, "shift");
}

ModelParams make_empty_params(const ModelConfig& config, int bar_length, PatternVocabulary patterns) {
  config.validate();
  ModelParams p;
  p.config = config;
  p.config.bayesian = false;
  p.bar_length = bar_length;
  if (config.family == Family::kPat) {
    p.patterns = patterns.empty() ? PatternVocabulary::Exhaustive(bar_length) : std::move(patterns);
  }
  const size_t symbols = static_cast<size_t>(p.symbol_count());
  p.initial.assign(symbols, 0.0);
  if (config.order == 0) p.unigram.assign(symbols, 0.0);
  if (config.order >= 1) p.transition.assign(symbols, Distribution(symbols, 0.0));
  if (config.order == 2) p.transition2.assign(symbols * symbols, Distribution(symbols, 0.0));
  if (config.division) {
    const DivisionCatalog catalog(bar_length);
    for (int r = 1; r <= bar_length; ++r) p.division.emplace_back(catalog.for_value(r).size(), 0.0);
  }
  if (config.shift) p.shift.assign(static_cast<size_t>(p.shift_count()), 0.0);
  return p;
}

void set_trivial_modifications(ModelParams& params) {
  if (params.config.division) {
    for (auto& row : params.division) {
      std::fill(row.begin(), row.end(), 0.0);
      row[0] = 1.0;
    }
  }
  if (params.config.shift) {
    std::fill(params.shift.begin(), params.shift.end(), 0.0);
    params.shift[static_cast<size_t>(params.bar_length - 1)] = 1.0;
  }
}

}  // namespace rhythm
