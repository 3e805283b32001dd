#include "rhythm/io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace rhythm {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double number_or_neg_inf(const Json& j) {
  return j.is_null() ? -std::numeric_limits<double>::infinity() : j.get<double>();
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(std::string("missing key \"") + key + "\"");
  return j.at(key);
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("failed writing " + path);
}

void write_json_file(const std::string& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

Json corpus_to_json(const Corpus& corpus) {
  Json pieces = Json::array();
  for (size_t i = 0; i < corpus.size(); ++i) {
    pieces.push_back({{"id", corpus.ids[i]}, {"onsets", corpus.pieces[i].onsets()}});
  }
  return {{"bar_length", corpus.bar_length}, {"pieces", pieces}};
}

Corpus corpus_from_json(const Json& j) {
  Corpus c;
  c.bar_length = j.value("bar_length", kDefaultBarLength);
  size_t index = 0;
  for (const Json& p : require(j, "pieces")) {
    const std::string id = p.value("id", "piece" + std::to_string(index));
    try {
      c.add(id, RhythmScore(require(p, "onsets").get<std::vector<int>>(), c.bar_length));
    } catch (const Json::exception& e) {
      throw Error("piece " + id + ": " + e.what());
    }
    ++index;
  }
  return c;
}

std::vector<RawPiece> raw_corpus_from_json(const Json& j) {
  const std::string meter = j.value("meter", "4/4");
  const int tpq = j.value("ticks_per_quarter", 4);
  std::vector<RawPiece> out;
  for (const Json& p : require(j, "pieces")) {
    RawPiece raw;
    raw.id = p.value("id", "piece" + std::to_string(out.size()));
    raw.meter = p.value("meter", meter);
    raw.ticks_per_quarter = p.value("ticks_per_quarter", tpq);
    raw.onsets = require(p, "onsets").get<std::vector<int64_t>>();
    out.push_back(std::move(raw));
  }
  return out;
}

namespace {

std::string division_key(int r, const Division& d) { return "r:" + std::to_string(r) + "->h:" + d.label(); }
std::string shift_key(int s) { return "s:" + std::to_string(s); }

std::pair<std::string, std::string> split_arrow(const std::string& key) {
  const size_t at = key.find("->");
  if (at == std::string::npos) throw Error("key \"" + key + "\" lacks \"->\"");
  return {key.substr(0, at), key.substr(at + 2)};
}

}  // namespace

Json params_to_json(const ModelParams& p) {
  const int S = p.symbol_count();
  Json j;
  j["model"] = p.config.name();
  j["bar_length"] = p.bar_length;
  if (p.config.family == Family::kPat) {
    Json labels = Json::array();
    for (const NotePattern& k : p.patterns.patterns()) labels.push_back(k.label());
    j["patterns"] = labels;
  }
  auto row_object = [&](const Distribution& row, const std::string& prefix) {
    Json o = Json::object();
    for (int k = 0; k < static_cast<int>(row.size()); ++k) {
      if (row[k] != 0.0) o[prefix + p.symbol_label(k)] = row[k];
    }
    return o;
  };
  j["initial"] = row_object(p.initial, "");
  if (!p.unigram.empty()) j["unigram"] = row_object(p.unigram, "");
  if (!p.transition.empty()) {
    Json t = Json::object();
    for (int a = 0; a < S; ++a) {
      const Json row = row_object(p.transition[a], p.symbol_label(a) + "->");
      for (auto& [k, v] : row.items()) t[k] = v;
    }
    j["transition"] = t;
  }
  if (!p.transition2.empty()) {
    Json t = Json::object();
    for (int a = 0; a < S; ++a) {
      for (int b = 0; b < S; ++b) {
        const std::string prefix = p.symbol_label(a) + "," + p.symbol_label(b) + "->";
        const Json row = row_object(p.transition2[a * S + b], prefix);
        for (auto& [k, v] : row.items()) t[k] = v;
      }
    }
    j["transition2"] = t;
  }
  if (p.config.division) {
    const DivisionCatalog catalog(p.bar_length);
    Json d = Json::object();
    for (int r = 1; r <= p.bar_length; ++r) {
      const auto& divs = catalog.for_value(r);
      for (size_t h = 0; h < divs.size(); ++h) {
        if (p.division[r - 1][h] != 0.0) d[division_key(r, divs[h])] = p.division[r - 1][h];
      }
    }
    j["division"] = d;
  }
  if (p.config.shift) {
    Json s = Json::object();
    for (int i = 0; i < p.shift_count(); ++i) {
      if (p.shift[i] != 0.0) s[shift_key(ModelParams::shift_of_index(i, p.bar_length))] = p.shift[i];
    }
    j["shift"] = s;
  }
  return j;
}

ModelParams params_from_json(const Json& j) {
  const ModelConfig config = ModelConfig::Parse(require(j, "model").get<std::string>());
  const int nb = j.value("bar_length", kDefaultBarLength);
  PatternVocabulary patterns;
  if (config.family == Family::kPat && j.contains("patterns")) {
    std::vector<NotePattern> list;
    for (const Json& l : j.at("patterns")) list.push_back(NotePattern::FromLabel(l.get<std::string>()));
    patterns = PatternVocabulary(std::move(list));
  }
  ModelParams p = make_empty_params(config, nb, std::move(patterns));
  const int S = p.symbol_count();
  std::map<std::string, int> symbol;
  for (int k = 0; k < S; ++k) symbol[p.symbol_label(k)] = k;
  auto sym = [&](const std::string& label) {
    const auto it = symbol.find(label);
    if (it == symbol.end()) throw Error("unknown symbol label \"" + label + "\"");
    return it->second;
  };
  auto fill_row = [&](const Json& o, Distribution& row) {
    for (auto& [k, v] : o.items()) row[sym(k)] = v.get<double>();
  };

  fill_row(require(j, "initial"), p.initial);
  if (config.order == 0) fill_row(require(j, "unigram"), p.unigram);
  if (config.order >= 1) {
    for (auto& [key, v] : require(j, "transition").items()) {
      const auto [from, to] = split_arrow(key);
      p.transition[sym(from)][sym(to)] = v.get<double>();
    }
  }
  if (config.order == 2) {
    for (auto& [key, v] : require(j, "transition2").items()) {
      const auto [ctx, to] = split_arrow(key);
      const size_t comma = ctx.find(',');
      if (comma == std::string::npos) throw Error("second-order key \"" + key + "\" lacks a context pair");
      p.transition2[sym(ctx.substr(0, comma)) * S + sym(ctx.substr(comma + 1))][sym(to)] = v.get<double>();
    }
  }
  if (config.division) {
    const DivisionCatalog catalog(nb);
    std::map<std::string, std::pair<int, int>> index;
    for (int r = 1; r <= nb; ++r) {
      const auto& divs = catalog.for_value(r);
      for (size_t h = 0; h < divs.size(); ++h) index[division_key(r, divs[h])] = {r, static_cast<int>(h)};
    }
    for (auto& [key, v] : require(j, "division").items()) {
      const auto it = index.find(key);
      if (it == index.end()) throw Error("unknown division \"" + key + "\"");
      p.division[it->second.first - 1][it->second.second] = v.get<double>();
    }
  }
  if (config.shift) {
    for (auto& [key, v] : require(j, "shift").items()) {
      if (key.rfind("s:", 0) != 0) throw Error("unknown shift \"" + key + "\"");
      const int s = std::stoi(key.substr(2));
      if (s <= -nb || s >= nb) throw Error("shift \"" + key + "\" out of range");
      p.shift[s + nb - 1] = v.get<double>();
    }
  }
  p.validate();
  return p;
}

Json hyperparams_to_json(const Hyperparams& hp, const ModelConfig& model) {
  return {{"model", model.name()},
          {"alpha",
           {{"initial", hp.alpha.initial},
            {"transition", hp.alpha.transition},
            {"division", hp.alpha.division},
            {"shift", hp.alpha.shift}}},
          {"xi0", hp.xi0},
          {"zeta0", hp.zeta0},
          {"base", params_to_json(hp.base)}};
}

Hyperparams hyperparams_from_json(const Json& j, ModelConfig* model) {
  Hyperparams hp;
  const ModelConfig config = ModelConfig::Parse(require(j, "model").get<std::string>());
  const Json& a = require(j, "alpha");
  hp.alpha = {a.at("initial").get<double>(), a.at("transition").get<double>(),
              a.at("division").get<double>(), a.at("shift").get<double>()};
  hp.xi0 = require(j, "xi0").get<double>();
  hp.zeta0 = require(j, "zeta0").get<double>();
  hp.base = params_from_json(require(j, "base"));
  if (hp.base.config != config.non_bayesian()) {
    throw Error("base model " + hp.base.config.name() + " does not match " + config.name());
  }
  if (model) *model = config;
  return hp;
}

Json performances_to_json(const PerformanceSet& set) {
  Json j = Json::object();
  if (set.has_timing) {
    j["tempo_bpm"] = set.timing.tempo_bpm();
    j["sigma_t"] = set.timing.sigma;
    j["seed"] = set.seed;
  }
  Json list = Json::array();
  for (size_t i = 0; i < set.performances.size(); ++i) {
    list.push_back({{"id", set.ids[i]}, {"onsets", set.performances[i].onsets}});
  }
  j["performances"] = list;
  return j;
}

PerformanceSet performances_from_json(const Json& j) {
  PerformanceSet set;
  if (j.contains("tempo_bpm") && j.contains("sigma_t")) {
    set.timing = TimingParams::FromTempo(j.at("tempo_bpm").get<double>(), j.at("sigma_t").get<double>());
    set.has_timing = true;
    set.seed = j.value("seed", uint64_t{0});
  }
  // A single performance may be given as a bare {"onsets": [...]}.
  if (!j.contains("performances") && j.contains("onsets")) {
    set.ids.push_back(j.value("id", "piece0"));
    set.performances.push_back({j.at("onsets").get<std::vector<double>>()});
    set.performances.back().validate();
    return set;
  }
  for (const Json& p : require(j, "performances")) {
    set.ids.push_back(p.value("id", "piece" + std::to_string(set.ids.size())));
    set.performances.push_back({require(p, "onsets").get<std::vector<double>>()});
    set.performances.back().validate();
  }
  return set;
}

std::string performance_to_csv(const Performance& p) {
  std::string out = "onset\n";
  for (double t : p.onsets) out += fmt(t) + "\n";
  return out;
}

Performance performance_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Performance p;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line == "onset") continue;
    }
    try {
      size_t used = 0;
      p.onsets.push_back(std::stod(line, &used));
      if (used != line.size()) throw std::invalid_argument(line);
    } catch (const std::exception&) {
      throw Error("bad onset line \"" + line + "\"");
    }
  }
  p.validate();
  return p;
}

RhythmScore transcription_score(const TranscriptionResult& r, int bar_length) {
  return RhythmScore::FromNoteValues(r.first_position, r.note_values, bar_length);
}

Json transcriptions_to_json(const std::string& model, const std::vector<PieceTranscription>& pieces) {
  Json list = Json::array();
  for (const PieceTranscription& p : pieces) {
    Json e = {{"id", p.id}, {"ok", p.ok}};
    if (!p.ok) {
      e["failure"] = p.failure;
      list.push_back(e);
      continue;
    }
    const TranscriptionResult& r = p.result;
    e["note_values"] = r.note_values;
    e["first_position"] = r.first_position;
    e["log_likelihood"] = finite_or_null(r.log_likelihood);
    e["path_log_prob"] = finite_or_null(r.path_log_prob);
    e["best_iteration"] = r.best_iteration;
    Json trace = Json::array();
    for (double x : r.trace) trace.push_back(finite_or_null(x));
    e["trace"] = trace;
    e["boundary_state"] = r.path.boundary;
    e["path"] = r.path.states;
    e["states"] = r.state_labels;
    list.push_back(e);
  }
  return {{"model", model}, {"transcriptions", list}};
}

std::vector<PieceTranscription> transcriptions_from_json(const Json& j) {
  std::vector<PieceTranscription> out;
  for (const Json& e : require(j, "transcriptions")) {
    PieceTranscription p;
    p.id = require(e, "id").get<std::string>();
    p.ok = e.value("ok", true);
    if (!p.ok) {
      p.failure = e.value("failure", "");
      out.push_back(std::move(p));
      continue;
    }
    TranscriptionResult& r = p.result;
    r.note_values = require(e, "note_values").get<std::vector<int>>();
    r.first_position = e.value("first_position", 0);
    if (e.contains("log_likelihood")) r.log_likelihood = number_or_neg_inf(e.at("log_likelihood"));
    if (e.contains("path_log_prob")) r.path_log_prob = number_or_neg_inf(e.at("path_log_prob"));
    r.best_iteration = e.value("best_iteration", -1);
    if (e.contains("trace")) {
      for (const Json& x : e.at("trace")) r.trace.push_back(number_or_neg_inf(x));
    }
    r.path.boundary = e.value("boundary_state", 0u);
    if (e.contains("path")) r.path.states = e.at("path").get<std::vector<uint32_t>>();
    if (e.contains("states")) r.state_labels = e.at("states").get<std::vector<std::string>>();
    out.push_back(std::move(p));
  }
  return out;
}

Json cross_entropy_to_json(const std::string& model, const Corpus& corpus, const CrossEntropyReport& r) {
  Json pieces = Json::array();
  for (size_t i = 0; i < corpus.size(); ++i) {
    pieces.push_back({{"id", corpus.ids[i]},
                      {"notes", corpus.pieces[i].note_count()},
                      {"log2_prob", finite_or_null(r.piece_log2[i])},
                      {"log2_prob_with_initial", finite_or_null(r.piece_log2_with_initial[i])}});
  }
  return {{"model", model},
          {"notes", r.notes},
          {"bits_per_note", std::isfinite(r.bits_per_note) ? Json(r.bits_per_note) : Json("inf")},
          {"bits_per_note_with_initial",
           std::isfinite(r.bits_per_note_with_initial) ? Json(r.bits_per_note_with_initial) : Json("inf")},
          {"pieces", pieces}};
}

std::string cross_entropy_to_csv(const Corpus& corpus, const CrossEntropyReport& r) {
  std::string out = "id,notes,log2_prob,log2_prob_with_initial\n";
  for (size_t i = 0; i < corpus.size(); ++i) {
    out += corpus.ids[i] + "," + std::to_string(corpus.pieces[i].note_count()) + "," + fmt(r.piece_log2[i]) +
           "," + fmt(r.piece_log2_with_initial[i]) + "\n";
  }
  out += "total," + std::to_string(r.notes) + "," + fmt(-r.bits_per_note * r.notes) + "," +
         fmt(-r.bits_per_note_with_initial * r.notes) + "\n";
  return out;
}

double ErrorReport::error_rate() const {
  return total_notes ? static_cast<double>(total_errors) / static_cast<double>(total_notes) : 0.0;
}

ErrorReport compare_transcriptions(const std::vector<PieceTranscription>& estimated, const Corpus& truth) {
  std::map<std::string, size_t> by_id;
  for (size_t i = 0; i < truth.size(); ++i) by_id[truth.ids[i]] = i;
  ErrorReport r;
  for (const PieceTranscription& p : estimated) {
    const auto it = by_id.find(p.id);
    if (it == by_id.end()) throw Error("no ground truth for piece " + p.id);
    if (!p.ok) throw Error("piece " + p.id + " was not transcribed: " + p.failure);
    const std::vector<int> t = to_note_values(truth.pieces[it->second]);
    if (t.size() != p.result.note_values.size()) {
      throw Error("piece " + p.id + ": transcription has " + std::to_string(p.result.note_values.size()) +
                  " notes, ground truth " + std::to_string(t.size()));
    }
    size_t wrong = 0;
    for (size_t n = 0; n < t.size(); ++n) wrong += t[n] != p.result.note_values[n];
    r.ids.push_back(p.id);
    r.notes.push_back(t.size());
    r.errors.push_back(wrong);
    r.total_notes += t.size();
    r.total_errors += wrong;
  }
  return r;
}

Json error_report_to_json(const std::string& model, const ErrorReport& r) {
  Json pieces = Json::array();
  for (size_t i = 0; i < r.ids.size(); ++i) {
    pieces.push_back({{"id", r.ids[i]},
                      {"notes", r.notes[i]},
                      {"errors", r.errors[i]},
                      {"error_rate", static_cast<double>(r.errors[i]) / static_cast<double>(r.notes[i])}});
  }
  return {{"model", model},
          {"notes", r.total_notes},
          {"errors", r.total_errors},
          {"error_rate", r.error_rate()},
          {"pieces", pieces}};
}

std::string error_report_to_csv(const ErrorReport& r) {
  std::string out = "id,notes,errors,error_rate\n";
  for (size_t i = 0; i < r.ids.size(); ++i) {
    out += r.ids[i] + "," + std::to_string(r.notes[i]) + "," + std::to_string(r.errors[i]) + "," +
           fmt(static_cast<double>(r.errors[i]) / static_cast<double>(r.notes[i])) + "\n";
  }
  out += "total," + std::to_string(r.total_notes) + "," + std::to_string(r.total_errors) + "," +
         fmt(r.error_rate()) + "\n";
  return out;
}

Json populations_to_json(const EntropyPopulations& p) {
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  return {{"generic_entropy", p.generic},
          {"mean", {{"piece", mean(p.piece)}, {"sampled", mean(p.sampled)}, {"dirichlet", mean(p.dirichlet)}}},
          {"piece", p.piece},
          {"sampled", p.sampled},
          {"dirichlet", p.dirichlet}};
}

std::string populations_to_csv(const EntropyPopulations& p) {
  std::string out = "population,value\n";
  for (double x : p.piece) out += "piece," + fmt(x) + "\n";
  for (double x : p.sampled) out += "sampled," + fmt(x) + "\n";
  for (double x : p.dirichlet) out += "dirichlet," + fmt(x) + "\n";
  out += "generic," + fmt(p.generic) + "\n";
  return out;
}

Json benchmark_to_json(const std::vector<BenchmarkEntry>& entries, bool include_timing) {
  Json list = Json::array();
  for (const BenchmarkEntry& e : entries) {
    Json o = {{"model", e.model}, {"ok", e.ok}};
    if (!e.ok) {
      o["failure"] = e.failure;
    } else {
      o["seed_error_rates"] = e.seed_error_rates;
      o["mean_error"] = e.mean_error;
      o["sd_error"] = e.sd_error;
    }
    if (include_timing) o["seconds"] = e.seconds;
    list.push_back(o);
  }
  return {{"models", list}};
}

std::string benchmark_to_csv(const std::vector<BenchmarkEntry>& entries, bool include_timing) {
  std::string out = include_timing ? "model,ok,mean_error,sd_error,seconds\n" : "model,ok,mean_error,sd_error\n";
  for (const BenchmarkEntry& e : entries) {
    out += e.model + "," + (e.ok ? "1" : "0") + "," + (e.ok ? fmt(e.mean_error) : "") + "," +
           (e.ok ? fmt(e.sd_error) : "");
    if (include_timing) out += "," + fmt(e.seconds);
    out += "\n";
  }
  return out;
}

}  // namespace rhythm
