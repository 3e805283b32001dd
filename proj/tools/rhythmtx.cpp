// rhythmtx: corpus preparation, training, synthesis, transcription and
// evaluation from the command line.

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rhythm/io.h"

namespace {

using namespace rhythm;

class UsageError : public Error {
 public:
  using Error::Error;
};

// Settings resolve as: command-line flag, then RHYTHM_* environment
// variable, then config file, then built-in default.
class Settings {
 public:
  Settings() {
    defaults_ = {{"model", ""},         {"alpha.initial", "10"}, {"alpha.transition", "10"},
                 {"alpha.division", "10"}, {"alpha.shift", "10"}, {"xi0", "0.9"},
                 {"zeta0", "0.9"},       {"iterations", "100"},  {"beam_width", "0"},
                 {"seed", ""},           {"tempo_bpm", "144"},   {"sigma_t", "0.04"},
                 {"d_min", "0.001"},     {"epsilon", "0.1"},     {"unigram_weight", "0.8"},
                 {"jobs", "1"}};
  }

  void set_flag(const std::string& key, const std::string& value) {
    check_key(key);
    if (key == "alpha") {
      for (const char* k : {"alpha.initial", "alpha.transition", "alpha.division", "alpha.shift"}) flags_[k] = value;
    } else {
      flags_[key] = value;
    }
  }

  void load_config(const std::string& path) {
    flatten(read_json_file(path), "", path);
  }

  void load_environment() {
    for (const auto& [key, value] : defaults_) {
      std::string name = "RHYTHM_";
      for (char c : key) name += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (const char* v = std::getenv(name.c_str())) env_[key] = v;
    }
  }

  bool explicitly_set(const std::string& key) const {
    return flags_.count(key) || env_.count(key) || file_.count(key);
  }

  std::string get(const std::string& key) const {
    for (const auto* layer : {&flags_, &env_, &file_, &defaults_}) {
      const auto it = layer->find(key);
      if (it != layer->end()) return it->second;
    }
    throw UsageError("unknown setting " + key);
  }

  double number(const std::string& key) const {
    const std::string v = get(key);
    try {
      size_t used = 0;
      const double x = std::stod(v, &used);
      if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw UsageError("setting " + key + " is not a number: \"" + v + "\"");
  }

  long integer(const std::string& key) const {
    const double x = number(key);
    if (x != static_cast<double>(static_cast<long>(x))) throw UsageError("setting " + key + " must be an integer");
    return static_cast<long>(x);
  }

  uint64_t seed() const {
    const std::string v = get("seed");
    if (v.empty()) throw UsageError("this command is randomized and needs an explicit --seed");
    try {
      size_t used = 0;
      const unsigned long long s = std::stoull(v, &used);
      if (used == v.size()) return s;
    } catch (const std::exception&) {
    }
    throw UsageError("seed must be a non-negative integer");
  }

  ModelConfig model() const {
    const std::string name = get("model");
    if (name.empty()) throw UsageError("no model given (--model)");
    try {
      return ModelConfig::Parse(name);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }

  Concentrations alpha() const {
    return {number("alpha.initial"), number("alpha.transition"), number("alpha.division"), number("alpha.shift")};
  }

  TimingParams timing() const {
    const double sigma = number("sigma_t");
    if (!(sigma > 0.0)) throw UsageError("sigma_t must be positive");
    return TimingParams::FromTempo(number("tempo_bpm"), sigma);
  }

  int jobs() const { return static_cast<int>(std::max(1L, integer("jobs"))); }

 private:
  void check_key(const std::string& key) const {
    if (key != "alpha" && !defaults_.count(key)) throw UsageError("unknown setting " + key);
  }

  void flatten(const Json& j, const std::string& prefix, const std::string& path) {
    if (!j.is_object()) throw UsageError(path + ": config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
      if (it->is_object()) {
        flatten(*it, key, path);
        continue;
      }
      if (key != "alpha" && !defaults_.count(key)) throw UsageError(path + ": unknown setting " + key);
      const std::string value = it->is_string() ? it->get<std::string>() : it->dump();
      if (key == "alpha") {
        for (const char* k : {"alpha.initial", "alpha.transition", "alpha.division", "alpha.shift"}) file_[k] = value;
      } else {
        file_[key] = value;
      }
    }
  }

  std::map<std::string, std::string> defaults_, file_, env_, flags_;
};

GibbsConfig gibbs_config(const Settings& s, const ModelConfig& model) {
  GibbsConfig g;
  g.iterations = static_cast<int>(s.integer("iterations"));
  const long beam = s.integer("beam_width");
  if (beam < 0) throw UsageError("beam_width must be non-negative");
  g.beam_width = beam == 0 ? default_beam_width(model) : static_cast<size_t>(beam);
  if (model.bayesian) g.seed = s.seed();
  return g;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PerformanceSet load_performances(const std::string& path) {
  if (ends_with(path, ".csv")) {
    PerformanceSet set;
    set.ids.push_back(std::filesystem::path(path).stem().string());
    set.performances.push_back(performance_from_csv(read_text(path)));
    return set;
  }
  return performances_from_json(read_json_file(path));
}

// prepare ------------------------------------------------------------------

struct PrepareArgs {
  std::string input, output;
  bool keep_empty = false;
  int bar_length = kDefaultBarLength;
};

int run_prepare(const PrepareArgs& a) {
  NormalizeOptions opt;
  opt.bar_length = a.bar_length;
  opt.keep_empty_segments = a.keep_empty;
  const std::vector<RawPiece> raw = raw_corpus_from_json(read_json_file(a.input));
  const NormalizeResult res = normalize_corpus(raw, opt);
  for (const DropRecord& d : res.dropped) std::cerr << "dropped " << d.id << ": " << d.reason << "\n";
  std::cerr << "pieces " << res.stats.pieces_in << " -> " << res.stats.pieces_out << ", merged onsets "
            << res.stats.merged_onsets << ", removed segments " << res.stats.removed_segments
            << ", inserted onsets " << res.stats.inserted_onsets << "\n";
  if (res.corpus.empty()) throw Error("no piece survived normalization");
  write_json_file(a.output, corpus_to_json(res.corpus));
  return 0;
}

// train --------------------------------------------------------------------

struct TrainArgs {
  std::string corpus, output, hyper_output;
};

int run_train(const TrainArgs& a, const Settings& s) {
  const ModelConfig model = s.model();
  const Corpus corpus = corpus_from_json(read_json_file(a.corpus));
  SmoothingConfig smoothing{s.number("epsilon"), s.number("unigram_weight")};
  const ModelParams p = estimate_params(corpus, {model.family, model.order}, smoothing);
  write_json_file(a.output, params_to_json(p));
  std::cerr << "trained " << p.config.name() << " on " << corpus.size() << " pieces, " << corpus.total_notes()
            << " notes\n";
  if (!a.hyper_output.empty()) {
    const Hyperparams hp = assemble_hyperparams(p, model, s.alpha(), s.number("xi0"), s.number("zeta0"));
    write_json_file(a.hyper_output, hyperparams_to_json(hp, model));
  }
  return 0;
}

// synth --------------------------------------------------------------------

struct SynthArgs {
  std::string corpus, output;
};

int run_synth(const SynthArgs& a, const Settings& s) {
  const Corpus corpus = corpus_from_json(read_json_file(a.corpus));
  PerformanceSet set;
  set.timing = s.timing();
  set.has_timing = true;
  set.seed = s.seed();
  const double d_min = s.number("d_min");
  size_t redraws = 0;
  for (size_t i = 0; i < corpus.size(); ++i) {
    Rng rng = make_rng(set.seed, i);
    SynthesisStats stats;
    set.ids.push_back(corpus.ids[i]);
    set.performances.push_back(synthesize(corpus.pieces[i], set.timing, rng, d_min, &stats));
    redraws += stats.redraws;
  }
  std::cerr << "synthesized " << corpus.size() << " performances at " << set.timing.tempo_bpm()
            << " BPM, sigma_t " << set.timing.sigma << " s, " << redraws << " durations redrawn\n";
  if (ends_with(a.output, ".csv")) {
    if (set.performances.size() != 1) throw UsageError("CSV output holds a single performance");
    write_text_file(a.output, performance_to_csv(set.performances[0]));
  } else {
    write_json_file(a.output, performances_to_json(set));
  }
  return 0;
}

// transcribe ---------------------------------------------------------------

struct TranscribeArgs {
  std::string performances, params, hyper, output, trace_csv;
};

int run_transcribe(const TranscribeArgs& a, const Settings& s) {
  if (a.params.empty() == a.hyper.empty()) throw UsageError("give exactly one of --params or --hyper");
  ModelConfig model;
  Hyperparams hp;
  if (!a.hyper.empty()) {
    hp = hyperparams_from_json(read_json_file(a.hyper), &model);
    if (s.explicitly_set("model") && s.model() != model) {
      throw UsageError("--model " + s.model().name() + " contradicts hyperparameter file for " + model.name());
    }
  } else {
    model = s.model();
    const ModelParams generic = params_from_json(read_json_file(a.params));
    hp = assemble_hyperparams(generic, model, s.alpha(), s.number("xi0"), s.number("zeta0"));
  }
  const PerformanceSet set = load_performances(a.performances);
  TimingParams tp = set.timing;
  if (!set.has_timing || s.explicitly_set("tempo_bpm") || s.explicitly_set("sigma_t")) tp = s.timing();
  const GibbsConfig base = gibbs_config(s, model);

  std::vector<PieceTranscription> out(set.performances.size());
  parallel_for(out.size(), s.jobs(), [&](size_t i) {
    out[i].id = set.ids[i];
    GibbsConfig g = base;
    g.stream = i;
    try {
      out[i].result = transcribe(model, hp, set.performances[i], tp, g);
    } catch (const std::exception& e) {
      out[i].ok = false;
      out[i].failure = e.what();
    }
  });
  int failures = 0;
  for (const PieceTranscription& p : out) {
    if (p.ok) {
      std::cerr << p.id << ": " << p.result.note_values.size() << " notes, log-likelihood "
                << p.result.log_likelihood << "\n";
    } else {
      ++failures;
      std::cerr << p.id << ": FAILED " << p.failure << "\n";
    }
  }
  write_json_file(a.output, transcriptions_to_json(model.name(), out));
  if (!a.trace_csv.empty()) {
    std::string csv = "id,iteration,log_likelihood\n";
    for (const PieceTranscription& p : out) {
      for (size_t it = 0; it < p.result.trace.size(); ++it) {
        std::ostringstream line;
        line.precision(17);
        line << p.id << "," << it << "," << p.result.trace[it] << "\n";
        csv += line.str();
      }
    }
    write_text_file(a.trace_csv, csv);
  }
  return failures ? 1 : 0;
}

// eval ---------------------------------------------------------------------

struct EvalArgs {
  std::string transcriptions, truth, params, corpus, output, csv;
};

int run_eval(const EvalArgs& a) {
  const bool error_mode = !a.transcriptions.empty();
  const bool ce_mode = !a.params.empty();
  if (error_mode == ce_mode) throw UsageError("give either --transcriptions with --truth, or --params with --corpus");
  if (error_mode) {
    if (a.truth.empty()) throw UsageError("--transcriptions needs ground truth (--truth)");
    const Json tj = read_json_file(a.transcriptions);
    const ErrorReport r =
        compare_transcriptions(transcriptions_from_json(tj), corpus_from_json(read_json_file(a.truth)));
    write_json_file(a.output, error_report_to_json(tj.value("model", ""), r));
    if (!a.csv.empty()) write_text_file(a.csv, error_report_to_csv(r));
    std::cerr << "error rate " << r.error_rate() << " (" << r.total_errors << "/" << r.total_notes << ")\n";
    return 0;
  }
  if (a.corpus.empty()) throw UsageError("--params needs an evaluation corpus (--corpus)");
  const ModelParams p = params_from_json(read_json_file(a.params));
  const Corpus corpus = corpus_from_json(read_json_file(a.corpus));
  const CrossEntropyReport r = cross_entropy(p, corpus);
  write_json_file(a.output, cross_entropy_to_json(p.config.name(), corpus, r));
  if (!a.csv.empty()) write_text_file(a.csv, cross_entropy_to_csv(corpus, r));
  std::cerr << "cross entropy " << r.bits_per_note << " bits/note (" << r.bits_per_note_with_initial
            << " with initial position)\n";
  return 0;
}

// study-sparseness ---------------------------------------------------------

struct StudyArgs {
  std::string params, corpus, output, csv;
  double concentration = 10.0;
  int samples = 100;
};

int run_study(const StudyArgs& a, const Settings& s) {
  const ModelParams p = params_from_json(read_json_file(a.params));
  const Corpus corpus = corpus_from_json(read_json_file(a.corpus));
  Rng rng = make_rng(s.seed());
  const EntropyPopulations pop = sparseness_study(p, corpus, a.concentration, a.samples, rng);
  write_json_file(a.output, populations_to_json(pop));
  if (!a.csv.empty()) write_text_file(a.csv, populations_to_csv(pop));
  return 0;
}

// bench --------------------------------------------------------------------

struct BenchArgs {
  std::string train, test, performances, output, csv;
  std::vector<std::string> models;
  std::vector<uint64_t> seeds;
  bool timing = false;
};

int run_bench(const BenchArgs& a, const Settings& s) {
  const Corpus train = corpus_from_json(read_json_file(a.train));
  const Corpus test = corpus_from_json(read_json_file(a.test));
  BenchmarkSetup setup;
  setup.models = a.models;
  setup.seeds = a.seeds;
  setup.timing = s.timing();
  setup.iterations = static_cast<int>(s.integer("iterations"));
  setup.beam_width = static_cast<size_t>(std::max(0L, s.integer("beam_width")));
  setup.alpha = s.alpha();
  setup.xi0 = s.number("xi0");
  setup.zeta0 = s.number("zeta0");
  setup.smoothing = {s.number("epsilon"), s.number("unigram_weight")};
  setup.jobs = s.jobs();
  if (setup.seeds.empty()) setup.seeds = {s.seed()};

  std::vector<Performance> perfs;
  if (!a.performances.empty()) {
    const PerformanceSet set = load_performances(a.performances);
    std::map<std::string, size_t> index;
    for (size_t i = 0; i < set.ids.size(); ++i) index[set.ids[i]] = i;
    for (const std::string& id : test.ids) {
      const auto it = index.find(id);
      if (it == index.end()) throw Error("no performance for test piece " + id);
      perfs.push_back(set.performances[it->second]);
    }
  } else {
    const uint64_t seed = s.seed();
    for (size_t i = 0; i < test.size(); ++i) {
      Rng rng = make_rng(seed, i);
      perfs.push_back(synthesize(test.pieces[i], setup.timing, rng, s.number("d_min")));
    }
  }
  const std::vector<BenchmarkEntry> entries = benchmark(setup, train, test, perfs);
  int failures = 0;
  for (const BenchmarkEntry& e : entries) {
    if (e.ok) {
      std::cerr << e.model << ": error " << e.mean_error << " +- " << e.sd_error << " (" << e.seconds << " s)\n";
    } else {
      ++failures;
      std::cerr << e.model << ": FAILED " << e.failure << "\n";
    }
  }
  write_json_file(a.output, benchmark_to_json(entries, a.timing));
  if (!a.csv.empty()) write_text_file(a.csv, benchmark_to_csv(entries, a.timing));
  return failures ? 1 : 0;
}

void add_setting(CLI::App* app, Settings& s, const std::string& flag, const std::string& key,
                 const std::string& help) {
  app->add_option_function<std::string>(flag, [&s, key](const std::string& v) { s.set_flag(key, v); }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rhythm transcription with Markov score models"};
  app.require_subcommand(1);
  Settings settings;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  add_setting(&app, settings, "--jobs", "jobs", "worker threads across pieces and seeds");

  auto model_settings = [&](CLI::App* sub) {
    add_setting(sub, settings, "--model", "model", "model name, e.g. metmm1, patmm1sdb");
    add_setting(sub, settings, "--alpha", "alpha", "all concentration parameters");
    add_setting(sub, settings, "--alpha-initial", "alpha.initial", "initial-distribution concentration");
    add_setting(sub, settings, "--alpha-transition", "alpha.transition", "transition concentration");
    add_setting(sub, settings, "--alpha-division", "alpha.division", "division concentration");
    add_setting(sub, settings, "--alpha-shift", "alpha.shift", "shift concentration");
    add_setting(sub, settings, "--xi0", "xi0", "prior mass of zero shift");
    add_setting(sub, settings, "--zeta0", "zeta0", "prior mass of the identity division");
  };
  auto timing_settings = [&](CLI::App* sub) {
    add_setting(sub, settings, "--tempo-bpm", "tempo_bpm", "tempo in quarter notes per minute");
    add_setting(sub, settings, "--sigma-t", "sigma_t", "onset deviation in seconds");
  };
  auto gibbs_settings = [&](CLI::App* sub) {
    add_setting(sub, settings, "--iterations", "iterations", "Gibbs sweeps");
    add_setting(sub, settings, "--beam-width", "beam_width", "beam width, 0 for the model default");
    add_setting(sub, settings, "--seed", "seed", "random seed");
  };

  PrepareArgs prepare;
  CLI::App* cmd_prepare = app.add_subcommand("prepare", "normalize a raw corpus");
  cmd_prepare->add_option("-i,--input", prepare.input, "raw corpus JSON")->required()->check(CLI::ExistingFile);
  cmd_prepare->add_option("-o,--output", prepare.output, "corpus JSON")->required();
  cmd_prepare->add_flag("--keep-empty-segments", prepare.keep_empty, "fill empty bars instead of removing them");
  cmd_prepare->add_option("--bar-length", prepare.bar_length, "grid units per segment");

  TrainArgs train;
  CLI::App* cmd_train = app.add_subcommand("train", "estimate a generic score model");
  cmd_train->add_option("--corpus", train.corpus, "corpus JSON")->required()->check(CLI::ExistingFile);
  cmd_train->add_option("-o,--output", train.output, "parameter JSON")->required();
  cmd_train->add_option("--hyper-output", train.hyper_output, "also write priors for --model");
  model_settings(cmd_train);
  add_setting(cmd_train, settings, "--epsilon", "epsilon", "additive smoothing");
  add_setting(cmd_train, settings, "--unigram-weight", "unigram_weight", "pattern-model unigram weight");

  SynthArgs synth;
  CLI::App* cmd_synth = app.add_subcommand("synth", "synthesize performances from scores");
  cmd_synth->add_option("--corpus", synth.corpus, "score corpus JSON")->required()->check(CLI::ExistingFile);
  cmd_synth->add_option("-o,--output", synth.output, "performance JSON (or .csv)")->required();
  timing_settings(cmd_synth);
  add_setting(cmd_synth, settings, "--d-min", "d_min", "smallest accepted duration in seconds");
  add_setting(cmd_synth, settings, "--seed", "seed", "random seed");

  TranscribeArgs tr;
  CLI::App* cmd_tr = app.add_subcommand("transcribe", "transcribe performances");
  cmd_tr->add_option("--performances", tr.performances, "performance JSON or CSV")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_tr->add_option("--params", tr.params, "generic model from train")->check(CLI::ExistingFile);
  cmd_tr->add_option("--hyper", tr.hyper, "hyperparameter JSON")->check(CLI::ExistingFile);
  cmd_tr->add_option("-o,--output", tr.output, "transcription JSON")->required();
  cmd_tr->add_option("--trace-csv", tr.trace_csv, "log-likelihood trace per sweep");
  model_settings(cmd_tr);
  timing_settings(cmd_tr);
  gibbs_settings(cmd_tr);

  EvalArgs ev;
  CLI::App* cmd_eval = app.add_subcommand("eval", "error rates or cross entropies");
  cmd_eval->add_option("--transcriptions", ev.transcriptions, "transcription JSON")->check(CLI::ExistingFile);
  cmd_eval->add_option("--truth", ev.truth, "ground-truth corpus JSON")->check(CLI::ExistingFile);
  cmd_eval->add_option("--params", ev.params, "model for cross entropy")->check(CLI::ExistingFile);
  cmd_eval->add_option("--corpus", ev.corpus, "corpus for cross entropy")->check(CLI::ExistingFile);
  cmd_eval->add_option("-o,--output", ev.output, "report JSON")->required();
  cmd_eval->add_option("--csv", ev.csv, "report CSV");

  StudyArgs st;
  CLI::App* cmd_study = app.add_subcommand("study-sparseness", "entropy populations for a corpus");
  cmd_study->add_option("--params", st.params, "order-0 or first-order generic model")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_study->add_option("--corpus", st.corpus, "corpus JSON")->required()->check(CLI::ExistingFile);
  cmd_study->add_option("--concentration", st.concentration, "Dirichlet concentration");
  cmd_study->add_option("--samples", st.samples, "Dirichlet draws");
  cmd_study->add_option("-o,--output", st.output, "populations JSON")->required();
  cmd_study->add_option("--csv", st.csv, "population,value CSV");
  add_setting(cmd_study, settings, "--seed", "seed", "random seed");

  BenchArgs bench;
  CLI::App* cmd_bench = app.add_subcommand("bench", "error rates over models and seeds");
  cmd_bench->add_option("--train", bench.train, "training corpus JSON")->required()->check(CLI::ExistingFile);
  cmd_bench->add_option("--test", bench.test, "test corpus JSON")->required()->check(CLI::ExistingFile);
  cmd_bench->add_option("--performances", bench.performances, "test performances (synthesized otherwise)")
      ->check(CLI::ExistingFile);
  cmd_bench->add_option("--models", bench.models, "model names")->required()->delimiter(',');
  cmd_bench->add_option("--seeds", bench.seeds, "Gibbs seeds")->delimiter(',');
  cmd_bench->add_option("-o,--output", bench.output, "report JSON")->required();
  cmd_bench->add_option("--csv", bench.csv, "report CSV");
  cmd_bench->add_flag("--timing", bench.timing, "include wall-clock seconds in the report");
  add_setting(cmd_bench, settings, "--alpha", "alpha", "all concentration parameters");
  add_setting(cmd_bench, settings, "--xi0", "xi0", "prior mass of zero shift");
  add_setting(cmd_bench, settings, "--zeta0", "zeta0", "prior mass of the identity division");
  timing_settings(cmd_bench);
  gibbs_settings(cmd_bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (!config_path.empty()) settings.load_config(config_path);
    settings.load_environment();
    if (*cmd_prepare) return run_prepare(prepare);
    if (*cmd_train) return run_train(train, settings);
    if (*cmd_synth) return run_synth(synth, settings);
    if (*cmd_tr) return run_transcribe(tr, settings);
    if (*cmd_eval) return run_eval(ev);
    if (*cmd_study) return run_study(st, settings);
    if (*cmd_bench) return run_bench(bench, settings);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
