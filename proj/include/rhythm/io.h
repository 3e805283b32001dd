// JSON and CSV formats for corpora, parameters, performances and reports.

#ifndef RHYTHM_IO_H_
#define RHYTHM_IO_H_

#include <string>
#include <vector>

#include "json.hpp"
#include "rhythm/evaluation.h"

namespace rhythm {

using Json = nlohmann::json;

Json read_json_file(const std::string& path);
/// Writes `j` with two-space indentation and a trailing newline.
void write_json_file(const std::string& path, const Json& j);
void write_text_file(const std::string& path, const std::string& text);

// {"bar_length": 8, "pieces": [{"id": "...", "onsets": [0, 2, ...]}]}
Json corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(const Json& j);

/// Raw pieces: the same layout where each piece (or the top level, as a
/// default) may carry "meter" and "ticks_per_quarter". A plain corpus reads
/// as 4/4 at four ticks per quarter.
std::vector<RawPiece> raw_corpus_from_json(const Json& j);

/// Tables keyed by labels: "r:2", "b:3" or "k:10001000" for symbols,
/// "r:2->r:4" for transitions, "r:1,r:2->r:4" for second-order rows,
/// "r:4->h:1+3" for divisions and "s:-1" for shifts. Zero entries are
/// omitted. Pattern models list their vocabulary under "patterns".
Json params_to_json(const ModelParams& params);
ModelParams params_from_json(const Json& j);

/// Stores the Bayesian model name next to the base model.
Json hyperparams_to_json(const Hyperparams& hp, const ModelConfig& model);
Hyperparams hyperparams_from_json(const Json& j, ModelConfig* model = nullptr);

struct PerformanceSet {
  std::vector<std::string> ids;
  std::vector<Performance> performances;
  TimingParams timing;  // the timing model the set was drawn from, when known
  bool has_timing = false;
  uint64_t seed = 0;
};

// {"tempo_bpm": .., "sigma_t": .., "seed": .., "performances": [{"id", "onsets"}]}
Json performances_to_json(const PerformanceSet& set);
PerformanceSet performances_from_json(const Json& j);
/// One onset per line after an "onset" header.
std::string performance_to_csv(const Performance& p);
Performance performance_from_csv(const std::string& text);

struct PieceTranscription {
  std::string id;
  bool ok = true;
  std::string failure;
  TranscriptionResult result;
};

Json transcriptions_to_json(const std::string& model, const std::vector<PieceTranscription>& pieces);
std::vector<PieceTranscription> transcriptions_from_json(const Json& j);
/// The transcribed score: first onset at the decoded initial position.
RhythmScore transcription_score(const TranscriptionResult& r, int bar_length);

Json cross_entropy_to_json(const std::string& model, const Corpus& corpus, const CrossEntropyReport& r);
std::string cross_entropy_to_csv(const Corpus& corpus, const CrossEntropyReport& r);

struct ErrorReport {
  std::vector<std::string> ids;
  std::vector<size_t> notes;
  std::vector<size_t> errors;
  size_t total_notes = 0;
  size_t total_errors = 0;
  double error_rate() const;
};

/// Matches transcriptions to ground-truth pieces by id.
ErrorReport compare_transcriptions(const std::vector<PieceTranscription>& estimated, const Corpus& truth);
Json error_report_to_json(const std::string& model, const ErrorReport& r);
std::string error_report_to_csv(const ErrorReport& r);

Json populations_to_json(const EntropyPopulations& p);
/// Columnar "population,value" rows for plotting.
std::string populations_to_csv(const EntropyPopulations& p);

/// `include_timing` controls the wall-clock column, which is not reproducible.
Json benchmark_to_json(const std::vector<BenchmarkEntry>& entries, bool include_timing);
std::string benchmark_to_csv(const std::vector<BenchmarkEntry>& entries, bool include_timing);

}  // namespace rhythm

#endif  // RHYTHM_IO_H_
