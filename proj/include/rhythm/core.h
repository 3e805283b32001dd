// Rhythm representations: onset score times, metrical positions, note values,
// and per-bar note patterns, plus corpus normalization onto a 16th-note grid.

#ifndef RHYTHM_CORE_H_
#define RHYTHM_CORE_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rhythm {

constexpr int kDefaultBarLength = 8;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Note value between two metrical positions, wrapping at the bar line.
/// Equal positions give a full bar.
int interval(int b_prev, int b, int bar_length);

/// Quantized rhythm of one piece. Onsets are absolute score times in
/// 16th-note units; N+1 onsets define N note values, each in [1, bar_length].
class RhythmScore {
 public:
  RhythmScore(std::vector<int> onsets, int bar_length = kDefaultBarLength);

  /// Rebuilds a score from its first onset and note values.
  static RhythmScore FromNoteValues(int first_onset, std::span<const int> note_values,
                                    int bar_length = kDefaultBarLength);

  const std::vector<int>& onsets() const { return onsets_; }
  int bar_length() const { return bar_length_; }
  int note_count() const { return static_cast<int>(onsets_.size()) - 1; }

  bool operator==(const RhythmScore&) const = default;

 private:
  std::vector<int> onsets_;
  int bar_length_;
};

std::vector<int> to_metrical(const RhythmScore& score);
std::vector<int> to_note_values(const RhythmScore& score);

/// One bar's onsets as sorted metrical positions. A nonzero first position
/// marks a tied first note.
class NotePattern {
 public:
  NotePattern() = default;
  NotePattern(std::vector<int> positions, int bar_length = kDefaultBarLength);

  /// Pattern from a bit mask where position b is bit (bar_length - 1 - b).
  static NotePattern FromMask(uint32_t mask, int bar_length);

  const std::vector<int>& positions() const { return positions_; }
  int note_count() const { return static_cast<int>(positions_.size()); }
  int bar_length() const { return bar_length_; }
  int front() const { return positions_.front(); }
  int back() const { return positions_.back(); }
  uint32_t mask() const;
  /// Binary-vector label, e.g. "10001000" for (0,4) with bar length 8.
  std::string label() const;
  static NotePattern FromLabel(const std::string& label);

  bool operator==(const NotePattern&) const = default;

 private:
  std::vector<int> positions_;
  int bar_length_ = kDefaultBarLength;
};

/// Patterns for every bar spanned by the score. Bar m holds the positions of
/// all onsets (including the final one) with floor(tau / bar_length) == m.
std::vector<NotePattern> segment_patterns(const RhythmScore& score);

/// Inverse of segment_patterns: concatenates patterns starting at the bar of
/// `first_bar`.
RhythmScore join_patterns(std::span<const NotePattern> patterns, int first_bar = 0);

struct Corpus {
  int bar_length = kDefaultBarLength;
  std::vector<std::string> ids;
  std::vector<RhythmScore> pieces;

  size_t size() const { return pieces.size(); }
  bool empty() const { return pieces.empty(); }
  void add(std::string id, RhythmScore score);
  size_t total_notes() const;
};

/// Unnormalized input piece: integer onsets at an arbitrary tick resolution.
struct RawPiece {
  std::string id;
  std::string meter = "4/4";
  int ticks_per_quarter = 4;
  std::vector<int64_t> onsets;
};

struct NormalizeOptions {
  int bar_length = kDefaultBarLength;
  std::string meter = "4/4";
  /// Keeps empty interior segments and fills each with an onset at its start
  /// instead of removing them.
  bool keep_empty_segments = false;
};

struct DropRecord {
  std::string id;
  std::string reason;
};

struct NormalizeStats {
  size_t pieces_in = 0;
  size_t pieces_out = 0;
  size_t merged_onsets = 0;
  size_t removed_segments = 0;
  size_t inserted_onsets = 0;
};

struct NormalizeResult {
  Corpus corpus;
  std::vector<DropRecord> dropped;
  NormalizeStats stats;
};

/// Snaps onsets to the 16th grid (nearest, merging collisions), drops
/// segments without onsets, and inserts an onset at the start of a segment
/// whenever the gap from the previous onset exceeds the bar length.
NormalizeResult normalize_corpus(std::span<const RawPiece> raw,
                                 const NormalizeOptions& options = {});

}  // namespace rhythm

#endif  // RHYTHM_CORE_H_
