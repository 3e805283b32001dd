// Rhythm representations and corpus normalization.

#include "rhythm/core.h"

#include <algorithm>
#include <numeric>

namespace rhythm {

int interval(int b_prev, int b, int bar_length) {
  return b_prev < b ? b - b_prev : b - b_prev + bar_length;
}

RhythmScore::RhythmScore(std::vector<int> onsets, int bar_length)
    : onsets_(std::move(onsets)), bar_length_(bar_length) {
  if (bar_length_ < 1) throw Error("bar length must be positive");
  if (onsets_.size() < 2) throw Error("a score needs at least two onsets (one note)");
  if (onsets_.front() < 0) throw Error("onsets must be non-negative");
  for (size_t n = 1; n < onsets_.size(); ++n) {
    const int r = onsets_[n] - onsets_[n - 1];
    if (r < 1 || r > bar_length_) {
      throw Error("note value " + std::to_string(r) + " at note " + std::to_string(n) +
                  " outside [1, " + std::to_string(bar_length_) + "]");
    }
  }
}

RhythmScore RhythmScore::FromNoteValues(int first_onset, std::span<const int> note_values,
                                        int bar_length) {
  std::vector<int> onsets{first_onset};
  onsets.reserve(note_values.size() + 1);
  for (int r : note_values) onsets.push_back(onsets.back() + r);
  return RhythmScore(std::move(onsets), bar_length);
}

std::vector<int> to_metrical(const RhythmScore& score) {
  std::vector<int> b;
  b.reserve(score.onsets().size());
  for (int tau : score.onsets()) b.push_back(tau % score.bar_length());
  return b;
}

std::vector<int> to_note_values(const RhythmScore& score) {
  const auto& tau = score.onsets();
  std::vector<int> r;
  r.reserve(tau.size() - 1);
  for (size_t n = 1; n < tau.size(); ++n) r.push_back(tau[n] - tau[n - 1]);
  return r;
}

NotePattern::NotePattern(std::vector<int> positions, int bar_length)
    : positions_(std::move(positions)), bar_length_(bar_length) {
  if (positions_.empty()) throw Error("note pattern must be nonempty");
  for (size_t i = 0; i < positions_.size(); ++i) {
    if (positions_[i] < 0 || positions_[i] >= bar_length_) {
      throw Error("pattern position out of range");
    }
    if (i > 0 && positions_[i] <= positions_[i - 1]) {
      throw Error("pattern positions must be strictly increasing");
    }
  }
}

NotePattern NotePattern::FromMask(uint32_t mask, int bar_length) {
  std::vector<int> positions;
  for (int b = 0; b < bar_length; ++b) {
    if (mask & (1u << (bar_length - 1 - b))) positions.push_back(b);
  }
  return NotePattern(std::move(positions), bar_length);
}

uint32_t NotePattern::mask() const {
  uint32_t m = 0;
  for (int b : positions_) m |= 1u << (bar_length_ - 1 - b);
  return m;
}

std::string NotePattern::label() const {
  std::string s(bar_length_, '0');
  for (int b : positions_) s[b] = '1';
  return s;
}

NotePattern NotePattern::FromLabel(const std::string& label) {
  std::vector<int> positions;
  for (size_t b = 0; b < label.size(); ++b) {
    if (label[b] == '1') {
      positions.push_back(static_cast<int>(b));
    } else if (label[b] != '0') {
      throw Error("bad pattern label '" + label + "'");
    }
  }
  return NotePattern(std::move(positions), static_cast<int>(label.size()));
}

std::vector<NotePattern> segment_patterns(const RhythmScore& score) {
  const int nb = score.bar_length();
  std::vector<NotePattern> patterns;
  std::vector<int> current;
  int bar = score.onsets().front() / nb;
  for (int tau : score.onsets()) {
    if (tau / nb != bar) {
      patterns.emplace_back(std::move(current), nb);
      current.clear();
      bar = tau / nb;
    }
    current.push_back(tau % nb);
  }
  patterns.emplace_back(std::move(current), nb);
  return patterns;
}

RhythmScore join_patterns(std::span<const NotePattern> patterns, int first_bar) {
  if (patterns.empty()) throw Error("no patterns to join");
  const int nb = patterns.front().bar_length();
  std::vector<int> onsets;
  for (size_t m = 0; m < patterns.size(); ++m) {
    const int offset = (first_bar + static_cast<int>(m)) * nb;
    for (int b : patterns[m].positions()) onsets.push_back(offset + b);
  }
  return RhythmScore(std::move(onsets), nb);
}

void Corpus::add(std::string id, RhythmScore score) {
  if (score.bar_length() != bar_length) throw Error("piece bar length differs from corpus");
  ids.push_back(std::move(id));
  pieces.push_back(std::move(score));
}

size_t Corpus::total_notes() const {
  return std::accumulate(pieces.begin(), pieces.end(), size_t{0},
                         [](size_t acc, const RhythmScore& s) { return acc + s.note_count(); });
}

namespace {

// Nearest 16th for a non-negative tick count; halves round up.
int64_t snap_to_sixteenth(int64_t ticks, int ticks_per_quarter) {
  const int64_t num = 2 * ticks * 4 + ticks_per_quarter;
  return num / (2 * static_cast<int64_t>(ticks_per_quarter));
}

}  // namespace

NormalizeResult normalize_corpus(std::span<const RawPiece> raw, const NormalizeOptions& options) {
  const int nb = options.bar_length;
  if (nb < 1) throw Error("bar length must be positive");
  NormalizeResult result;
  result.corpus.bar_length = nb;
  result.stats.pieces_in = raw.size();

  for (const RawPiece& piece : raw) {
    if (piece.meter != options.meter) {
      result.dropped.push_back({piece.id, "meter " + piece.meter + " is not " + options.meter});
      continue;
    }
    if (piece.ticks_per_quarter <= 0) {
      result.dropped.push_back({piece.id, "non-positive ticks_per_quarter"});
      continue;
    }
    if (std::any_of(piece.onsets.begin(), piece.onsets.end(), [](int64_t t) { return t < 0; })) {
      result.dropped.push_back({piece.id, "negative onset"});
      continue;
    }

    std::vector<int64_t> grid;
    grid.reserve(piece.onsets.size());
    for (int64_t t : piece.onsets) grid.push_back(snap_to_sixteenth(t, piece.ticks_per_quarter));
    std::sort(grid.begin(), grid.end());
    const auto last = std::unique(grid.begin(), grid.end());
    result.stats.merged_onsets += static_cast<size_t>(grid.end() - last);
    grid.erase(last, grid.end());
    if (grid.empty()) {
      result.dropped.push_back({piece.id, "no onsets"});
      continue;
    }

    // Segment remapping: leading silence always goes; interior empty
    // segments go unless the caller asks to keep them.
    std::vector<int64_t> remapped;
    remapped.reserve(grid.size());
    const int64_t first_segment = grid.front() / nb;
    int64_t previous_segment = first_segment;
    int64_t new_segment = 0;
    result.stats.removed_segments += static_cast<size_t>(first_segment);
    for (int64_t t : grid) {
      const int64_t segment = t / nb;
      if (segment != previous_segment) {
        const int64_t skipped = segment - previous_segment - 1;
        if (options.keep_empty_segments) {
          new_segment += segment - previous_segment;
        } else {
          new_segment += 1;
          result.stats.removed_segments += static_cast<size_t>(skipped);
        }
        previous_segment = segment;
      }
      remapped.push_back(new_segment * nb + t % nb);
    }

    std::vector<int> onsets;
    onsets.reserve(remapped.size());
    onsets.push_back(static_cast<int>(remapped.front()));
    for (size_t n = 1; n < remapped.size(); ++n) {
      const int64_t a = onsets.back();
      const int64_t c = remapped[n];
      if (c - a > nb) {
        for (int64_t start = (a / nb + 1) * nb; start < c; start += nb) {
          onsets.push_back(static_cast<int>(start));
          ++result.stats.inserted_onsets;
        }
      }
      onsets.push_back(static_cast<int>(c));
    }

    if (onsets.size() < 2) {
      result.dropped.push_back({piece.id, "fewer than two onsets"});
      continue;
    }
    result.corpus.add(piece.id, RhythmScore(std::move(onsets), nb));
  }
  result.stats.pieces_out = result.corpus.size();
  return result;
}

}  // namespace rhythm
