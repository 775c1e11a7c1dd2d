#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "affiche/config.hpp"
#include "affiche/emotion.hpp"
#include "affiche/rng.hpp"

namespace affiche {

enum class Voice { Melody, Harmony };

struct NoteEvent {
  double onset = 0.0;     // beats
  double duration = 0.0;  // beats, one of kDurations
  int pitch = 60;
  int velocity = 80;
  Voice voice = Voice::Melody;
  NoteKind kind = NoteKind::ScaleNote;
  // Duration drawn before the bar-end truncation; equals `duration` unless
  // the note was cut to fit the bar.
  double drawn_duration = 0.0;

  bool operator==(const NoteEvent&) const = default;
};

// Pitch classes of the melodic scale active under `chord`.
std::vector<int> scale_pitch_classes(const ScaleSpec& scale, const Chord& chord);

// Melody and harmony for `bars` bars of 4/4, sorted by onset. `emotion`
// empty selects the neutral row. Throws Error(InvalidBarCount).
std::vector<NoteEvent> generate(std::optional<Emotion> emotion, int bars, Rng& rng,
                                const MusicConfig& config);

inline constexpr int kTicksPerQuarter = 480;

// Standard MIDI File, format 1: a conductor track (tempo, 4/4) then one track
// per voice (melody on channel 0, harmony on channel 1).
std::vector<std::uint8_t> emit_midi(const std::vector<NoteEvent>& events, const MusicRow& row);

}  // namespace affiche
