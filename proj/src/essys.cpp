#include "affiche/essys.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "affiche/error.hpp"
#include "affiche/styling.hpp"

namespace affiche {

namespace {

std::vector<int> mode_intervals(Mode m) {
  switch (m) {
    case Mode::Major: return {0, 2, 4, 5, 7, 9, 11};
    case Mode::Minor: return {0, 2, 3, 5, 7, 8, 10};
    case Mode::Dorian: return {0, 2, 3, 5, 7, 9, 10};
    case Mode::Mixolydian: return {0, 2, 4, 5, 7, 9, 10};
    case Mode::Phrygian: return {0, 1, 3, 5, 7, 8, 10};
    case Mode::Lydian: return {0, 2, 4, 6, 7, 9, 11};
    case Mode::HarmonicMinor: return {0, 2, 3, 5, 7, 8, 11};
  }
  return {0, 2, 4, 5, 7, 9, 11};
}

bool contains(const std::vector<int>& pcs, int pitch) {
  return std::find(pcs.begin(), pcs.end(), ((pitch % 12) + 12) % 12) != pcs.end();
}

std::size_t nearest_index(const std::vector<int>& ladder, int pitch) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (std::abs(ladder[i] - pitch) < std::abs(ladder[best] - pitch)) best = i;
  return best;
}

// Largest allowed duration not exceeding `remaining`.
double fit_duration(double d, double remaining) {
  if (d <= remaining) return d;
  for (double allowed : kDurations)
    if (allowed <= remaining) return allowed;
  return remaining;
}

template <std::size_t N>
std::size_t draw(const std::array<double, N>& probabilities, Rng& rng) {
  return roulette_select(probabilities, rng);
}

void put_vlq(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::uint8_t buf[5];
  int n = 0;
  buf[n++] = v & 0x7F;
  while (v >>= 7) buf[n++] = static_cast<std::uint8_t>((v & 0x7F) | 0x80);
  while (n) out.push_back(buf[--n]);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char* tag, const std::vector<std::uint8_t>& body) {
  out.insert(out.end(), tag, tag + 4);
  put_u32(out, static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
}

std::vector<std::uint8_t> voice_track(const std::vector<NoteEvent>& events, Voice voice, int channel, int program,
                                      const std::string& track_name) {
  struct Msg {
    std::uint32_t tick;
    int order;  // note-offs before note-ons at the same tick
    int pitch;
    std::uint8_t status;
    std::uint8_t velocity;
  };
  std::vector<Msg> msgs;
  for (const NoteEvent& e : events) {
    if (e.voice != voice) continue;
    const auto on = static_cast<std::uint32_t>(std::lround(e.onset * kTicksPerQuarter));
    const auto off = static_cast<std::uint32_t>(std::lround((e.onset + e.duration) * kTicksPerQuarter));
    msgs.push_back({on, 1, e.pitch, static_cast<std::uint8_t>(0x90 | channel), static_cast<std::uint8_t>(e.velocity)});
    msgs.push_back({off, 0, e.pitch, static_cast<std::uint8_t>(0x80 | channel), 0});
  }
  std::stable_sort(msgs.begin(), msgs.end(), [](const Msg& a, const Msg& b) {
    if (a.tick != b.tick) return a.tick < b.tick;
    if (a.order != b.order) return a.order < b.order;
    return a.pitch < b.pitch;
  });

  std::vector<std::uint8_t> t;
  put_vlq(t, 0);
  t.insert(t.end(), {0xFF, 0x03});
  put_vlq(t, static_cast<std::uint32_t>(track_name.size()));
  t.insert(t.end(), track_name.begin(), track_name.end());
  put_vlq(t, 0);
  t.push_back(static_cast<std::uint8_t>(0xC0 | channel));
  t.push_back(static_cast<std::uint8_t>(program));
  std::uint32_t now = 0;
  for (const Msg& m : msgs) {
    put_vlq(t, m.tick - now);
    now = m.tick;
    t.push_back(m.status);
    t.push_back(static_cast<std::uint8_t>(m.pitch));
    t.push_back(m.velocity);
  }
  put_vlq(t, 0);
  t.insert(t.end(), {0xFF, 0x2F, 0x00});
  return t;
}

}  // namespace

std::vector<int> scale_pitch_classes(const ScaleSpec& scale, const Chord& chord) {
  int root = scale.tonic;
  std::vector<int> intervals;
  if (scale.rule == ScaleRule::Key) {
    intervals = mode_intervals(scale.mode);
  } else {
    root = chord.root;
    switch (chord.quality) {
      case ChordQuality::Major:
      case ChordQuality::Major7: intervals = mode_intervals(Mode::Major); break;
      case ChordQuality::Dominant7: intervals = mode_intervals(Mode::Mixolydian); break;
      case ChordQuality::Minor: intervals = mode_intervals(Mode::Minor); break;
      case ChordQuality::Minor7: intervals = mode_intervals(Mode::Dorian); break;
      case ChordQuality::Diminished: intervals = {0, 1, 3, 5, 6, 8, 10}; break;
      case ChordQuality::Augmented: intervals = {0, 2, 4, 6, 8, 10}; break;
    }
  }
  std::vector<int> pcs;
  for (int i : intervals) pcs.push_back((root + i) % 12);
  std::sort(pcs.begin(), pcs.end());
  return pcs;
}

std::vector<NoteEvent> generate(std::optional<Emotion> emotion, int bars, Rng& rng, const MusicConfig& config) {
  if (bars <= 0) throw Error(ErrorCode::InvalidBarCount, "bar count must be positive, got " + std::to_string(bars));
  const MusicRow& row = config.row(emotion);
  if (row.progression.empty()) throw Error(ErrorCode::ValidationError, "empty progression", "music");

  std::vector<double> steps;
  std::vector<double> step_weights;
  for (auto [step, p] : row.intervals) {
    steps.push_back(step);
    step_weights.push_back(p);
  }

  std::vector<NoteEvent> events;
  std::optional<std::size_t> prev;
  for (int bar = 0; bar < bars; ++bar) {
    const Chord& chord = row.progression[static_cast<std::size_t>(bar) % row.progression.size()];
    const std::vector<int> chord_pcs = chord.pitch_classes();
    const std::vector<int> scale = scale_pitch_classes(row.scale, chord);
    const double bar_start = 4.0 * bar;

    const int root_pitch = 12 * (row.harmony_octave + 1) + chord.root;
    for (int pc : chord_pcs) {
      NoteEvent h;
      h.onset = bar_start;
      h.duration = h.drawn_duration = 4.0;
      h.pitch = root_pitch + ((pc - chord.root) % 12 + 12) % 12;
      h.velocity = row.harmony_velocity;
      h.voice = Voice::Harmony;
      h.kind = NoteKind::ChordNote;
      events.push_back(h);
    }

    std::vector<int> ladder;
    std::vector<int> chord_tones;
    for (int p = row.melody_low; p <= row.melody_high; ++p) {
      if (contains(scale, p)) ladder.push_back(p);
      if (contains(chord_pcs, p)) chord_tones.push_back(p);
    }
    if (!prev) {
      const int mid = (row.melody_low + row.melody_high) / 2;
      int start = chord_tones.empty() ? mid : chord_tones.front();
      for (int p : chord_tones)
        if (std::abs(p - mid) < std::abs(start - mid)) start = p;
      prev = nearest_index(ladder, start);
    } else {
      prev = std::min(*prev, ladder.size() - 1);
    }

    double remaining = 4.0;
    while (remaining > 0.0) {
      NoteEvent n;
      n.drawn_duration = kDurations[draw(row.durations, rng)];
      n.duration = fit_duration(n.drawn_duration, remaining);
      n.kind = kNoteKinds[draw(row.note_types, rng)];
      const int step = static_cast<int>(steps[roulette_select(step_weights, rng)]);

      auto target = static_cast<long>(*prev) + step;
      const long top = static_cast<long>(ladder.size()) - 1;
      if (target < 0 || target > top) target = static_cast<long>(*prev) - step;
      target = std::clamp(target, 0L, top);
      const int base = ladder[static_cast<std::size_t>(target)];

      switch (n.kind) {
        case NoteKind::ScaleNote:
          n.pitch = base;
          break;
        case NoteKind::ChordNote: {
          int best = chord_tones.front();
          for (int p : chord_tones)
            if (std::abs(p - base) < std::abs(best - base)) best = p;
          n.pitch = best;
          break;
        }
        case NoteKind::Chromatism: {
          std::vector<int> options;
          for (int p : {base - 1, base + 1})
            if (p >= 0 && p <= 127 && !contains(scale, p)) options.push_back(p);
          n.pitch = options.empty() ? base + 1 : options[rng.index(options.size())];
          break;
        }
      }
      prev = n.kind == NoteKind::ScaleNote ? static_cast<std::size_t>(target) : nearest_index(ladder, n.pitch);
      n.onset = bar_start + (4.0 - remaining);
      n.velocity = row.melody_velocity;
      n.voice = Voice::Melody;
      remaining -= n.duration;
      events.push_back(n);
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const NoteEvent& a, const NoteEvent& b) { return a.onset < b.onset; });
  return events;
}

std::vector<std::uint8_t> emit_midi(const std::vector<NoteEvent>& events, const MusicRow& row) {
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> header;
  put_u16(header, 1);
  put_u16(header, 3);
  put_u16(header, kTicksPerQuarter);
  put_chunk(out, "MThd", header);

  std::vector<std::uint8_t> conductor;
  const auto tempo = static_cast<std::uint32_t>(std::lround(60'000'000.0 / row.tempo_bpm));
  put_vlq(conductor, 0);
  conductor.insert(conductor.end(), {0xFF, 0x51, 0x03, static_cast<std::uint8_t>(tempo >> 16),
                                     static_cast<std::uint8_t>(tempo >> 8), static_cast<std::uint8_t>(tempo)});
  put_vlq(conductor, 0);
  conductor.insert(conductor.end(), {0xFF, 0x58, 0x04, 0x04, 0x02, 0x18, 0x08});
  put_vlq(conductor, 0);
  conductor.insert(conductor.end(), {0xFF, 0x2F, 0x00});
  put_chunk(out, "MTrk", conductor);

  put_chunk(out, "MTrk", voice_track(events, Voice::Melody, 0, row.melody_program, "melody"));
  put_chunk(out, "MTrk", voice_track(events, Voice::Harmony, 1, row.harmony_program, "harmony"));
  return out;
}

}  // namespace affiche
