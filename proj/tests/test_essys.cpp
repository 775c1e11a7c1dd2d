#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "affiche/error.hpp"
#include "affiche/essys.hpp"
#include "support/fixtures.hpp"
#include "support/smf_reader.hpp"

using namespace affiche;

namespace {

const MusicConfig& music() {
  static const MusicConfig m = fixtures::bundled_config().music;
  return m;
}

std::optional<Emotion> emotion_at(int i) {
  if (i == static_cast<int>(kEmotionCount)) return std::nullopt;
  return kEmotions[static_cast<std::size_t>(i)];
}

int pc(int pitch) { return ((pitch % 12) + 12) % 12; }

bool in(const std::vector<int>& pcs, int pitch) { return std::find(pcs.begin(), pcs.end(), pc(pitch)) != pcs.end(); }

}  // namespace

TEST_CASE("scale pitch classes") {
  ScaleSpec c_major{ScaleRule::Key, 0, Mode::Major};
  CHECK(scale_pitch_classes(c_major, parse_chord("F")) == std::vector<int>{0, 2, 4, 5, 7, 9, 11});
  ScaleSpec e_phrygian{ScaleRule::Key, 4, Mode::Phrygian};
  CHECK(scale_pitch_classes(e_phrygian, parse_chord("Em")) == std::vector<int>{0, 2, 4, 5, 7, 9, 11});
  ScaleSpec d_dorian{ScaleRule::Key, 2, Mode::Dorian};
  CHECK(scale_pitch_classes(d_dorian, parse_chord("Dm")) == std::vector<int>{0, 2, 4, 5, 7, 9, 11});
  ScaleSpec a_harm{ScaleRule::Key, 9, Mode::HarmonicMinor};
  CHECK(scale_pitch_classes(a_harm, parse_chord("E")) == std::vector<int>{0, 2, 4, 5, 8, 9, 11});
  ScaleSpec by_chord{ScaleRule::Chord, 0, Mode::Major};
  CHECK(scale_pitch_classes(by_chord, parse_chord("Am")) == std::vector<int>{0, 2, 4, 5, 7, 9, 11});
  CHECK(scale_pitch_classes(by_chord, parse_chord("G7")) == std::vector<int>{0, 2, 4, 5, 7, 9, 11});
  CHECK(scale_pitch_classes(by_chord, parse_chord("D")) == std::vector<int>{1, 2, 4, 6, 7, 9, 11});
  // Every chord tone sits in its chord-rule scale.
  for (const char* sym : {"C", "Cm", "Cdim", "Caug", "Cmaj7", "Cm7", "C7", "F#m7", "Bbmaj7"}) {
    const Chord ch = parse_chord(sym);
    const auto scale = scale_pitch_classes(by_chord, ch);
    for (int p : ch.pitch_classes()) CHECK_MESSAGE(in(scale, p), sym);
  }
}

TEST_CASE("bars are filled exactly") {
  for (int e = 0; e <= static_cast<int>(kEmotionCount); ++e) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      Rng rng(seed);
      const auto notes = generate(emotion_at(e), 8, rng, music());
      std::array<double, 8> melody{};
      std::array<int, 8> harmony{};
      double cursor = 0.0;
      for (const NoteEvent& n : notes) {
        const int bar = static_cast<int>(std::floor(n.onset / 4.0));
        REQUIRE(bar >= 0);
        REQUIRE(bar < 8);
        CHECK(std::find(kDurations.begin(), kDurations.end(), n.duration) != kDurations.end());
        CHECK(n.onset + n.duration <= 4.0 * (bar + 1) + 1e-12);
        if (n.voice == Voice::Melody) {
          CHECK(n.onset == cursor);  // no gaps, no overlaps
          cursor += n.duration;
          melody[bar] += n.duration;
          CHECK(n.duration <= n.drawn_duration);
        } else {
          CHECK(n.onset == 4.0 * bar);
          CHECK(n.duration == 4.0);
          ++harmony[bar];
        }
      }
      for (int b = 0; b < 8; ++b) {
        CHECK(melody[b] == 4.0);
        CHECK(harmony[b] >= 3);
      }
      CHECK(std::is_sorted(notes.begin(), notes.end(),
                           [](const NoteEvent& a, const NoteEvent& b) { return a.onset < b.onset; }));
    }
  }
}

TEST_CASE("pitches belong to the right sets") {
  for (int e = 0; e <= static_cast<int>(kEmotionCount); ++e) {
    const MusicRow& row = music().row(emotion_at(e));
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      Rng rng(seed);
      for (const NoteEvent& n : generate(emotion_at(e), 8, rng, music())) {
        const int bar = static_cast<int>(n.onset / 4.0);
        const Chord& chord = row.progression[static_cast<std::size_t>(bar) % row.progression.size()];
        const auto chord_pcs = chord.pitch_classes();
        const auto scale = scale_pitch_classes(row.scale, chord);
        if (n.voice == Voice::Harmony) {
          CHECK(in(chord_pcs, n.pitch));
          // voiced upwards from the root in the harmony octave
          const int root = 12 * (row.harmony_octave + 1) + chord.root;
          CHECK(n.pitch >= root);
          CHECK(n.pitch < root + 12);
          CHECK(n.velocity == row.harmony_velocity);
          continue;
        }
        CHECK(n.velocity == row.melody_velocity);
        switch (n.kind) {
          case NoteKind::ScaleNote:
            CHECK(in(scale, n.pitch));
            CHECK(n.pitch >= row.melody_low);
            CHECK(n.pitch <= row.melody_high);
            break;
          case NoteKind::ChordNote:
            CHECK(in(chord_pcs, n.pitch));
            CHECK(n.pitch >= row.melody_low);
            CHECK(n.pitch <= row.melody_high);
            break;
          case NoteKind::Chromatism:
            // A semitone from a scale tone and outside the scale itself.
            CHECK_FALSE(in(scale, n.pitch));
            CHECK((in(scale, n.pitch - 1) || in(scale, n.pitch + 1)));
            CHECK(n.pitch >= row.melody_low - 1);
            CHECK(n.pitch <= row.melody_high + 1);
            break;
        }
      }
    }
  }
}

TEST_CASE("degenerate probability rows") {
  MusicConfig m = music();
  MusicRow& row = m.rows[index_of(Emotion::Joy)];
  row.note_types = {1.0, 0.0, 0.0};
  row.durations = {0.0, 0.0, 1.0, 0.0};
  row.intervals = {{0, 1.0}};
  Rng rng(3);
  const auto notes = generate(Emotion::Joy, 4, rng, m);
  std::set<int> melody_pitches;
  int count = 0;
  for (const NoteEvent& n : notes) {
    if (n.voice != Voice::Melody) continue;
    ++count;
    CHECK(n.kind == NoteKind::ScaleNote);
    CHECK(n.duration == 1.0);
    melody_pitches.insert(n.pitch);
  }
  CHECK(count == 16);
  CHECK(melody_pitches.size() == 1);  // step 0 forever

  row.note_types = {0.0, 0.0, 1.0};
  row.durations = {1.0, 0.0, 0.0, 0.0};
  row.intervals = {{2, 1.0}};
  const auto chrom = generate(Emotion::Joy, 8, rng, m);
  for (const NoteEvent& n : chrom)
    if (n.voice == Voice::Melody) {
      CHECK(n.kind == NoteKind::Chromatism);
      CHECK(n.duration == 4.0);
    }

  row.durations = {0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(generate(Emotion::Joy, 1, rng, m), Error);
}

TEST_CASE("bar count is validated") {
  Rng rng(1);
  for (int bars : {0, -1, -100}) {
    try {
      generate(Emotion::Joy, bars, rng, music());
      FAIL("expected InvalidBarCount");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidBarCount);
    }
  }
  CHECK_FALSE(generate(Emotion::Joy, 1, rng, music()).empty());
}

TEST_CASE("note kinds and durations follow the configured odds") {
  // Drawn durations are compared because bar-end truncation reshapes the
  // played ones.
  for (int e = 0; e <= static_cast<int>(kEmotionCount); ++e) {
    const MusicRow& row = music().row(emotion_at(e));
    std::array<int, 3> kinds{};
    std::array<int, 4> durations{};
    int total = 0;
    Rng rng(100 + e);
    while (total < 50000) {
      for (const NoteEvent& n : generate(emotion_at(e), 64, rng, music())) {
        if (n.voice != Voice::Melody) continue;
        ++kinds[static_cast<std::size_t>(n.kind)];
        const auto d = std::find(kDurations.begin(), kDurations.end(), n.drawn_duration) - kDurations.begin();
        ++durations[static_cast<std::size_t>(d)];
        ++total;
      }
    }
    const double ksum = row.note_types[0] + row.note_types[1] + row.note_types[2];
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(std::abs(kinds[k] / double(total) - row.note_types[k] / ksum) < 0.02);
    double dsum = 0;
    for (double d : row.durations) dsum += d;
    for (std::size_t k = 0; k < 4; ++k)
      CHECK(std::abs(durations[k] / double(total) - row.durations[k] / dsum) < 0.02);
  }
}

TEST_CASE("generation is deterministic for a seed") {
  Rng a(77), b(77), c(78);
  const auto x = generate(Emotion::Sadness, 8, a, music());
  CHECK(x == generate(Emotion::Sadness, 8, b, music()));
  CHECK(x != generate(Emotion::Sadness, 8, c, music()));
}

TEST_CASE("MIDI file layout") {
  MusicRow row = music().row(Emotion::Joy);
  row.tempo_bpm = 120;
  NoteEvent c4;
  c4.onset = 0;
  c4.duration = c4.drawn_duration = 1.0;
  c4.pitch = 60;
  c4.velocity = 90;
  const auto bytes = emit_midi({c4}, row);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "MThd");
  const smf::File f = smf::parse(bytes);
  CHECK(f.format == 1);
  CHECK(f.division == 480);
  REQUIRE(f.tracks.size() == 3);
  REQUIRE(f.tracks[0].tempos.size() == 1);
  CHECK(f.tracks[0].tempos[0] == 500000);
  REQUIRE(f.tracks[0].time_signatures.size() == 1);
  CHECK(f.tracks[0].time_signatures[0] == std::pair{4, 4});
  REQUIRE(f.tracks[1].notes.size() == 1);
  const smf::Note& n = f.tracks[1].notes[0];
  CHECK(n.onset == 0);
  CHECK(n.duration == 480);
  CHECK(n.pitch == 60);
  CHECK(n.velocity == 90);
  CHECK(n.channel == 0);
  CHECK(f.tracks[1].programs == std::vector<std::pair<int, int>>{{0, row.melody_program}});
  CHECK(f.tracks[2].programs == std::vector<std::pair<int, int>>{{1, row.harmony_program}});
  for (const auto& t : f.tracks) CHECK(t.has_end);
}

TEST_CASE("empty event list still makes a valid file") {
  const auto bytes = emit_midi({}, music().neutral);
  const smf::File f = smf::parse(bytes);
  REQUIRE(f.tracks.size() == 3);
  CHECK(f.tracks[1].notes.empty());
  CHECK(f.tracks[2].notes.empty());
  CHECK(f.tracks[0].tempos.at(0) == std::lround(60'000'000.0 / music().neutral.tempo_bpm));
}

TEST_CASE("generated music round-trips through an independent SMF reader") {
  Rng gen(11);
  for (int i = 0; i < 300; ++i) {
    const auto e = emotion_at(static_cast<int>(gen.index(kEmotionCount + 1)));
    const int bars = 1 + static_cast<int>(gen.index(16));
    Rng rng(gen.next());
    const auto events = generate(e, bars, rng, music());
    const MusicRow& row = music().row(e);
    const smf::File f = smf::parse(emit_midi(events, row));
    REQUIRE(f.tracks.size() == 3);
    CHECK(f.tracks[0].tempos.at(0) == std::lround(60'000'000.0 / row.tempo_bpm));
    for (int v = 0; v < 2; ++v) {
      const Voice voice = v == 0 ? Voice::Melody : Voice::Harmony;
      std::vector<smf::Note> want;
      for (const NoteEvent& n : events)
        if (n.voice == voice)
          want.push_back({std::lround(n.onset * 480), std::lround(n.duration * 480), n.pitch, n.velocity, v});
      std::vector<smf::Note> got = f.tracks[static_cast<std::size_t>(v) + 1].notes;
      std::sort(want.begin(), want.end());
      std::sort(got.begin(), got.end());
      CHECK(got == want);
    }
  }
}
