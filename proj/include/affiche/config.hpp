#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "affiche/colour.hpp"
#include "affiche/emotion.hpp"

namespace affiche {

// Background style tags, in the order used for weight rows.
enum class BackgroundStyle { Solid, DiagonallyHalved, SolidDivided, Gradient };
inline constexpr std::size_t kBackgroundStyleCount = 4;
inline constexpr std::array<BackgroundStyle, kBackgroundStyleCount> kBackgroundStyles = {
    BackgroundStyle::Solid, BackgroundStyle::DiagonallyHalved, BackgroundStyle::SolidDivided,
    BackgroundStyle::Gradient};

std::string_view name(BackgroundStyle s);
std::optional<BackgroundStyle> parse_background_style(std::string_view s);

struct WeightedColour {
  Rgb colour;
  double weight = 0.0;
  bool operator==(const WeightedColour&) const = default;
};

struct WeightedTypeface {
  std::string typeface_id;
  double weight = 0.0;
  bool operator==(const WeightedTypeface&) const = default;
};

struct AxisRange {
  double default_value = 0.0;
  double min = 0.0;
  double max = 0.0;
  double step = 0.0;
  bool operator==(const AxisRange&) const = default;
};

inline constexpr const char* kWeightAxis = "wght";
inline constexpr const char* kStretchAxis = "wdth";
inline constexpr double kWeightStep = 10.0;
inline constexpr double kStretchStep = 16.6;

struct SizeDecrement {
  double base = 1.0;
  double per_attempt_slope = 0.25;
  bool operator==(const SizeDecrement&) const = default;
};

struct TypefaceDef {
  std::string id;
  std::string family;                   // CSS family name used in documents
  std::optional<std::string> font_file;  // empty: synthetic metrics
  std::map<std::string, AxisRange> axes;
  double leading_to_size_factor = 0.833;
  SizeDecrement size_decrement;
  double min_row_height = 6.0;

  bool has_variable_axes() const;
  bool operator==(const TypefaceDef&) const = default;
};

struct LineDivision {
  int min_words = 3;
  int max_words = 7;
  int small_word_max_chars = 2;
  bool operator==(const LineDivision&) const = default;
};

struct Layout {
  double horizontal_margin = 0.05;  // fraction of poster width, per side
  int attempt_cap = 1000;
  bool operator==(const Layout&) const = default;
};

enum class BandFractions { Normalized, RawWithRemainder };

enum class NoteKind { ScaleNote, ChordNote, Chromatism };
inline constexpr std::array<NoteKind, 3> kNoteKinds = {NoteKind::ScaleNote, NoteKind::ChordNote,
                                                       NoteKind::Chromatism};
std::string_view name(NoteKind k);

// Durations in beats, whole to eighth.
inline constexpr std::array<double, 4> kDurations = {4.0, 2.0, 1.0, 0.5};
inline constexpr std::array<const char*, 4> kDurationNames = {"whole", "half", "quarter", "eighth"};

enum class ChordQuality { Major, Minor, Diminished, Augmented, Major7, Minor7, Dominant7 };

struct Chord {
  int root = 0;  // pitch class
  ChordQuality quality = ChordQuality::Major;

  std::vector<int> pitch_classes() const;
  bool operator==(const Chord&) const = default;
};

Chord parse_chord(std::string_view symbol);
std::string to_symbol(const Chord& c);

enum class ScaleRule { Key, Chord };
enum class Mode { Major, Minor, Dorian, Mixolydian, Phrygian, Lydian, HarmonicMinor };

struct ScaleSpec {
  ScaleRule rule = ScaleRule::Key;
  int tonic = 0;
  Mode mode = Mode::Major;
  bool operator==(const ScaleSpec&) const = default;
};

struct MusicRow {
  double tempo_bpm = 90.0;
  ScaleSpec scale;
  std::vector<Chord> progression;
  std::array<double, 3> note_types{};  // indexed by NoteKind
  std::array<double, 4> durations{};   // indexed like kDurations
  std::map<int, double> intervals;     // signed scale steps -> probability
  int melody_program = 0;
  int harmony_program = 0;
  int melody_low = 60;
  int melody_high = 84;
  int harmony_octave = 3;  // octave of chord roots, C4 = octave 4
  int melody_velocity = 80;
  int harmony_velocity = 60;

  bool operator==(const MusicRow&) const = default;
};

struct MusicConfig {
  int bars = 8;
  std::array<MusicRow, kEmotionCount> rows{};
  MusicRow neutral;

  const MusicRow& row(std::optional<Emotion> e) const { return e ? rows[index_of(*e)] : neutral; }
  bool operator==(const MusicConfig&) const = default;
};

struct StyleConfig {
  std::array<std::vector<WeightedColour>, kEmotionCount> colour_map;
  std::array<std::vector<WeightedTypeface>, kEmotionCount> typeface_map;
  std::vector<WeightedTypeface> neutral_typefaces;
  std::vector<TypefaceDef> typefaces;
  std::array<std::array<double, kBackgroundStyleCount>, kEmotionCount> background_weights{};
  double white_probability = 0.10;
  double predominance_threshold = 0.30;
  double min_contrast = 3.0;
  BandFractions band_fractions = BandFractions::Normalized;
  LineDivision line_division;
  std::vector<std::string> formats;
  double dpi = 96.0;
  Layout layout;
  MusicConfig music;

  const TypefaceDef* find_typeface(std::string_view id) const;
  bool operator==(const StyleConfig&) const = default;
};

// Parses and validates the given JSON files. Each file is an object whose
// top-level keys are config sections; a section may appear in only one file.
// Throws Error with MissingFile / ParseError / ValidationError; `where()`
// names the offending key path.
StyleConfig load_config(std::span<const std::filesystem::path> paths);

// colours.json + typefaces.json + music.json from a directory.
StyleConfig load_config_dir(const std::filesystem::path& dir);

// Same as load_config, from already-parsed objects.
StyleConfig config_from_json(std::span<const nlohmann::json> documents);

// Single-object serialization accepted by config_from_json.
nlohmann::json to_json(const StyleConfig& config);

inline constexpr const char* kConfigDirEnv = "AFFICHE_CONFIG_DIR";

}  // namespace affiche
