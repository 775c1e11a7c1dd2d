#include "affiche/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "affiche/error.hpp"
#include "affiche/styling.hpp"

namespace affiche {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& reason) {
  throw Error(ErrorCode::ValidationError, reason, path);
}

// Strict object view: every key must be consumed or declared optional, and
// anything left over is reported as unknown.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& get(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) invalid(at(key), "missing required key");
    return j_.at(key);
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  double number(const std::string& key) { return as_number(get(key), at(key)); }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    return v ? as_number(*v, at(key)) : fallback;
  }

  int integer(const std::string& key, int fallback) {
    const json* v = find(key);
    return v ? as_int(*v, at(key)) : fallback;
  }

  std::string string(const std::string& key) { return as_string(get(key), at(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) invalid(at(it.key()), "unknown key");
  }

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) invalid(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) invalid(path, "expected a finite number");
    return d;
  }
  static int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) invalid(path, "expected an integer");
    return v.get<int>();
  }
  static std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) invalid(path, "expected a string");
    return v.get<std::string>();
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double non_negative_weight(const json& v, const std::string& path) {
  const double w = Obj::as_number(v, path);
  if (w < 0.0) invalid(path, "weight must be >= 0");
  return w;
}

void require_emotion_keys(const json& j, const std::string& path, bool allow_neutral) {
  if (!j.is_object()) invalid(path, "expected an object keyed by emotion");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (allow_neutral && it.key() == "neutral") continue;
    if (!parse_emotion(it.key())) invalid(path + "." + it.key(), "not one of the eight emotions");
  }
  for (Emotion e : kEmotions)
    if (!j.contains(std::string(name(e)))) invalid(path + "." + std::string(name(e)), "missing emotion row");
  if (allow_neutral && !j.contains("neutral")) invalid(path + ".neutral", "missing neutral row");
}

template <class T, class F>
void require_positive(const std::vector<T>& row, F weight_of, const std::string& path) {
  if (row.empty()) invalid(path, "row is empty");
  if (std::none_of(row.begin(), row.end(), [&](const T& t) { return weight_of(t) > 0.0; }))
    invalid(path, "row has no positive weight");
}

std::vector<WeightedColour> parse_colour_row(const json& j, const std::string& path) {
  if (!j.is_array()) invalid(path, "expected an array");
  std::vector<WeightedColour> row;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Obj o(j[i], path + "[" + std::to_string(i) + "]");
    WeightedColour wc;
    const std::string hex = o.string("colour");
    try {
      wc.colour = parse_hex(hex);
    } catch (const Error& e) {
      invalid(o.at("colour"), e.what());
    }
    wc.weight = non_negative_weight(o.get("weight"), o.at("weight"));
    o.finish();
    row.push_back(wc);
  }
  require_positive(row, [](const WeightedColour& c) { return c.weight; }, path);
  return row;
}

std::vector<WeightedTypeface> parse_typeface_row(const json& j, const std::string& path) {
  if (!j.is_array()) invalid(path, "expected an array");
  std::vector<WeightedTypeface> row;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Obj o(j[i], path + "[" + std::to_string(i) + "]");
    WeightedTypeface wt;
    wt.typeface_id = o.string("typeface");
    wt.weight = non_negative_weight(o.get("weight"), o.at("weight"));
    o.finish();
    row.push_back(wt);
  }
  require_positive(row, [](const WeightedTypeface& t) { return t.weight; }, path);
  return row;
}

TypefaceDef parse_typeface(const json& j, const std::string& path) {
  Obj o(j, path);
  TypefaceDef t;
  t.id = o.string("id");
  t.family = o.has("family") ? o.string("family") : t.id;
  if (const json* src = o.find("source")) {
    Obj s(*src, o.at("source"));
    const json* file = s.find("file");
    const json* synthetic = s.find("synthetic");
    s.finish();
    if (file && synthetic) invalid(s.path(), "give either file or synthetic, not both");
    if (file) t.font_file = Obj::as_string(*file, s.at("file"));
    if (synthetic && !synthetic->is_boolean()) invalid(s.at("synthetic"), "expected a boolean");
  }
  if (const json* axes = o.find("axes")) {
    if (!axes->is_object()) invalid(o.at("axes"), "expected an object");
    for (auto it = axes->begin(); it != axes->end(); ++it) {
      Obj a(it.value(), o.at("axes") + "." + it.key());
      AxisRange r;
      r.default_value = a.number("default");
      r.min = a.number("min");
      r.max = a.number("max");
      double fallback_step = 0.0;
      if (it.key() == kWeightAxis) fallback_step = kWeightStep;
      if (it.key() == kStretchAxis) fallback_step = kStretchStep;
      r.step = fallback_step > 0.0 ? a.number("step", fallback_step) : a.number("step");
      a.finish();
      if (!(r.min <= r.default_value && r.default_value <= r.max))
        invalid(a.path(), "requires min <= default <= max");
      if (r.step <= 0.0) invalid(a.at("step"), "step must be > 0");
      if (it.key() == kWeightAxis && (r.min < 100.0 || r.max > 950.0))
        invalid(a.path(), "weight axis must lie within [100, 950]");
      if (it.key() == kStretchAxis && (r.min < 50.0 || r.max > 200.0))
        invalid(a.path(), "stretch axis must lie within [50, 200]");
      t.axes.emplace(it.key(), r);
    }
  }
  t.leading_to_size_factor = o.number("leading_to_size_factor", t.leading_to_size_factor);
  if (t.leading_to_size_factor <= 0.0) invalid(o.at("leading_to_size_factor"), "must be > 0");
  if (const json* d = o.find("size_decrement")) {
    Obj s(*d, o.at("size_decrement"));
    t.size_decrement.base = s.number("base", t.size_decrement.base);
    t.size_decrement.per_attempt_slope = s.number("per_attempt_slope", t.size_decrement.per_attempt_slope);
    s.finish();
    if (t.size_decrement.base <= 0.0) invalid(s.at("base"), "must be > 0");
    if (t.size_decrement.per_attempt_slope < 0.0) invalid(s.at("per_attempt_slope"), "must be >= 0");
  }
  t.min_row_height = o.number("min_row_height", t.min_row_height);
  if (t.min_row_height <= 0.0) invalid(o.at("min_row_height"), "must be > 0");
  o.finish();
  return t;
}

template <std::size_t N>
std::array<double, N> parse_distribution(const json& j, const std::string& path,
                                         const std::array<std::string_view, N>& names) {
  Obj o(j, path);
  std::array<double, N> p{};
  for (std::size_t i = 0; i < N; ++i) {
    const std::string key(names[i]);
    p[i] = o.has(key) ? non_negative_weight(o.get(key), o.at(key)) : (o.find(key), 0.0);
  }
  o.finish();
  double sum = 0.0;
  for (double v : p) sum += v;
  if (std::abs(sum - 1.0) > 1e-9) invalid(path, "probabilities must sum to 1");
  return p;
}

int parse_pitch_class(std::string_view s, const std::string& path) {
  static constexpr std::array<int, 7> base = {9, 11, 0, 2, 4, 5, 7};  // A..G
  if (s.empty() || s[0] < 'A' || s[0] > 'G') invalid(path, "expected a note name");
  int pc = base[s[0] - 'A'];
  for (char c : s.substr(1)) {
    if (c == '#') ++pc;
    else if (c == 'b') --pc;
    else invalid(path, "expected a note name");
  }
  return ((pc % 12) + 12) % 12;
}

constexpr std::array<std::string_view, 12> kPitchNames = {"C",  "C#", "D",  "Eb", "E",  "F",
                                                          "F#", "G",  "Ab", "A",  "Bb", "B"};

constexpr std::array<std::pair<Mode, std::string_view>, 7> kModeNames = {{
    {Mode::Major, "major"},
    {Mode::Minor, "minor"},
    {Mode::Dorian, "dorian"},
    {Mode::Mixolydian, "mixolydian"},
    {Mode::Phrygian, "phrygian"},
    {Mode::Lydian, "lydian"},
    {Mode::HarmonicMinor, "harmonic_minor"},
}};

MusicRow parse_music_row(const json& j, const std::string& path) {
  Obj o(j, path);
  MusicRow r;
  r.tempo_bpm = o.number("tempo_bpm");
  if (r.tempo_bpm <= 0.0) invalid(o.at("tempo_bpm"), "must be > 0");
  {
    Obj s(o.get("scale"), o.at("scale"));
    const std::string rule = s.string("rule");
    if (rule == "key") {
      r.scale.rule = ScaleRule::Key;
      r.scale.tonic = parse_pitch_class(s.string("tonic"), s.at("tonic"));
      const std::string mode = s.string("mode");
      auto it = std::find_if(kModeNames.begin(), kModeNames.end(),
                             [&](const auto& m) { return m.second == mode; });
      if (it == kModeNames.end()) invalid(s.at("mode"), "unknown mode");
      r.scale.mode = it->first;
    } else if (rule == "chord") {
      r.scale.rule = ScaleRule::Chord;
    } else {
      invalid(s.at("rule"), "expected \"key\" or \"chord\"");
    }
    s.finish();
  }
  const json& prog = o.get("progression");
  if (!prog.is_array() || prog.empty()) invalid(o.at("progression"), "expected a non-empty array");
  for (std::size_t i = 0; i < prog.size(); ++i) {
    const std::string p = o.at("progression") + "[" + std::to_string(i) + "]";
    try {
      r.progression.push_back(parse_chord(Obj::as_string(prog[i], p)));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ValidationError) throw;
      invalid(p, e.what());
    }
  }
  r.note_types = parse_distribution<3>(o.get("note_types"), o.at("note_types"),
                                       {"scale_note", "chord_note", "chromatism"});
  r.durations = parse_distribution<4>(o.get("durations"), o.at("durations"),
                                      {"whole", "half", "quarter", "eighth"});
  {
    const json& iv = o.get("intervals");
    if (!iv.is_object() || iv.empty()) invalid(o.at("intervals"), "expected a non-empty object");
    double sum = 0.0;
    for (auto it = iv.begin(); it != iv.end(); ++it) {
      const std::string p = o.at("intervals") + "." + it.key();
      int step = 0;
      std::size_t used = 0;
      try {
        step = std::stoi(it.key(), &used);
      } catch (const std::exception&) {
        invalid(p, "interval keys are signed integers");
      }
      if (used != it.key().size()) invalid(p, "interval keys are signed integers");
      const double w = non_negative_weight(it.value(), p);
      r.intervals[step] = w;
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) invalid(o.at("intervals"), "probabilities must sum to 1");
  }
  {
    Obj p(o.get("programs"), o.at("programs"));
    r.melody_program = p.integer("melody", 0);
    r.harmony_program = p.integer("harmony", 0);
    p.finish();
    for (int prog_no : {r.melody_program, r.harmony_program})
      if (prog_no < 0 || prog_no > 127) invalid(p.path(), "program numbers are 0-127");
  }
  if (const json* range = o.find("melody_range")) {
    if (!range->is_array() || range->size() != 2) invalid(o.at("melody_range"), "expected [low, high]");
    r.melody_low = Obj::as_int((*range)[0], o.at("melody_range"));
    r.melody_high = Obj::as_int((*range)[1], o.at("melody_range"));
  }
  if (r.melody_low < 1 || r.melody_high > 126 || r.melody_high - r.melody_low < 12)
    invalid(o.at("melody_range"), "needs at least an octave within 1-126");
  r.harmony_octave = o.integer("harmony_octave", r.harmony_octave);
  if (r.harmony_octave < 0 || r.harmony_octave > 8) invalid(o.at("harmony_octave"), "must be 0-8");
  if (const json* v = o.find("velocity")) {
    Obj vo(*v, o.at("velocity"));
    r.melody_velocity = vo.integer("melody", r.melody_velocity);
    r.harmony_velocity = vo.integer("harmony", r.harmony_velocity);
    vo.finish();
    for (int vel : {r.melody_velocity, r.harmony_velocity})
      if (vel < 1 || vel > 127) invalid(vo.path(), "velocities are 1-127");
  }
  o.finish();
  return r;
}

json music_row_to_json(const MusicRow& r) {
  json j;
  j["tempo_bpm"] = r.tempo_bpm;
  if (r.scale.rule == ScaleRule::Key) {
    auto it = std::find_if(kModeNames.begin(), kModeNames.end(),
                           [&](const auto& m) { return m.first == r.scale.mode; });
    j["scale"] = {{"rule", "key"}, {"tonic", kPitchNames[r.scale.tonic]}, {"mode", it->second}};
  } else {
    j["scale"] = {{"rule", "chord"}};
  }
  json prog = json::array();
  for (const Chord& c : r.progression) prog.push_back(to_symbol(c));
  j["progression"] = prog;
  j["note_types"] = {{"scale_note", r.note_types[0]}, {"chord_note", r.note_types[1]},
                     {"chromatism", r.note_types[2]}};
  j["durations"] = {{"whole", r.durations[0]}, {"half", r.durations[1]},
                    {"quarter", r.durations[2]}, {"eighth", r.durations[3]}};
  json iv = json::object();
  for (auto [step, p] : r.intervals) iv[std::to_string(step)] = p;
  j["intervals"] = iv;
  j["programs"] = {{"melody", r.melody_program}, {"harmony", r.harmony_program}};
  j["melody_range"] = {r.melody_low, r.melody_high};
  j["harmony_octave"] = r.harmony_octave;
  j["velocity"] = {{"melody", r.melody_velocity}, {"harmony", r.harmony_velocity}};
  return j;
}

const std::set<std::string>& known_sections() {
  static const std::set<std::string> sections = {
      "white_probability", "predominance_threshold", "legibility", "band_fractions",
      "colour_map",        "background_weights",     "typefaces",  "typeface_map",
      "formats",           "line_division",          "layout",     "music"};
  return sections;
}

}  // namespace

std::string_view name(BackgroundStyle s) {
  switch (s) {
    case BackgroundStyle::Solid: return "solid";
    case BackgroundStyle::DiagonallyHalved: return "diagonally_halved";
    case BackgroundStyle::SolidDivided: return "solid_divided";
    case BackgroundStyle::Gradient: return "gradient";
  }
  return "";
}

std::optional<BackgroundStyle> parse_background_style(std::string_view s) {
  for (BackgroundStyle b : kBackgroundStyles)
    if (name(b) == s) return b;
  return std::nullopt;
}

std::string_view name(NoteKind k) {
  switch (k) {
    case NoteKind::ScaleNote: return "scale_note";
    case NoteKind::ChordNote: return "chord_note";
    case NoteKind::Chromatism: return "chromatism";
  }
  return "";
}

std::vector<int> Chord::pitch_classes() const {
  std::vector<int> intervals;
  switch (quality) {
    case ChordQuality::Major: intervals = {0, 4, 7}; break;
    case ChordQuality::Minor: intervals = {0, 3, 7}; break;
    case ChordQuality::Diminished: intervals = {0, 3, 6}; break;
    case ChordQuality::Augmented: intervals = {0, 4, 8}; break;
    case ChordQuality::Major7: intervals = {0, 4, 7, 11}; break;
    case ChordQuality::Minor7: intervals = {0, 3, 7, 10}; break;
    case ChordQuality::Dominant7: intervals = {0, 4, 7, 10}; break;
  }
  for (int& i : intervals) i = (root + i) % 12;
  return intervals;
}

namespace {
constexpr std::array<std::pair<ChordQuality, std::string_view>, 7> kQualitySuffix = {{
    {ChordQuality::Major7, "maj7"},
    {ChordQuality::Minor7, "m7"},
    {ChordQuality::Dominant7, "7"},
    {ChordQuality::Diminished, "dim"},
    {ChordQuality::Augmented, "aug"},
    {ChordQuality::Minor, "m"},
    {ChordQuality::Major, ""},
}};
}

Chord parse_chord(std::string_view symbol) {
  std::size_t n = symbol.empty() ? 0 : 1;
  while (n < symbol.size() && (symbol[n] == '#' || symbol[n] == 'b')) ++n;
  Chord c;
  c.root = parse_pitch_class(symbol.substr(0, n), "chord '" + std::string(symbol) + "'");
  const std::string_view suffix = symbol.substr(n);
  for (auto [q, s] : kQualitySuffix) {
    if (suffix == s) {
      c.quality = q;
      return c;
    }
  }
  throw Error(ErrorCode::ValidationError, "unknown chord quality in '" + std::string(symbol) + "'");
}

std::string to_symbol(const Chord& c) {
  std::string out(kPitchNames[c.root]);
  for (auto [q, s] : kQualitySuffix)
    if (q == c.quality) out += s;
  return out;
}

bool TypefaceDef::has_variable_axes() const {
  return std::any_of(axes.begin(), axes.end(), [](const auto& kv) { return kv.second.max > kv.second.min; });
}

const TypefaceDef* StyleConfig::find_typeface(std::string_view id) const {
  for (const TypefaceDef& t : typefaces)
    if (t.id == id) return &t;
  return nullptr;
}

StyleConfig config_from_json(std::span<const json> documents) {
  json merged = json::object();
  for (std::size_t d = 0; d < documents.size(); ++d) {
    if (!documents[d].is_object()) invalid("", "config document " + std::to_string(d) + " is not an object");
    for (auto it = documents[d].begin(); it != documents[d].end(); ++it) {
      if (!known_sections().count(it.key())) invalid(it.key(), "unknown key");
      if (merged.contains(it.key())) invalid(it.key(), "section defined in more than one file");
      merged[it.key()] = it.value();
    }
  }

  Obj root(merged, "");
  StyleConfig c;

  c.white_probability = root.number("white_probability", 0.10);
  if (c.white_probability < 0.0 || c.white_probability > 1.0)
    invalid("white_probability", "must lie in [0, 1]");
  c.predominance_threshold = root.number("predominance_threshold", 0.30);
  if (c.predominance_threshold < 0.0 || c.predominance_threshold > 1.0)
    invalid("predominance_threshold", "must lie in [0, 1]");
  if (const json* leg = root.find("legibility")) {
    Obj l(*leg, "legibility");
    c.min_contrast = l.number("min_contrast", c.min_contrast);
    l.finish();
    if (c.min_contrast < 1.0 || c.min_contrast > 21.0) invalid("legibility.min_contrast", "must lie in [1, 21]");
  }
  if (const json* bf = root.find("band_fractions")) {
    const std::string mode = Obj::as_string(*bf, "band_fractions");
    if (mode == "normalized") c.band_fractions = BandFractions::Normalized;
    else if (mode == "raw_with_remainder") c.band_fractions = BandFractions::RawWithRemainder;
    else invalid("band_fractions", "expected \"normalized\" or \"raw_with_remainder\"");
  }

  {
    const json& cm = root.get("colour_map");
    require_emotion_keys(cm, "colour_map", false);
    for (Emotion e : kEmotions) {
      const std::string key(name(e));
      c.colour_map[index_of(e)] = parse_colour_row(cm.at(key), "colour_map." + key);
    }
  }
  {
    const json& bw = root.get("background_weights");
    require_emotion_keys(bw, "background_weights", false);
    for (Emotion e : kEmotions) {
      const std::string key(name(e));
      Obj row(bw.at(key), "background_weights." + key);
      auto& weights = c.background_weights[index_of(e)];
      for (BackgroundStyle s : kBackgroundStyles) {
        const std::string sk(name(s));
        weights[static_cast<std::size_t>(s)] =
            row.has(sk) ? non_negative_weight(row.get(sk), row.at(sk)) : (row.find(sk), 0.0);
      }
      row.finish();
      double usable = 0.0;
      for (BackgroundStyle s : kBackgroundStyles)
        if (s != BackgroundStyle::SolidDivided) usable += weights[static_cast<std::size_t>(s)];
      if (usable <= 0.0) invalid(row.path(), "needs a positive weight for a style usable with one emotion");
    }
  }
  {
    const json& tfs = root.get("typefaces");
    if (!tfs.is_array() || tfs.empty()) invalid("typefaces", "expected a non-empty array");
    for (std::size_t i = 0; i < tfs.size(); ++i) {
      TypefaceDef t = parse_typeface(tfs[i], "typefaces[" + std::to_string(i) + "]");
      if (c.find_typeface(t.id)) invalid("typefaces[" + std::to_string(i) + "].id", "duplicate typeface id");
      c.typefaces.push_back(std::move(t));
    }
  }
  {
    const json& tm = root.get("typeface_map");
    require_emotion_keys(tm, "typeface_map", true);
    auto check_ids = [&](const std::vector<WeightedTypeface>& row, const std::string& path) {
      for (std::size_t i = 0; i < row.size(); ++i)
        if (!c.find_typeface(row[i].typeface_id))
          invalid(path + "[" + std::to_string(i) + "].typeface", "unknown typeface '" + row[i].typeface_id + "'");
    };
    for (Emotion e : kEmotions) {
      const std::string key(name(e));
      c.typeface_map[index_of(e)] = parse_typeface_row(tm.at(key), "typeface_map." + key);
      check_ids(c.typeface_map[index_of(e)], "typeface_map." + key);
    }
    c.neutral_typefaces = parse_typeface_row(tm.at("neutral"), "typeface_map.neutral");
    check_ids(c.neutral_typefaces, "typeface_map.neutral");
  }
  {
    Obj f(root.get("formats"), "formats");
    const json& names = f.get("names");
    if (!names.is_array()) invalid("formats.names", "expected an array");
    for (std::size_t i = 0; i < names.size(); ++i)
    {
      const std::string path = "formats.names[" + std::to_string(i) + "]";
      c.formats.push_back(Obj::as_string(names[i], path));
      if (!iso_format(c.formats.back())) invalid(path, "not a supported ISO A/B/C format");
    }
    c.dpi = f.number("dpi", c.dpi);
    f.finish();
    if (c.dpi <= 0.0) invalid("formats.dpi", "must be > 0");
  }
  if (const json* ld = root.find("line_division")) {
    Obj l(*ld, "line_division");
    c.line_division.min_words = l.integer("min_words", c.line_division.min_words);
    c.line_division.max_words = l.integer("max_words", c.line_division.max_words);
    c.line_division.small_word_max_chars = l.integer("small_word_max_chars", c.line_division.small_word_max_chars);
    l.finish();
    if (c.line_division.min_words < 1) invalid("line_division.min_words", "must be >= 1");
    if (c.line_division.max_words < c.line_division.min_words)
      invalid("line_division.max_words", "must be >= min_words");
    if (c.line_division.small_word_max_chars < 0) invalid("line_division.small_word_max_chars", "must be >= 0");
  }
  if (const json* lay = root.find("layout")) {
    Obj l(*lay, "layout");
    c.layout.horizontal_margin = l.number("horizontal_margin", c.layout.horizontal_margin);
    c.layout.attempt_cap = l.integer("attempt_cap", c.layout.attempt_cap);
    l.finish();
    if (c.layout.horizontal_margin < 0.0 || c.layout.horizontal_margin >= 0.5)
      invalid("layout.horizontal_margin", "must lie in [0, 0.5)");
    if (c.layout.attempt_cap < 1) invalid("layout.attempt_cap", "must be >= 1");
  }
  {
    Obj m(root.get("music"), "music");
    c.music.bars = m.integer("bars", c.music.bars);
    if (c.music.bars < 1) invalid("music.bars", "must be >= 1");
    const json& rows = m.get("rows");
    require_emotion_keys(rows, "music.rows", true);
    for (Emotion e : kEmotions) {
      const std::string key(name(e));
      c.music.rows[index_of(e)] = parse_music_row(rows.at(key), "music.rows." + key);
    }
    c.music.neutral = parse_music_row(rows.at("neutral"), "music.rows.neutral");
    m.finish();
  }
  root.finish();
  return c;
}

StyleConfig load_config(std::span<const std::filesystem::path> paths) {
  std::vector<json> docs;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingFile, "cannot open config file", path.string());
    try {
      docs.push_back(json::parse(in));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::ParseError, e.what(), path.string() + ":byte " + std::to_string(e.byte));
    }
  }
  return config_from_json(docs);
}

StyleConfig load_config_dir(const std::filesystem::path& dir) {
  const std::array<std::filesystem::path, 3> paths = {dir / "colours.json", dir / "typefaces.json",
                                                      dir / "music.json"};
  return load_config(paths);
}

json to_json(const StyleConfig& c) {
  json j;
  j["white_probability"] = c.white_probability;
  j["predominance_threshold"] = c.predominance_threshold;
  j["legibility"] = {{"min_contrast", c.min_contrast}};
  j["band_fractions"] = c.band_fractions == BandFractions::Normalized ? "normalized" : "raw_with_remainder";
  json cm, bw, tm;
  for (Emotion e : kEmotions) {
    const std::string key(name(e));
    json row = json::array();
    for (const auto& wc : c.colour_map[index_of(e)]) row.push_back({{"colour", to_hex(wc.colour)}, {"weight", wc.weight}});
    cm[key] = row;
    json weights;
    for (BackgroundStyle s : kBackgroundStyles)
      weights[std::string(name(s))] = c.background_weights[index_of(e)][static_cast<std::size_t>(s)];
    bw[key] = weights;
  }
  auto typeface_row = [](const std::vector<WeightedTypeface>& row) {
    json out = json::array();
    for (const auto& wt : row) out.push_back({{"typeface", wt.typeface_id}, {"weight", wt.weight}});
    return out;
  };
  for (Emotion e : kEmotions) tm[std::string(name(e))] = typeface_row(c.typeface_map[index_of(e)]);
  tm["neutral"] = typeface_row(c.neutral_typefaces);
  j["colour_map"] = cm;
  j["background_weights"] = bw;
  j["typeface_map"] = tm;
  json tfs = json::array();
  for (const TypefaceDef& t : c.typefaces) {
    json tj;
    tj["id"] = t.id;
    tj["family"] = t.family;
    tj["source"] = t.font_file ? json{{"file", *t.font_file}} : json{{"synthetic", true}};
    json axes = json::object();
    for (const auto& [tag, r] : t.axes)
      axes[tag] = {{"default", r.default_value}, {"min", r.min}, {"max", r.max}, {"step", r.step}};
    tj["axes"] = axes;
    tj["leading_to_size_factor"] = t.leading_to_size_factor;
    tj["size_decrement"] = {{"base", t.size_decrement.base}, {"per_attempt_slope", t.size_decrement.per_attempt_slope}};
    tj["min_row_height"] = t.min_row_height;
    tfs.push_back(tj);
  }
  j["typefaces"] = tfs;
  j["formats"] = {{"names", c.formats}, {"dpi", c.dpi}};
  j["line_division"] = {{"min_words", c.line_division.min_words},
                        {"max_words", c.line_division.max_words},
                        {"small_word_max_chars", c.line_division.small_word_max_chars}};
  j["layout"] = {{"horizontal_margin", c.layout.horizontal_margin}, {"attempt_cap", c.layout.attempt_cap}};
  json rows;
  for (Emotion e : kEmotions) rows[std::string(name(e))] = music_row_to_json(c.music.rows[index_of(e)]);
  rows["neutral"] = music_row_to_json(c.music.neutral);
  j["music"] = {{"bars", c.music.bars}, {"rows", rows}};
  return j;
}

}  // namespace affiche
