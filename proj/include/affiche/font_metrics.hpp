#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "affiche/typesetter.hpp"

namespace affiche {

struct FontAxis {
  std::string tag;
  double min = 0.0;
  double default_value = 0.0;
  double max = 0.0;
};

// Horizontal metrics read from an OpenType/TrueType file: cmap (formats 4
// and 12), hmtx, and for variable fonts fvar, avar and HVAR advance deltas.
// Fonts that carry advance variation only in gvar phantom points are read at
// their default advances.
class FontFile {
 public:
  static FontFile load(const std::filesystem::path& path);
  static FontFile parse(std::vector<std::uint8_t> bytes);

  int units_per_em() const { return units_per_em_; }
  const std::vector<FontAxis>& axes() const { return axes_; }
  bool has_hvar() const { return !hvar_.empty(); }

  std::uint16_t glyph_id(char32_t c) const;
  // Advance in font units at the given user-space axis coordinates; axes not
  // listed take their default.
  double advance(std::uint16_t glyph, const std::map<std::string, double>& coords) const;
  double advance_normalized(std::uint16_t glyph, const std::vector<double>& normalized) const;
  // True when HVAR supplies advance deltas for this axis.
  bool varies(std::string_view tag) const;
  // User coordinates -> normalized [-1, 1] per fvar axis, avar applied.
  std::vector<double> normalize(const std::map<std::string, double>& coords) const;

 private:
  std::vector<std::uint8_t> bytes_;
  int units_per_em_ = 1000;
  std::vector<std::uint16_t> advances_;
  std::map<char32_t, std::uint16_t> cmap_;
  std::vector<FontAxis> axes_;
  std::vector<std::vector<std::pair<double, double>>> avar_;
  std::vector<std::uint8_t> hvar_;

  double hvar_delta(std::uint16_t glyph, const std::vector<double>& normalized) const;
};

// Measures with real glyph advances. Axes the font does not vary are emulated
// (stretch scales horizontally, weight with the synthetic factor), which is
// also how browsers synthesize them.
class FontMeasurer final : public TextMeasurer {
 public:
  explicit FontMeasurer(std::shared_ptr<const FontFile> font) : font_(std::move(font)) {}
  double width(std::string_view text, const FontState& state) const override;

 private:
  std::shared_ptr<const FontFile> font_;
};

}  // namespace affiche
