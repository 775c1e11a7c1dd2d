#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "affiche/config.hpp"
#include "affiche/rng.hpp"
#include "affiche/styling.hpp"
#include "affiche/text.hpp"

namespace affiche {

struct FontState {
  double size = 0.0;     // points
  double leading = 0.0;  // points
  std::map<std::string, double> axes;
  int attempts = 0;
  int size_changes_since_axis_mod = 0;

  double axis(std::string_view tag, double fallback) const;
  bool operator==(const FontState&) const = default;
};

struct Margins {
  double top = 0.0;
  double bottom = 0.0;
  double left = 0.0;
  double right = 0.0;
  bool operator==(const Margins&) const = default;
};

// One column, one row per line.
struct Grid {
  int rows = 0;
  double row_height = 0.0;
  Margins margins;
  bool operator==(const Grid&) const = default;
};

struct PlacedLine {
  std::string text;
  double x = 0.0;
  double baseline = 0.0;
  double top = 0.0;  // row top; the line box is [top, top + leading]
  double width = 0.0;
  bool operator==(const PlacedLine&) const = default;
};

struct Operation {
  enum class Kind { Size, Axis } kind = Kind::Size;
  std::string axis;  // for Axis
  bool reset = false;  // axes were reset after this size change
  bool operator==(const Operation&) const = default;
};

struct Composition {
  std::vector<PlacedLine> lines;
  Grid grid;
  FontState font;
  int operations_used = 0;
  double elapsed_s = 0.0;
  std::vector<Operation> trace;
};

// Advance width of a string in points for a given font state. Implementations
// must be read-only after construction, return 0 for "", and be monotone
// non-decreasing in size and stretch and non-increasing as weight drops.
class TextMeasurer {
 public:
  virtual ~TextMeasurer() = default;
  virtual double width(std::string_view text, const FontState& state) const = 0;
};

// width = size * stretch/100 * sum(unit advances) * (1 + 0.0005 (weight - 400))
class SyntheticMeasurer final : public TextMeasurer {
 public:
  double width(std::string_view text, const FontState& state) const override;
  // Em-relative advance for one code point.
  static double unit_advance(char32_t c);
};

inline constexpr double kFitEpsilon = 1e-6;

FontState initial_state(const TypefaceDef& typeface, const Grid& grid);
Grid initial_grid(const PosterFormat& format, int rows, const Layout& layout);

struct SizeStep {
  FontState state;
  Grid grid;
};

// Throws Error(MinRowHeight) when the leading already sits at the minimum row
// height; otherwise the decrement is clamped so leading stays >= minimum.
SizeStep apply_size_modifier(const FontState& state, const Grid& grid, const TypefaceDef& typeface,
                             BoxAlign box_align);

// Throws Error(NoMovableAxis).
FontState apply_axis_modifier(const FontState& state, const TypefaceDef& typeface, Rng& rng);

FontState maybe_reset_axes(const FontState& state, const TypefaceDef& typeface);

bool has_movable_axis(const FontState& state, const TypefaceDef& typeface);

bool fits(const std::vector<std::string>& lines, const FontState& state, const Grid& grid,
          const PosterFormat& format, const TextMeasurer& measurer);

// Places lines according to the grid and text alignment.
std::vector<PlacedLine> place_lines(const std::vector<std::string>& lines, const FontState& state,
                                    const Grid& grid, const PosterFormat& format,
                                    TextAlign text_align, const TextMeasurer& measurer);

Composition typeset(const LinePlan& plan, const PosterStyle& style, const StyleConfig& config,
                    Rng& rng, const TextMeasurer& measurer);

// True when every placed line box lies inside the poster rectangle.
bool contained(const Composition& composition, const PosterFormat& format);

}  // namespace affiche
