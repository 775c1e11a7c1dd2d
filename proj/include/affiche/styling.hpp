#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "affiche/colour.hpp"
#include "affiche/config.hpp"
#include "affiche/emotion.hpp"
#include "affiche/rng.hpp"

namespace affiche {

struct PosterFormat {
  std::string name;  // "A3", "B4", ...
  double width_mm = 0.0;
  double height_mm = 0.0;

  double width_pt() const { return width_mm * 72.0 / 25.4; }
  double height_pt() const { return height_mm * 72.0 / 25.4; }
  bool operator==(const PosterFormat&) const = default;
};

// ISO 216 / ISO 269 portrait dimensions for A0-A7, B0-B7 and C0-C7.
std::optional<PosterFormat> iso_format(std::string_view name);

// Background styles. New styles go here alongside a branch in
// build_background and the renderer.
namespace backgrounds {

struct Solid {
  Rgb bg;
  Rgb fg;
  bool operator==(const Solid&) const = default;
};

enum class Diagonal { TopLeftToBottomRight, TopRightToBottomLeft };

struct DiagonallyHalved {
  Rgb triangle_a;  // predominant emotion colour
  Rgb triangle_b;  // second emotion colour or white
  Diagonal split = Diagonal::TopLeftToBottomRight;
  bool a_upper = true;  // triangle_a sits above the diagonal
  Rgb fg;
  bool operator==(const DiagonallyHalved&) const = default;
};

struct Band {
  Rgb colour;
  double height_fraction = 0.0;
  std::optional<double> end_point_fraction;  // gradient, single band only
  bool operator==(const Band&) const = default;
};

struct SolidDivided {
  std::vector<Band> bands;  // top to bottom
  Rgb fg;
  bool operator==(const SolidDivided&) const = default;
};

struct Gradient {
  std::vector<Band> bands;  // each band fades colour -> white downwards
  Rgb fg;
  bool operator==(const Gradient&) const = default;
};

}  // namespace backgrounds

using BackgroundSpec = std::variant<backgrounds::Solid, backgrounds::DiagonallyHalved,
                                    backgrounds::SolidDivided, backgrounds::Gradient>;

BackgroundStyle style_of(const BackgroundSpec& bg);
Rgb foreground(const BackgroundSpec& bg);
// Every colour the text may sit on.
std::vector<Rgb> region_colours(const BackgroundSpec& bg);

enum class TextAlign { Left, Centre, Right };
enum class BoxAlign { Top, Middle, Bottom };
std::string_view name(TextAlign a);
std::string_view name(BoxAlign a);

struct PosterStyle {
  PosterFormat format;
  BackgroundSpec background;
  std::string typeface_id;
  TextAlign text_align = TextAlign::Left;
  BoxAlign box_align = BoxAlign::Top;
  bool operator==(const PosterStyle&) const = default;
};

// Index i with probability weights[i] / sum. Throws Error(AllZeroWeights).
std::size_t roulette_select(std::span<const double> weights, Rng& rng);

PosterFormat select_format(Rng& rng, const StyleConfig& config);

BackgroundStyle select_background_style(const EmotionProfile& profile, Rng& rng,
                                        const StyleConfig& config);

BackgroundSpec build_background(BackgroundStyle style, const EmotionProfile& profile, Rng& rng,
                                const StyleConfig& config);

struct Legibility {
  double ratio = 1.0;
  bool pass = false;
};

Legibility check_legibility(Rgb fg, Rgb bg, const StyleConfig& config);
// fg against every region of the background.
bool is_legible(const BackgroundSpec& bg, const StyleConfig& config);

std::string select_typeface(const EmotionProfile& profile, Rng& rng, const StyleConfig& config);

std::pair<TextAlign, BoxAlign> select_alignments(Rng& rng);

// Format, background, typeface and alignments, in that draw order.
PosterStyle select_style(const EmotionProfile& profile, Rng& rng, const StyleConfig& config);

}  // namespace affiche
