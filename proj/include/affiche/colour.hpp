#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace affiche {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb&) const = default;
};

inline constexpr Rgb kBlack{0, 0, 0};
inline constexpr Rgb kWhite{255, 255, 255};

// Accepts "#rrggbb" or "#rgb" (case-insensitive). Throws Error(ParseError).
Rgb parse_hex(std::string_view hex);
// Lowercase "#rrggbb".
std::string to_hex(Rgb c);

// WCAG 2.x relative luminance of an sRGB colour.
double relative_luminance(Rgb c);
// (L_light + 0.05) / (L_dark + 0.05), in [1, 21].
double contrast_ratio(Rgb a, Rgb b);

// Linear blend in sRGB space; t = 0 gives a, t = 1 gives b.
Rgb mix(Rgb a, Rgb b, double t);

}  // namespace affiche
