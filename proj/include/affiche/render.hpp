#pragma once

#include <string>

#include "affiche/config.hpp"
#include "affiche/styling.hpp"
#include "affiche/typesetter.hpp"

namespace affiche {

struct RenderOptions {
  double dpi = 96.0;
  bool require_font_files = false;  // real-metrics mode
};

// Standalone SVG 1.1 document. Identical inputs give identical bytes.
// Throws Error(FontResourceMissing) when require_font_files is set and the
// typeface's file does not exist.
std::string render_svg(const PosterStyle& style, const Composition& composition,
                       const TypefaceDef& typeface, const RenderOptions& options = {});

std::string svg_file_name(std::string_view tweet_id, std::uint64_t seed);

}  // namespace affiche
