#include "affiche/render.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "affiche/error.hpp"

namespace affiche {

namespace {

// Fixed-point with trailing zeros trimmed; "-0" normalized to "0".
std::string num(double v, int precision = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s(buf);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Canvas {
  double w;
  double h;
  double scale;  // points -> user units
};

void band_rects(std::ostringstream& svg, std::ostringstream& defs, const std::vector<backgrounds::Band>& bands,
                const Canvas& c, bool gradient) {
  double y = 0.0;
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto& b = bands[i];
    const double height = b.height_fraction * c.h;
    std::string fill = to_hex(b.colour);
    if (gradient) {
      const std::string id = "band" + std::to_string(i);
      const double end = b.end_point_fraction.value_or(1.0);
      defs << "<linearGradient id=\"" << id << "\" x1=\"0\" y1=\"0\" x2=\"0\" y2=\"1\">"
           << "<stop offset=\"0\" stop-color=\"" << to_hex(b.colour) << "\"/>"
           << "<stop offset=\"" << num(end, 6) << "\" stop-color=\"#ffffff\"/>"
           << "</linearGradient>\n";
      fill = "url(#" + id + ")";
    }
    svg << "<rect x=\"0\" y=\"" << num(y, 6) << "\" width=\"" << num(c.w, 6) << "\" height=\"" << num(height, 6)
        << "\" fill=\"" << fill << "\"/>\n";
    y += height;
  }
}

}  // namespace

std::string svg_file_name(std::string_view tweet_id, std::uint64_t seed) {
  std::string safe;
  for (char ch : tweet_id) safe += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_') ? ch : '_';
  return safe + "_" + std::to_string(seed) + ".svg";
}

std::string render_svg(const PosterStyle& style, const Composition& composition, const TypefaceDef& typeface,
                       const RenderOptions& options) {
  using namespace backgrounds;
  if (options.require_font_files) {
    if (!typeface.font_file || !std::filesystem::exists(*typeface.font_file))
      throw Error(ErrorCode::FontResourceMissing, "font file for '" + typeface.id + "' not found",
                  typeface.font_file.value_or(""));
  }
  const Canvas c{style.format.width_mm / 25.4 * options.dpi, style.format.height_mm / 25.4 * options.dpi,
                 options.dpi / 72.0};

  std::ostringstream defs;
  std::ostringstream bg;
  const BackgroundStyle tag = style_of(style.background);
  bg << "<g id=\"background\" class=\"" << name(tag) << "\">\n";
  if (const auto* s = std::get_if<Solid>(&style.background)) {
    bg << "<rect x=\"0\" y=\"0\" width=\"" << num(c.w, 6) << "\" height=\"" << num(c.h, 6) << "\" fill=\""
       << to_hex(s->bg) << "\"/>\n";
  } else if (const auto* h = std::get_if<DiagonallyHalved>(&style.background)) {
    const std::string W = num(c.w, 6);
    const std::string H = num(c.h, 6);
    std::string upper, lower;
    if (h->split == Diagonal::TopLeftToBottomRight) {
      upper = "0,0 " + W + ",0 " + W + "," + H;
      lower = "0,0 0," + H + " " + W + "," + H;
    } else {
      upper = "0,0 " + W + ",0 0," + H;
      lower = W + ",0 " + W + "," + H + " 0," + H;
    }
    const Rgb up = h->a_upper ? h->triangle_a : h->triangle_b;
    const Rgb low = h->a_upper ? h->triangle_b : h->triangle_a;
    bg << "<polygon class=\"upper\" points=\"" << upper << "\" fill=\"" << to_hex(up) << "\"/>\n";
    bg << "<polygon class=\"lower\" points=\"" << lower << "\" fill=\"" << to_hex(low) << "\"/>\n";
  } else if (const auto* d = std::get_if<SolidDivided>(&style.background)) {
    band_rects(bg, defs, d->bands, c, false);
  } else {
    band_rects(bg, defs, std::get<Gradient>(style.background).bands, c, true);
  }
  bg << "</g>\n";

  const FontState& font = composition.font;
  std::string variation;
  for (const auto& [axis_tag, value] : font.axes) {
    if (!variation.empty()) variation += ",";
    variation += "'" + axis_tag + "' " + num(value);
  }
  std::string css = "font-weight:" + num(font.axis(kWeightAxis, 400.0)) +
                    ";font-stretch:" + num(font.axis(kStretchAxis, 100.0)) + "%";
  if (!variation.empty()) css += ";font-variation-settings:" + variation;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(style.format.width_mm)
      << "mm\" height=\"" << num(style.format.height_mm) << "mm\" viewBox=\"0 0 " << num(c.w, 6) << " "
      << num(c.h, 6) << "\">\n";
  svg << "<defs>\n" << defs.str();
  if (typeface.font_file) {
    svg << "<style type=\"text/css\"><![CDATA[@font-face{font-family:'" << typeface.family << "';src:url('"
        << *typeface.font_file << "');}]]></style>\n";
  }
  svg << "</defs>\n";
  svg << bg.str();
  svg << "<g id=\"text\" class=\"" << name(style.text_align) << " " << name(style.box_align)
      << "\" font-family=\"" << escape(typeface.family) << "\" font-size=\"" << num(font.size * c.scale)
      << "\" fill=\"" << to_hex(foreground(style.background)) << "\" style=\"" << escape(css) << "\">\n";
  for (const PlacedLine& line : composition.lines) {
    svg << "<text x=\"" << num(line.x * c.scale) << "\" y=\"" << num(line.baseline * c.scale) << "\">"
        << escape(line.text) << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace affiche
