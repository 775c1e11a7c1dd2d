#include "affiche/font_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "affiche/error.hpp"
#include "utf8.hpp"

namespace affiche {

namespace {

// Big-endian cursor over a byte buffer; every read is bounds-checked.
class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, std::size_t base = 0) : bytes_(bytes), base_(base) {}

  std::uint8_t u8(std::size_t off) const { return at(off, 1)[0]; }
  std::uint16_t u16(std::size_t off) const {
    const auto* p = at(off, 2);
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
  }
  std::int16_t i16(std::size_t off) const { return static_cast<std::int16_t>(u16(off)); }
  std::uint32_t u32(std::size_t off) const {
    const auto* p = at(off, 4);
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
  }
  std::int32_t i32(std::size_t off) const { return static_cast<std::int32_t>(u32(off)); }
  double fixed(std::size_t off) const { return i32(off) / 65536.0; }
  double f2dot14(std::size_t off) const { return i16(off) / 16384.0; }
  Reader sub(std::size_t off) const { return Reader(bytes_, base_ + off); }

 private:
  const std::uint8_t* at(std::size_t off, std::size_t n) const {
    if (base_ + off + n > bytes_.size()) throw Error(ErrorCode::ParseError, "font table read out of bounds");
    return bytes_.data() + base_ + off;
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t base_;
};

struct TableDirectory {
  std::map<std::string, std::pair<std::uint32_t, std::uint32_t>> tables;  // tag -> (offset, length)

  std::optional<std::uint32_t> offset(const std::string& tag) const {
    auto it = tables.find(tag);
    if (it == tables.end()) return std::nullopt;
    return it->second.first;
  }
};

std::string tag_at(const Reader& r, std::size_t off) {
  std::string tag(4, ' ');
  for (int i = 0; i < 4; ++i) tag[i] = static_cast<char>(r.u8(off + i));
  return tag;
}

void read_cmap_format4(const Reader& t, std::map<char32_t, std::uint16_t>& out) {
  const int seg_count = t.u16(6) / 2;
  const std::size_t ends = 14;
  const std::size_t starts = ends + 2 * seg_count + 2;
  const std::size_t deltas = starts + 2 * seg_count;
  const std::size_t range_offsets = deltas + 2 * seg_count;
  for (int s = 0; s < seg_count; ++s) {
    const std::uint16_t end = t.u16(ends + 2 * s);
    const std::uint16_t start = t.u16(starts + 2 * s);
    const std::int16_t delta = t.i16(deltas + 2 * s);
    const std::uint16_t ro = t.u16(range_offsets + 2 * s);
    if (start == 0xFFFF) continue;
    for (std::uint32_t c = start; c <= end; ++c) {
      std::uint16_t glyph;
      if (ro == 0) {
        glyph = static_cast<std::uint16_t>(c + delta);
      } else {
        const std::size_t addr = range_offsets + 2 * s + ro + 2 * (c - start);
        glyph = t.u16(addr);
        if (glyph != 0) glyph = static_cast<std::uint16_t>(glyph + delta);
      }
      if (glyph != 0) out.emplace(static_cast<char32_t>(c), glyph);
    }
  }
}

void read_cmap_format12(const Reader& t, std::map<char32_t, std::uint16_t>& out) {
  const std::uint32_t groups = t.u32(12);
  for (std::uint32_t g = 0; g < groups; ++g) {
    const std::size_t off = 16 + 12 * static_cast<std::size_t>(g);
    const std::uint32_t start = t.u32(off);
    const std::uint32_t end = t.u32(off + 4);
    const std::uint32_t glyph = t.u32(off + 8);
    for (std::uint32_t c = start; c <= end && c - start < 0x10000; ++c)
      out.emplace(static_cast<char32_t>(c), static_cast<std::uint16_t>(glyph + (c - start)));
  }
}

double region_scalar(const Reader& regions, std::size_t region, const std::vector<double>& coords) {
  const std::size_t axis_count = regions.u16(0);
  double scalar = 1.0;
  for (std::size_t a = 0; a < axis_count; ++a) {
    const std::size_t off = 4 + (region * axis_count + a) * 6;
    const double start = regions.f2dot14(off);
    const double peak = regions.f2dot14(off + 2);
    const double end = regions.f2dot14(off + 4);
    const double v = a < coords.size() ? coords[a] : 0.0;
    if (start > peak || peak > end) continue;
    if (start < 0.0 && end > 0.0 && peak != 0.0) continue;
    if (peak == 0.0) continue;
    if (v < start || v > end) return 0.0;
    if (v == peak) continue;
    scalar *= v < peak ? (v - start) / (peak - start) : (end - v) / (end - peak);
  }
  return scalar;
}

}  // namespace

FontFile FontFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FontResourceMissing, "cannot open font file", path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(std::move(bytes));
}

FontFile FontFile::parse(std::vector<std::uint8_t> bytes) {
  FontFile f;
  f.bytes_ = std::move(bytes);
  const Reader r(f.bytes_);

  TableDirectory dir;
  const int num_tables = r.u16(4);
  for (int i = 0; i < num_tables; ++i) {
    const std::size_t rec = 12 + 16 * static_cast<std::size_t>(i);
    dir.tables[tag_at(r, rec)] = {r.u32(rec + 8), r.u32(rec + 12)};
  }
  auto need = [&](const char* tag) {
    auto off = dir.offset(tag);
    if (!off) throw Error(ErrorCode::ParseError, std::string("font has no '") + tag + "' table");
    return r.sub(*off);
  };

  f.units_per_em_ = need("head").u16(18);
  const int num_hmetrics = need("hhea").u16(34);
  const int num_glyphs = need("maxp").u16(4);
  if (num_hmetrics == 0) throw Error(ErrorCode::ParseError, "hhea has no horizontal metrics");
  const Reader hmtx = need("hmtx");
  f.advances_.resize(static_cast<std::size_t>(std::max(num_glyphs, num_hmetrics)));
  for (int g = 0; g < static_cast<int>(f.advances_.size()); ++g)
    f.advances_[g] = g < num_hmetrics ? hmtx.u16(4 * static_cast<std::size_t>(g)) : f.advances_[num_hmetrics - 1];

  const Reader cmap = need("cmap");
  const int encodings = cmap.u16(2);
  std::optional<std::uint32_t> fmt12;
  std::optional<std::uint32_t> fmt4;
  for (int i = 0; i < encodings; ++i) {
    const std::size_t rec = 4 + 8 * static_cast<std::size_t>(i);
    const int platform = cmap.u16(rec);
    const int encoding = cmap.u16(rec + 2);
    const std::uint32_t off = cmap.u32(rec + 4);
    const int format = cmap.u16(off);
    const bool unicode = platform == 0 || (platform == 3 && (encoding == 1 || encoding == 10));
    if (!unicode) continue;
    if (format == 12 && !fmt12) fmt12 = off;
    if (format == 4 && !fmt4) fmt4 = off;
  }
  if (fmt12) read_cmap_format12(cmap.sub(*fmt12), f.cmap_);
  else if (fmt4) read_cmap_format4(cmap.sub(*fmt4), f.cmap_);
  else throw Error(ErrorCode::ParseError, "font has no Unicode cmap subtable (format 4 or 12)");

  if (auto off = dir.offset("fvar")) {
    const Reader fvar = r.sub(*off);
    const std::size_t axes_off = fvar.u16(4);
    const int count = fvar.u16(8);
    const int size = fvar.u16(10);
    for (int a = 0; a < count; ++a) {
      const std::size_t rec = axes_off + static_cast<std::size_t>(a) * size;
      f.axes_.push_back({tag_at(fvar, rec), fvar.fixed(rec + 4), fvar.fixed(rec + 8), fvar.fixed(rec + 12)});
    }
  }
  if (auto off = dir.offset("avar")) {
    const Reader avar = r.sub(*off);
    const int count = avar.u16(6);
    std::size_t pos = 8;
    for (int a = 0; a < count; ++a) {
      const int maps = avar.u16(pos);
      pos += 2;
      std::vector<std::pair<double, double>> segs;
      for (int m = 0; m < maps; ++m, pos += 4) segs.emplace_back(avar.f2dot14(pos), avar.f2dot14(pos + 2));
      if (a < static_cast<int>(f.axes_.size())) f.avar_.push_back(std::move(segs));
    }
  }
  if (auto it = dir.tables.find("HVAR"); it != dir.tables.end()) {
    const auto [offset, length] = it->second;
    if (std::uint64_t{offset} + length > f.bytes_.size()) throw Error(ErrorCode::ParseError, "HVAR table out of bounds");
    f.hvar_.assign(f.bytes_.begin() + offset, f.bytes_.begin() + offset + length);
  }
  return f;
}

std::uint16_t FontFile::glyph_id(char32_t c) const {
  auto it = cmap_.find(c);
  return it == cmap_.end() ? 0 : it->second;
}

std::vector<double> FontFile::normalize(const std::map<std::string, double>& coords) const {
  std::vector<double> n(axes_.size(), 0.0);
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const FontAxis& ax = axes_[a];
    auto it = coords.find(ax.tag);
    const double v = it == coords.end() ? ax.default_value : std::clamp(it->second, ax.min, ax.max);
    double x = 0.0;
    if (v < ax.default_value && ax.default_value > ax.min) x = (v - ax.default_value) / (ax.default_value - ax.min);
    if (v > ax.default_value && ax.max > ax.default_value) x = (v - ax.default_value) / (ax.max - ax.default_value);
    if (a < avar_.size() && avar_[a].size() >= 2) {
      const auto& segs = avar_[a];
      for (std::size_t s = 1; s < segs.size(); ++s) {
        if (x <= segs[s].first) {
          const auto [x0, y0] = segs[s - 1];
          const auto [x1, y1] = segs[s];
          x = x1 == x0 ? y1 : y0 + (x - x0) * (y1 - y0) / (x1 - x0);
          break;
        }
      }
    }
    n[a] = std::clamp(x, -1.0, 1.0);
  }
  return n;
}

double FontFile::hvar_delta(std::uint16_t glyph, const std::vector<double>& normalized) const {
  const Reader h(hvar_);
  const std::uint32_t store_off = h.u32(4);
  const std::uint32_t map_off = h.u32(8);

  std::uint32_t outer = 0;
  std::uint32_t inner = glyph;
  if (map_off != 0) {
    const Reader m = h.sub(map_off);
    const int format = m.u8(0);
    const int entry_format = m.u8(1);
    const std::uint32_t count = format == 0 ? m.u16(2) : m.u32(2);
    const std::size_t data = format == 0 ? 4 : 6;
    const int entry_size = ((entry_format & 0x30) >> 4) + 1;
    const int inner_bits = (entry_format & 0x0F) + 1;
    if (count == 0) return 0.0;
    const std::uint32_t idx = std::min<std::uint32_t>(glyph, count - 1);
    std::uint32_t entry = 0;
    for (int b = 0; b < entry_size; ++b) entry = (entry << 8) | m.u8(data + idx * entry_size + b);
    outer = entry >> inner_bits;
    inner = entry & ((1u << inner_bits) - 1);
  }

  const Reader store = h.sub(store_off);
  const Reader regions = store.sub(store.u32(2));
  const int data_count = store.u16(6);
  if (static_cast<int>(outer) >= data_count) return 0.0;
  const Reader ivd = store.sub(store.u32(8 + 4 * outer));
  const std::uint16_t item_count = ivd.u16(0);
  const std::uint16_t word_delta_count = ivd.u16(2);
  const std::uint16_t region_count = ivd.u16(4);
  if (inner >= item_count) return 0.0;
  const bool long_words = (word_delta_count & 0x8000) != 0;
  const int word_count = word_delta_count & 0x7FFF;
  const std::size_t row_size = long_words ? 4 * word_count + 2 * (region_count - word_count)
                                          : 2 * word_count + (region_count - word_count);
  const std::size_t row = 6 + 2 * static_cast<std::size_t>(region_count) + inner * row_size;

  double delta = 0.0;
  std::size_t pos = row;
  for (int k = 0; k < region_count; ++k) {
    double d;
    if (k < word_count) {
      d = long_words ? ivd.i32(pos) : ivd.i16(pos);
      pos += long_words ? 4 : 2;
    } else {
      d = long_words ? ivd.i16(pos) : static_cast<std::int8_t>(ivd.u8(pos));
      pos += long_words ? 2 : 1;
    }
    const std::size_t region = ivd.u16(6 + 2 * static_cast<std::size_t>(k));
    delta += d * region_scalar(regions, region, normalized);
  }
  return delta;
}

double FontFile::advance(std::uint16_t glyph, const std::map<std::string, double>& coords) const {
  return advance_normalized(glyph, hvar_.empty() ? std::vector<double>{} : normalize(coords));
}

double FontFile::advance_normalized(std::uint16_t glyph, const std::vector<double>& normalized) const {
  const double base = glyph < advances_.size() ? advances_[glyph] : 0.0;
  if (hvar_.empty() || axes_.empty()) return base;
  return base + hvar_delta(glyph, normalized);
}

bool FontFile::varies(std::string_view tag) const {
  return !hvar_.empty() &&
         std::any_of(axes_.begin(), axes_.end(), [&](const FontAxis& a) { return a.tag == tag && a.max > a.min; });
}

double FontMeasurer::width(std::string_view text, const FontState& state) const {
  if (text.empty()) return 0.0;
  double units = 0.0;
  const std::vector<double> normalized = font_->has_hvar() ? font_->normalize(state.axes) : std::vector<double>{};
  for (std::size_t i = 0; i < text.size();) {
    const auto d = detail::decode_utf8(text, i);
    const std::uint16_t g = font_->glyph_id(d.cp);
    units += font_->advance_normalized(g, normalized);
    i += d.len;
  }
  double w = state.size * units / font_->units_per_em();
  if (!font_->varies(kStretchAxis)) w *= state.axis(kStretchAxis, 100.0) / 100.0;
  if (!font_->varies(kWeightAxis)) w *= 1.0 + 0.0005 * (state.axis(kWeightAxis, 400.0) - 400.0);
  return w;
}

}  // namespace affiche
