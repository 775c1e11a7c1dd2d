#include "affiche/styling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "affiche/error.hpp"

namespace affiche {

namespace {

constexpr int kColourRedraws = 8;

struct IsoEntry {
  std::string_view name;
  double w;
  double h;
};

constexpr std::array<IsoEntry, 24> kIsoFormats = {{
    {"A0", 841, 1189}, {"A1", 594, 841}, {"A2", 420, 594}, {"A3", 297, 420},
    {"A4", 210, 297},  {"A5", 148, 210}, {"A6", 105, 148}, {"A7", 74, 105},
    {"B0", 1000, 1414}, {"B1", 707, 1000}, {"B2", 500, 707}, {"B3", 353, 500},
    {"B4", 250, 353},  {"B5", 176, 250}, {"B6", 125, 176}, {"B7", 88, 125},
    {"C0", 917, 1297}, {"C1", 648, 917}, {"C2", 458, 648}, {"C3", 324, 458},
    {"C4", 229, 324},  {"C5", 162, 229}, {"C6", 114, 162}, {"C7", 81, 114},
}};

Rgb draw_colour(Emotion e, Rng& rng, const StyleConfig& config) {
  const auto& row = config.colour_map[index_of(e)];
  std::vector<double> weights;
  weights.reserve(row.size());
  for (const auto& wc : row) weights.push_back(wc.weight);
  return row[roulette_select(weights, rng)].colour;
}

bool passes_all(Rgb fg, const std::vector<Rgb>& regions, const StyleConfig& config) {
  return std::all_of(regions.begin(), regions.end(),
                     [&](Rgb bg) { return check_legibility(fg, bg, config).pass; });
}

// Uniform choice among the neutrals legible on every region.
std::optional<Rgb> pick_neutral(const std::vector<Rgb>& regions, Rng& rng, const StyleConfig& config) {
  std::vector<Rgb> ok;
  for (Rgb n : {kBlack, kWhite})
    if (passes_all(n, regions, config)) ok.push_back(n);
  if (ok.empty()) return std::nullopt;
  return ok[rng.index(ok.size())];
}

double worst_contrast(Rgb fg, const std::vector<Rgb>& regions) {
  double worst = 21.0;
  for (Rgb r : regions) worst = std::min(worst, contrast_ratio(fg, r));
  return worst;
}

Rgb best_neutral(const std::vector<Rgb>& regions) {
  return worst_contrast(kBlack, regions) >= worst_contrast(kWhite, regions) ? kBlack : kWhite;
}

// Blends `c` toward the neutral opposite `fg` just far enough to pass.
Rgb tint_until_legible(Rgb c, Rgb fg, const StyleConfig& config) {
  if (check_legibility(fg, c, config).pass) return c;
  const Rgb target = fg == kBlack ? kWhite : kBlack;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    (check_legibility(fg, mix(c, target, mid), config).pass ? hi : lo) = mid;
  }
  Rgb out = mix(c, target, hi);
  return check_legibility(fg, out, config).pass ? out : target;
}

double second_colour_probability(const EmotionProfile& p) {
  if (p.predominant.size() < 2) return 0.0;
  const double s1 = p.score(p.predominant[0]);
  const double s2 = p.score(p.predominant[1]);
  return s1 > 0.0 ? std::clamp(s2 / s1, 0.0, 1.0) : 0.0;
}

std::vector<backgrounds::Band> emotion_bands(const EmotionProfile& p, Rng& rng, const StyleConfig& config) {
  std::vector<backgrounds::Band> bands;
  double total = 0.0;
  for (Emotion e : p.predominant) total += p.score(e);
  const bool raw = config.band_fractions == BandFractions::RawWithRemainder && total <= 1.0;
  for (Emotion e : p.predominant) {
    backgrounds::Band b;
    b.colour = draw_colour(e, rng, config);
    b.height_fraction = raw ? p.score(e) : p.score(e) / total;
    bands.push_back(b);
  }
  if (raw && 1.0 - total > 1e-12) bands.push_back({kWhite, 1.0 - total, std::nullopt});
  return bands;
}

backgrounds::Solid build_solid(const EmotionProfile& p, Rng& rng, const StyleConfig& config) {
  const Emotion first = p.predominant.front();
  const auto& row = config.colour_map[index_of(first)];
  std::vector<double> weights;
  double sum = 0.0;
  for (const auto& wc : row) {
    weights.push_back(wc.weight);
    sum += wc.weight;
  }
  const double wp = config.white_probability;
  backgrounds::Solid s;
  bool white = wp >= 1.0;
  if (!white) {
    weights.push_back(wp * sum / (1.0 - wp));
    const std::size_t pick = roulette_select(weights, rng);
    white = pick == row.size();
    if (!white) s.bg = row[pick].colour;
  }
  if (white) s.bg = kWhite;
  const double p2 = second_colour_probability(p);
  // The background stays fixed; only the text colour is re-drawn.
  for (int attempt = 0; attempt <= kColourRedraws; ++attempt) {
    std::optional<Rgb> fg;
    if (white) {
      fg = draw_colour(first, rng, config);
    } else if (rng.bernoulli(p2)) {
      fg = draw_colour(p.predominant[1], rng, config);
    } else {
      fg = pick_neutral({s.bg}, rng, config);
    }
    if (fg && check_legibility(*fg, s.bg, config).pass) {
      s.fg = *fg;
      return s;
    }
  }
  s.fg = best_neutral({s.bg});
  s.bg = tint_until_legible(s.bg, s.fg, config);
  return s;
}

template <class Spec, class Draw>
Spec with_neutral_text(Draw draw_regions, Rng& rng, const StyleConfig& config) {
  Spec spec;
  for (int attempt = 0; attempt <= kColourRedraws; ++attempt) {
    spec = draw_regions();
    if (auto fg = pick_neutral(region_colours(BackgroundSpec(spec)), rng, config)) {
      spec.fg = *fg;
      return spec;
    }
  }
  spec.fg = best_neutral(region_colours(BackgroundSpec(spec)));
  return spec;
}

}  // namespace

std::optional<PosterFormat> iso_format(std::string_view name) {
  for (const IsoEntry& e : kIsoFormats)
    if (e.name == name) return PosterFormat{std::string(e.name), e.w, e.h};
  return std::nullopt;
}

BackgroundStyle style_of(const BackgroundSpec& bg) { return static_cast<BackgroundStyle>(bg.index()); }

Rgb foreground(const BackgroundSpec& bg) {
  return std::visit([](const auto& s) { return s.fg; }, bg);
}

std::vector<Rgb> region_colours(const BackgroundSpec& bg) {
  using namespace backgrounds;
  if (const auto* s = std::get_if<Solid>(&bg)) return {s->bg};
  if (const auto* h = std::get_if<DiagonallyHalved>(&bg)) return {h->triangle_a, h->triangle_b};
  if (const auto* d = std::get_if<SolidDivided>(&bg)) {
    std::vector<Rgb> out;
    for (const Band& b : d->bands) out.push_back(b.colour);
    return out;
  }
  const auto& g = std::get<Gradient>(bg);
  std::vector<Rgb> out;
  for (const Band& b : g.bands) out.push_back(b.colour);
  out.push_back(kWhite);
  return out;
}

std::string_view name(TextAlign a) {
  switch (a) {
    case TextAlign::Left: return "left";
    case TextAlign::Centre: return "centre";
    case TextAlign::Right: return "right";
  }
  return "";
}

std::string_view name(BoxAlign a) {
  switch (a) {
    case BoxAlign::Top: return "top";
    case BoxAlign::Middle: return "middle";
    case BoxAlign::Bottom: return "bottom";
  }
  return "";
}

std::size_t roulette_select(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w > 0.0 ? w : 0.0;
  if (!(total > 0.0) || !std::isfinite(total))
    throw Error(ErrorCode::AllZeroWeights, "no positive weight to select from");
  const double r = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) continue;
    last_positive = i;
    acc += weights[i];
    if (r < acc) return i;
  }
  return last_positive;
}

PosterFormat select_format(Rng& rng, const StyleConfig& config) {
  if (config.formats.empty()) throw Error(ErrorCode::EmptyFormatList, "no poster formats configured");
  const std::string& n = config.formats[rng.index(config.formats.size())];
  auto f = iso_format(n);
  if (!f) throw Error(ErrorCode::ValidationError, "unknown format '" + n + "'", "formats.names");
  return *f;
}

BackgroundStyle select_background_style(const EmotionProfile& profile, Rng& rng, const StyleConfig& config) {
  if (profile.neutral || profile.predominant.empty()) return BackgroundStyle::Solid;
  auto weights = config.background_weights[index_of(profile.predominant.front())];
  if (profile.predominant.size() < 2) weights[static_cast<std::size_t>(BackgroundStyle::SolidDivided)] = 0.0;
  return kBackgroundStyles[roulette_select(weights, rng)];
}

BackgroundSpec build_background(BackgroundStyle style, const EmotionProfile& profile, Rng& rng,
                                const StyleConfig& config) {
  using namespace backgrounds;
  if (profile.neutral || profile.predominant.empty()) {
    if (style != BackgroundStyle::Solid)
      throw Error(ErrorCode::StyleProfileMismatch, "neutral profiles only take the solid style");
    return Solid{kWhite, kBlack};
  }
  switch (style) {
    case BackgroundStyle::Solid:
      return build_solid(profile, rng, config);

    case BackgroundStyle::DiagonallyHalved: {
      const double p2 = second_colour_probability(profile);
      auto spec = with_neutral_text<DiagonallyHalved>(
          [&] {
            DiagonallyHalved h;
            h.triangle_a = draw_colour(profile.predominant[0], rng, config);
            h.triangle_b = rng.bernoulli(p2) ? draw_colour(profile.predominant[1], rng, config) : kWhite;
            h.split = rng.bernoulli(0.5) ? Diagonal::TopLeftToBottomRight : Diagonal::TopRightToBottomLeft;
            h.a_upper = rng.bernoulli(0.5);
            return h;
          },
          rng, config);
      spec.triangle_a = tint_until_legible(spec.triangle_a, spec.fg, config);
      spec.triangle_b = tint_until_legible(spec.triangle_b, spec.fg, config);
      return spec;
    }

    case BackgroundStyle::SolidDivided: {
      if (profile.predominant.size() < 2)
        throw Error(ErrorCode::StyleProfileMismatch, "solid divided needs two or more predominant emotions");
      auto spec = with_neutral_text<SolidDivided>(
          [&] { return SolidDivided{emotion_bands(profile, rng, config), kBlack}; }, rng, config);
      for (Band& b : spec.bands) b.colour = tint_until_legible(b.colour, spec.fg, config);
      return spec;
    }

    case BackgroundStyle::Gradient: {
      auto spec = with_neutral_text<Gradient>(
          [&] {
            Gradient g;
            g.bands = emotion_bands(profile, rng, config);
            if (profile.predominant.size() == 1) {
              g.bands.front().height_fraction = 1.0;
              g.bands.front().end_point_fraction = 0.75 + 0.25 * profile.score(profile.predominant[0]);
            }
            return g;
          },
          rng, config);
      for (Band& b : spec.bands) b.colour = tint_until_legible(b.colour, spec.fg, config);
      return spec;
    }
  }
  throw Error(ErrorCode::StyleProfileMismatch, "unknown background style");
}

Legibility check_legibility(Rgb fg, Rgb bg, const StyleConfig& config) {
  const double ratio = contrast_ratio(fg, bg);
  return {ratio, ratio >= config.min_contrast};
}

bool is_legible(const BackgroundSpec& bg, const StyleConfig& config) {
  return passes_all(foreground(bg), region_colours(bg), config);
}

std::string select_typeface(const EmotionProfile& profile, Rng& rng, const StyleConfig& config) {
  const auto& row = profile.neutral || profile.predominant.empty()
                        ? config.neutral_typefaces
                        : config.typeface_map[index_of(profile.predominant.front())];
  std::vector<double> weights;
  for (const auto& wt : row) weights.push_back(wt.weight);
  return row[roulette_select(weights, rng)].typeface_id;
}

std::pair<TextAlign, BoxAlign> select_alignments(Rng& rng) {
  constexpr std::array<TextAlign, 3> text = {TextAlign::Left, TextAlign::Centre, TextAlign::Right};
  constexpr std::array<BoxAlign, 3> box = {BoxAlign::Top, BoxAlign::Middle, BoxAlign::Bottom};
  const TextAlign t = text[rng.index(3)];
  const BoxAlign b = box[rng.index(3)];
  return {t, b};
}

PosterStyle select_style(const EmotionProfile& profile, Rng& rng, const StyleConfig& config) {
  PosterStyle s;
  s.format = select_format(rng, config);
  const BackgroundStyle tag = select_background_style(profile, rng, config);
  s.background = build_background(tag, profile, rng, config);
  s.typeface_id = select_typeface(profile, rng, config);
  std::tie(s.text_align, s.box_align) = select_alignments(rng);
  return s;
}

}  // namespace affiche
