#include "affiche/typesetter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "affiche/error.hpp"
#include "utf8.hpp"

namespace affiche {

namespace {

constexpr double kAxisEpsilon = 1e-9;

// Helvetica-like advances for printable ASCII, in 1/1000 em.
constexpr std::array<int, 95> kAsciiAdvances = {
    278, 278, 355, 556, 556, 889, 667, 191, 333, 333, 389, 584, 278, 333, 278, 278,   // ' ' .. '/'
    556, 556, 556, 556, 556, 556, 556, 556, 556, 556,                                 // 0-9
    278, 278, 584, 584, 584, 556, 1015,                                               // : ; < = > ? @
    667, 667, 722, 722, 667, 611, 778, 722, 278, 500, 667, 556, 833,                  // A-M
    722, 778, 667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611,                  // N-Z
    278, 278, 278, 469, 556, 333,                                                     // [ \ ] ^ _ `
    556, 556, 500, 556, 556, 278, 556, 556, 222, 222, 500, 222, 833,                  // a-m
    556, 556, 556, 556, 333, 500, 278, 556, 500, 722, 500, 500, 500,                  // n-z
    334, 260, 334, 584,                                                               // { | } ~
};

bool at_min(double value, const AxisRange& r) { return value <= r.min + kAxisEpsilon; }

}  // namespace

double FontState::axis(std::string_view tag, double fallback) const {
  auto it = axes.find(std::string(tag));
  return it == axes.end() ? fallback : it->second;
}

double SyntheticMeasurer::unit_advance(char32_t c) {
  if (c >= 32 && c < 127) return kAsciiAdvances[c - 32] / 1000.0;
  return 0.556;
}

double SyntheticMeasurer::width(std::string_view text, const FontState& state) const {
  double units = 0.0;
  for (std::size_t i = 0; i < text.size();) {
    const auto d = detail::decode_utf8(text, i);
    units += unit_advance(d.cp);
    i += d.len;
  }
  const double stretch = state.axis(kStretchAxis, 100.0);
  const double weight = state.axis(kWeightAxis, 400.0);
  return state.size * (stretch / 100.0) * units * (1.0 + 0.0005 * (weight - 400.0));
}

Grid initial_grid(const PosterFormat& format, int rows, const Layout& layout) {
  Grid g;
  g.rows = rows;
  g.row_height = format.height_pt() / rows;
  g.margins.left = g.margins.right = layout.horizontal_margin * format.width_pt();
  return g;
}

FontState initial_state(const TypefaceDef& typeface, const Grid& grid) {
  FontState s;
  s.leading = grid.row_height;
  s.size = s.leading * typeface.leading_to_size_factor;
  for (const auto& [tag, range] : typeface.axes) s.axes[tag] = range.default_value;
  return s;
}

SizeStep apply_size_modifier(const FontState& state, const Grid& grid, const TypefaceDef& typeface,
                             BoxAlign box_align) {
  if (state.leading <= typeface.min_row_height + kAxisEpsilon)
    throw Error(ErrorCode::MinRowHeight, "leading is already at the minimum row height");
  SizeStep out{state, grid};
  const double decrement = typeface.size_decrement.base + typeface.size_decrement.per_attempt_slope * state.attempts;
  double leading = (state.size - decrement) / typeface.leading_to_size_factor;
  leading = std::max(leading, typeface.min_row_height);
  out.state.leading = leading;
  out.state.size = leading * typeface.leading_to_size_factor;
  out.state.attempts += 1;
  out.state.size_changes_since_axis_mod += 1;

  const double freed = grid.rows * (state.leading - leading);
  out.grid.row_height = leading;
  switch (box_align) {
    case BoxAlign::Top: out.grid.margins.bottom += freed; break;
    case BoxAlign::Bottom: out.grid.margins.top += freed; break;
    case BoxAlign::Middle:
      out.grid.margins.top += freed / 2.0;
      out.grid.margins.bottom += freed / 2.0;
      break;
  }
  return out;
}

bool has_movable_axis(const FontState& state, const TypefaceDef& typeface) {
  return std::any_of(typeface.axes.begin(), typeface.axes.end(), [&](const auto& kv) {
    return kv.second.max > kv.second.min && !at_min(state.axis(kv.first, kv.second.default_value), kv.second);
  });
}

FontState apply_axis_modifier(const FontState& state, const TypefaceDef& typeface, Rng& rng) {
  std::vector<const std::pair<const std::string, AxisRange>*> movable;
  for (const auto& kv : typeface.axes)
    if (kv.second.max > kv.second.min && !at_min(state.axis(kv.first, kv.second.default_value), kv.second))
      movable.push_back(&kv);
  if (movable.empty()) throw Error(ErrorCode::NoMovableAxis, "every axis is at its minimum");
  const auto& [tag, range] = *movable[rng.index(movable.size())];
  FontState out = state;
  out.axes[tag] = std::max(range.min, state.axis(tag, range.default_value) - range.step);
  out.size_changes_since_axis_mod = 0;
  out.attempts += 1;
  return out;
}

FontState maybe_reset_axes(const FontState& state, const TypefaceDef& typeface) {
  if (!typeface.has_variable_axes() || state.size_changes_since_axis_mod < 4) return state;
  for (const auto& [tag, range] : typeface.axes)
    if (range.max > range.min && !at_min(state.axis(tag, range.default_value), range)) return state;
  FontState out = state;
  for (const auto& [tag, range] : typeface.axes) out.axes[tag] = range.default_value;
  out.size_changes_since_axis_mod = 0;
  return out;
}

bool fits(const std::vector<std::string>& lines, const FontState& state, const Grid& grid,
          const PosterFormat& format, const TextMeasurer& measurer) {
  const double available = format.width_pt() - grid.margins.left - grid.margins.right;
  const double height = grid.rows * state.leading + grid.margins.top + grid.margins.bottom;
  if (height > format.height_pt() + kFitEpsilon) return false;
  return std::all_of(lines.begin(), lines.end(),
                     [&](const std::string& l) { return measurer.width(l, state) <= available + kFitEpsilon; });
}

std::vector<PlacedLine> place_lines(const std::vector<std::string>& lines, const FontState& state,
                                    const Grid& grid, const PosterFormat& format, TextAlign text_align,
                                    const TextMeasurer& measurer) {
  std::vector<PlacedLine> placed;
  const double left = grid.margins.left;
  const double right = format.width_pt() - grid.margins.right;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    PlacedLine p;
    p.text = lines[i];
    p.width = measurer.width(lines[i], state);
    switch (text_align) {
      case TextAlign::Left: p.x = left; break;
      case TextAlign::Centre: p.x = left + (right - left - p.width) / 2.0; break;
      case TextAlign::Right: p.x = right - p.width; break;
    }
    p.top = grid.margins.top + static_cast<double>(i) * state.leading;
    p.baseline = p.top + 0.5 * (state.leading - state.size) + 0.78 * state.size;
    placed.push_back(std::move(p));
  }
  return placed;
}

Composition typeset(const LinePlan& plan, const PosterStyle& style, const StyleConfig& config, Rng& rng,
                    const TextMeasurer& measurer) {
  const auto start = std::chrono::steady_clock::now();
  if (plan.lines.empty()) throw Error(ErrorCode::ValidationError, "nothing to typeset", "lines");
  const TypefaceDef* typeface = config.find_typeface(style.typeface_id);
  if (!typeface) throw Error(ErrorCode::ValidationError, "unknown typeface '" + style.typeface_id + "'", "typeface_id");

  Composition c;
  c.grid = initial_grid(style.format, static_cast<int>(plan.lines.size()), config.layout);
  c.font = initial_state(*typeface, c.grid);
  const bool variable = typeface->has_variable_axes();
  const int cap = config.layout.attempt_cap;

  while (!fits(plan.lines, c.font, c.grid, style.format, measurer)) {
    if (c.operations_used >= cap)
      throw Error(ErrorCode::AttemptCapExceeded, "no fit within " + std::to_string(cap) + " operations");
    const bool can_size = c.font.leading > typeface->min_row_height + kAxisEpsilon;
    const bool can_axis = has_movable_axis(c.font, *typeface);
    if (!can_size && !can_axis)
      throw Error(ErrorCode::MinRowHeightUnreachable, "minimum row height reached with every axis at its minimum");

    Operation op;
    op.kind = variable && rng.index(2) == 1 ? Operation::Kind::Axis : Operation::Kind::Size;
    if (op.kind == Operation::Kind::Axis && !can_axis) op.kind = Operation::Kind::Size;
    if (op.kind == Operation::Kind::Size && !can_size) op.kind = Operation::Kind::Axis;

    if (op.kind == Operation::Kind::Size) {
      SizeStep step = apply_size_modifier(c.font, c.grid, *typeface, style.box_align);
      c.grid = step.grid;
      FontState reset = maybe_reset_axes(step.state, *typeface);
      op.reset = reset.axes != step.state.axes;
      c.font = std::move(reset);
    } else {
      const FontState before = c.font;
      c.font = apply_axis_modifier(c.font, *typeface, rng);
      for (const auto& [tag, value] : c.font.axes)
        if (before.axis(tag, value) != value) op.axis = tag;
    }
    c.trace.push_back(std::move(op));
    ++c.operations_used;
  }

  c.lines = place_lines(plan.lines, c.font, c.grid, style.format, style.text_align, measurer);
  c.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return c;
}

bool contained(const Composition& composition, const PosterFormat& format) {
  const double w = format.width_pt();
  const double h = format.height_pt();
  return std::all_of(composition.lines.begin(), composition.lines.end(), [&](const PlacedLine& l) {
    return l.x >= -kFitEpsilon && l.x + l.width <= w + kFitEpsilon && l.top >= -kFitEpsilon &&
           l.top + composition.font.leading <= h + kFitEpsilon;
  });
}

}  // namespace affiche
