#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "affiche/colour.hpp"
#include "affiche/emotion.hpp"
#include "affiche/error.hpp"
#include "affiche/rng.hpp"

namespace affiche {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::ScorerFailure: return "ScorerFailure";
    case ErrorCode::AllZeroWeights: return "AllZeroWeights";
    case ErrorCode::EmptyFormatList: return "EmptyFormatList";
    case ErrorCode::StyleProfileMismatch: return "StyleProfileMismatch";
    case ErrorCode::AttemptCapExceeded: return "AttemptCapExceeded";
    case ErrorCode::MinRowHeightUnreachable: return "MinRowHeightUnreachable";
    case ErrorCode::MinRowHeight: return "MinRowHeight";
    case ErrorCode::NoMovableAxis: return "NoMovableAxis";
    case ErrorCode::FontResourceMissing: return "FontResourceMissing";
    case ErrorCode::InvalidBarCount: return "InvalidBarCount";
    case ErrorCode::StoreUnavailable: return "StoreUnavailable";
    case ErrorCode::PipelineFailure: return "PipelineFailure";
  }
  return "Unknown";
}

static std::string decorate(ErrorCode code, const std::string& message, const std::string& where) {
  std::string out(to_string(code));
  if (!where.empty()) out += " [" + where + "]";
  out += ": " + message;
  return out;
}

Error::Error(ErrorCode code, const std::string& message, std::string where)
    : std::runtime_error(decorate(code, message, where)), code_(code), where_(std::move(where)) {}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t Rng::index(std::size_t n) {
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

namespace {
constexpr std::array<std::string_view, kEmotionCount> kEmotionNames = {
    "anger", "anticipation", "disgust", "fear", "joy", "sadness", "surprise", "trust"};
}

std::string_view name(Emotion e) { return kEmotionNames[index_of(e)]; }

std::optional<Emotion> parse_emotion(std::string_view s) {
  for (Emotion e : kEmotions)
    if (kEmotionNames[index_of(e)] == s) return e;
  return std::nullopt;
}

std::vector<Emotion> predominant(const EmotionScores& scores, double threshold) {
  std::vector<Emotion> out;
  for (Emotion e : kEmotions)
    if (scores[index_of(e)] >= threshold) out.push_back(e);
  std::stable_sort(out.begin(), out.end(), [&](Emotion a, Emotion b) {
    return scores[index_of(a)] > scores[index_of(b)];
  });
  return out;
}

EmotionProfile make_profile(const EmotionScores& scores, double threshold) {
  EmotionProfile p;
  for (std::size_t i = 0; i < kEmotionCount; ++i) {
    const double s = scores[i];
    p.scores[i] = std::isfinite(s) ? std::clamp(s, 0.0, 1.0) : 0.0;
  }
  p.predominant = predominant(p.scores, threshold);
  p.neutral = p.predominant.empty();
  return p;
}

namespace {
int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

double linearize(std::uint8_t channel) {
  const double c = channel / 255.0;
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}
}  // namespace

Rgb parse_hex(std::string_view hex) {
  auto fail = [&] { return Error(ErrorCode::ParseError, "invalid colour '" + std::string(hex) + "'"); };
  if (hex.empty() || hex.front() != '#') throw fail();
  hex.remove_prefix(1);
  std::array<int, 6> d{};
  if (hex.size() == 3) {
    for (int i = 0; i < 3; ++i) d[2 * i] = d[2 * i + 1] = hex_digit(hex[i]);
  } else if (hex.size() == 6) {
    for (int i = 0; i < 6; ++i) d[i] = hex_digit(hex[i]);
  } else {
    throw fail();
  }
  if (std::any_of(d.begin(), d.end(), [](int v) { return v < 0; })) throw fail();
  return Rgb{static_cast<std::uint8_t>(d[0] * 16 + d[1]), static_cast<std::uint8_t>(d[2] * 16 + d[3]),
             static_cast<std::uint8_t>(d[4] * 16 + d[5])};
}

std::string to_hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

double relative_luminance(Rgb c) {
  return 0.2126 * linearize(c.r) + 0.7152 * linearize(c.g) + 0.0722 * linearize(c.b);
}

double contrast_ratio(Rgb a, Rgb b) {
  const double la = relative_luminance(a);
  const double lb = relative_luminance(b);
  return (std::max(la, lb) + 0.05) / (std::min(la, lb) + 0.05);
}

Rgb mix(Rgb a, Rgb b, double t) {
  auto lerp = [t](std::uint8_t x, std::uint8_t y) {
    return static_cast<std::uint8_t>(std::lround(x + (static_cast<double>(y) - x) * t));
  };
  return Rgb{lerp(a.r, b.r), lerp(a.g, b.g), lerp(a.b, b.b)};
}

}  // namespace affiche
