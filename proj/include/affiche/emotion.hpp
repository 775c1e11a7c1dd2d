#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace affiche {

// Plutchik's eight basic emotions in canonical (alphabetical) order. The
// order doubles as the tie-break for equal scores.
enum class Emotion : std::size_t {
  Anger,
  Anticipation,
  Disgust,
  Fear,
  Joy,
  Sadness,
  Surprise,
  Trust,
};

inline constexpr std::size_t kEmotionCount = 8;

inline constexpr std::array<Emotion, kEmotionCount> kEmotions = {
    Emotion::Anger, Emotion::Anticipation, Emotion::Disgust, Emotion::Fear,
    Emotion::Joy,   Emotion::Sadness,      Emotion::Surprise, Emotion::Trust,
};

std::string_view name(Emotion e);
std::optional<Emotion> parse_emotion(std::string_view s);

constexpr std::size_t index_of(Emotion e) { return static_cast<std::size_t>(e); }

using EmotionScores = std::array<double, kEmotionCount>;

struct EmotionProfile {
  EmotionScores scores{};
  std::vector<Emotion> predominant;  // descending by score
  bool neutral = true;

  double score(Emotion e) const { return scores[index_of(e)]; }

  bool operator==(const EmotionProfile&) const = default;
};

// Emotions with score >= threshold, descending by score; equal scores keep
// canonical order.
std::vector<Emotion> predominant(const EmotionScores& scores, double threshold);

EmotionProfile make_profile(const EmotionScores& scores, double threshold);

}  // namespace affiche
