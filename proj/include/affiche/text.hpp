#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "affiche/config.hpp"
#include "affiche/rng.hpp"

namespace affiche {

struct TweetMeta {
  std::vector<std::string> hashtags;
  std::vector<std::string> mentions;
  std::vector<std::string> urls;
  std::vector<std::pair<std::string, std::string>> emojis;  // (emoji, name)

  bool operator==(const TweetMeta&) const = default;
};

struct Tweet {
  std::string id;
  std::string text;
  double created_at = 0.0;  // seconds since the Unix epoch, UTC
  std::optional<std::string> lang;
  TweetMeta meta;
};

struct Features {
  TweetMeta meta;
  std::string cleaned;
};

// Token grammar:
//   url      := ("http://" | "https://" | "www.") non-space+
//   hashtag  := "#" word-char+       (word-char: ASCII alnum, '_', or non-ASCII letter bytes)
//   mention  := "@" word-char+
// URLs are dropped from the cleaned text, hashtag/mention sigils are
// stripped, emoji are looked up in the bundled table and removed, and
// whitespace is collapsed.
Features extract_features(std::string_view text);

// Bundled emoji table lookup; nullopt when the code point is unknown.
std::optional<std::string_view> emoji_name(char32_t code_point);

std::vector<std::string> split_words(std::string_view text);

// Sentence boundary detection over . ! ? and the ellipsis, honouring the
// bundled abbreviation list, single-letter initials and decimal numbers.
std::vector<std::string> split_sentences(std::string_view text);

bool is_abbreviation(std::string_view word);

struct LinePlan {
  std::vector<std::string> lines;
  std::vector<int> word_counts;

  bool operator==(const LinePlan&) const = default;
};

// Splits sentences longer than max_words into chunks of [min_words, max_words]
// words, never breaking after a small word unless unavoidable. Among valid
// chunk lengths the choice is uniform. Relaxes the small-word rule first and
// the upper bound second when no valid split exists.
LinePlan divide_lines(const std::vector<std::string>& sentences, Rng& rng,
                      const LineDivision& config);

// Word length ignoring leading/trailing punctuation, in code points.
int core_length(std::string_view word);

}  // namespace affiche
