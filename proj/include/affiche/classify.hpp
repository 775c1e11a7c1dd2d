#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "affiche/emotion.hpp"
#include "affiche/text.hpp"

namespace affiche {

class EmotionScorer {
 public:
  virtual ~EmotionScorer() = default;
  // Raw scores for a feature-cleaned text; `meta` gives access to extracted
  // features (emoji names etc.).
  virtual EmotionScores score(std::string_view text, const TweetMeta& meta) const = 0;
};

// Per-token emotion associations. An emotion's score is the mean association
// over the tokens that carry that emotion; emoji names count as tokens.
class LexiconScorer final : public EmotionScorer {
 public:
  struct Entry {
    Emotion emotion;
    double score;
  };

  LexiconScorer() = default;
  explicit LexiconScorer(std::multimap<std::string, Entry> entries) : entries_(std::move(entries)) {}

  // TSV lines `token<TAB>emotion<TAB>score`; '#' starts a comment line.
  static LexiconScorer from_tsv(std::string_view contents);
  static LexiconScorer load(const std::filesystem::path& path);

  void add(std::string token, Emotion e, double score);
  std::size_t size() const { return entries_.size(); }

  EmotionScores score(std::string_view text, const TweetMeta& meta) const override;

 private:
  std::multimap<std::string, Entry> entries_;
};

// Lowercased tokens of a cleaned text plus emoji-name words.
std::vector<std::string> scoring_tokens(std::string_view text, const TweetMeta& meta);

// Adapter for an external model served over HTTP. POSTs {"text": ...} to
// `url` and expects {"scores": {"joy": 0.7, ...}}. Failures raise
// Error(ScorerFailure) with the cause in the message.
class HttpScorer final : public EmotionScorer {
 public:
  explicit HttpScorer(std::string url, double timeout_s = 5.0);
  EmotionScores score(std::string_view text, const TweetMeta& meta) const override;

 private:
  std::string scheme_host_port_;
  std::string path_;
  double timeout_s_;
};

class Translator {
 public:
  virtual ~Translator() = default;
  virtual std::string to_english(std::string_view text, std::string_view lang) const = 0;
};

class IdentityTranslator final : public Translator {
 public:
  std::string to_english(std::string_view text, std::string_view) const override {
    return std::string(text);
  }
};

EmotionProfile classify(std::string_view text, const EmotionScorer& scorer, double threshold,
                        const TweetMeta& meta = {});

}  // namespace affiche
