#include "affiche/classify.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "affiche/error.hpp"

namespace affiche {

namespace {

std::string lower_ascii(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Strips ASCII punctuation from both ends, keeps inner apostrophes/hyphens.
std::string normalize_token(std::string_view w) {
  std::size_t b = 0;
  std::size_t e = w.size();
  auto punct = [](char c) { return c >= 0 && std::ispunct(static_cast<unsigned char>(c)); };
  while (b < e && punct(w[b])) ++b;
  while (e > b && punct(w[e - 1])) --e;
  return lower_ascii(std::string(w.substr(b, e - b)));
}

}  // namespace

std::vector<std::string> scoring_tokens(std::string_view text, const TweetMeta& meta) {
  std::vector<std::string> tokens;
  for (const std::string& w : split_words(text)) {
    std::string t = normalize_token(w);
    if (!t.empty()) tokens.push_back(std::move(t));
  }
  for (const auto& [emoji, emoji_name] : meta.emojis)
    for (const std::string& w : split_words(emoji_name)) tokens.push_back(normalize_token(w));
  return tokens;
}

void LexiconScorer::add(std::string token, Emotion e, double score) {
  entries_.emplace(lower_ascii(std::move(token)), Entry{e, score});
}

LexiconScorer LexiconScorer::from_tsv(std::string_view contents) {
  LexiconScorer scorer;
  std::istringstream in{std::string(contents)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::string where = "lexicon:" + std::to_string(line_no);
    std::istringstream fields(line);
    std::string token, emotion, score;
    if (!std::getline(fields, token, '\t') || !std::getline(fields, emotion, '\t') ||
        !std::getline(fields, score, '\t'))
      throw Error(ErrorCode::ParseError, "expected token<TAB>emotion<TAB>score", where);
    auto e = parse_emotion(emotion);
    if (!e) throw Error(ErrorCode::ParseError, "unknown emotion '" + emotion + "'", where);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(score, &used);
      if (used != score.size()) throw std::invalid_argument(score);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "bad score '" + score + "'", where);
    }
    scorer.add(token, *e, value);
  }
  return scorer;
}

LexiconScorer LexiconScorer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open lexicon", path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_tsv(buf.str());
}

EmotionScores LexiconScorer::score(std::string_view text, const TweetMeta& meta) const {
  EmotionScores sum{};
  std::array<int, kEmotionCount> hits{};
  for (const std::string& token : scoring_tokens(text, meta)) {
    auto [lo, hi] = entries_.equal_range(token);
    for (auto it = lo; it != hi; ++it) {
      sum[index_of(it->second.emotion)] += it->second.score;
      ++hits[index_of(it->second.emotion)];
    }
  }
  EmotionScores out{};
  for (std::size_t i = 0; i < kEmotionCount; ++i) out[i] = hits[i] ? sum[i] / hits[i] : 0.0;
  return out;
}

HttpScorer::HttpScorer(std::string url, double timeout_s) : timeout_s_(timeout_s) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error(ErrorCode::ScorerFailure, "scorer url needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

EmotionScores HttpScorer::score(std::string_view text, const TweetMeta&) const {
  httplib::Client client(scheme_host_port_);
  const auto seconds = static_cast<time_t>(timeout_s_);
  const auto micros = static_cast<time_t>((timeout_s_ - seconds) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  const nlohmann::json body = {{"text", std::string(text)}};
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) throw Error(ErrorCode::ScorerFailure, "request failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw Error(ErrorCode::ScorerFailure, "scorer returned HTTP " + std::to_string(res->status));
  EmotionScores out{};
  try {
    const auto j = nlohmann::json::parse(res->body);
    const auto& scores = j.at("scores");
    for (auto it = scores.begin(); it != scores.end(); ++it) {
      auto e = parse_emotion(it.key());
      if (!e) throw Error(ErrorCode::ScorerFailure, "unknown emotion '" + it.key() + "' in response");
      out[index_of(*e)] = it.value().get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ScorerFailure, std::string("malformed response: ") + e.what());
  }
  return out;
}

EmotionProfile classify(std::string_view text, const EmotionScorer& scorer, double threshold,
                        const TweetMeta& meta) {
  return make_profile(scorer.score(text, meta), threshold);
}

}  // namespace affiche
