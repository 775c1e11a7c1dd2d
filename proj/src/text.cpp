#include "affiche/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "utf8.hpp"

namespace affiche {

namespace {

using detail::Decoded;
constexpr auto decode = detail::decode_utf8;

bool is_emoji(char32_t c) {
  return (c >= 0x1F000 && c <= 0x1FAFF) || (c >= 0x2600 && c <= 0x27BF) || c == 0xFE0F || c == 0x200D ||
         (c >= 0x2B00 && c <= 0x2BFF) || c == 0x2764;
}

bool is_word_char(char32_t c) {
  if (c < 0x80) return std::isalnum(static_cast<int>(c)) || c == '_';
  // Latin-1 supplement and beyond, minus general punctuation and emoji.
  if (c >= 0x2000 && c <= 0x206F) return false;
  if (c == 0xA0 || c == 0xAB || c == 0xBB || c == 0xBF || c == 0xA1) return false;
  return !is_emoji(c);
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  return true;
}

struct EmojiName {
  char32_t cp;
  std::string_view name;
};

// Subset of the Unicode CLDR short names, sorted by code point.
constexpr std::array<EmojiName, 96> kEmojiTable = {{
    {0x2600, "sun"},
    {0x2601, "cloud"},
    {0x2614, "umbrella with rain drops"},
    {0x2615, "hot beverage"},
    {0x2639, "frowning face"},
    {0x263A, "smiling face"},
    {0x26A0, "warning"},
    {0x26A1, "high voltage"},
    {0x26BD, "soccer ball"},
    {0x2705, "check mark button"},
    {0x270C, "victory hand"},
    {0x2728, "sparkles"},
    {0x274C, "cross mark"},
    {0x2753, "red question mark"},
    {0x2757, "red exclamation mark"},
    {0x2764, "red heart"},
    {0x1F305, "sunrise"},
    {0x1F308, "rainbow"},
    {0x1F31E, "sun with face"},
    {0x1F337, "tulip"},
    {0x1F339, "rose"},
    {0x1F381, "wrapped gift"},
    {0x1F382, "birthday cake"},
    {0x1F389, "party popper"},
    {0x1F38A, "confetti ball"},
    {0x1F393, "graduation cap"},
    {0x1F3B6, "musical notes"},
    {0x1F3C6, "trophy"},
    {0x1F440, "eyes"},
    {0x1F44B, "waving hand"},
    {0x1F44C, "ok hand"},
    {0x1F44D, "thumbs up"},
    {0x1F44E, "thumbs down"},
    {0x1F44F, "clapping hands"},
    {0x1F494, "broken heart"},
    {0x1F495, "two hearts"},
    {0x1F496, "sparkling heart"},
    {0x1F499, "blue heart"},
    {0x1F49A, "green heart"},
    {0x1F49B, "yellow heart"},
    {0x1F49C, "purple heart"},
    {0x1F4A5, "collision"},
    {0x1F4A9, "pile of poo"},
    {0x1F4AA, "flexed biceps"},
    {0x1F4AF, "hundred points"},
    {0x1F525, "fire"},
    {0x1F600, "grinning face"},
    {0x1F601, "beaming face with smiling eyes"},
    {0x1F602, "face with tears of joy"},
    {0x1F603, "grinning face with big eyes"},
    {0x1F604, "grinning face with smiling eyes"},
    {0x1F605, "grinning face with sweat"},
    {0x1F606, "grinning squinting face"},
    {0x1F609, "winking face"},
    {0x1F60A, "smiling face with smiling eyes"},
    {0x1F60D, "smiling face with heart-eyes"},
    {0x1F60E, "smiling face with sunglasses"},
    {0x1F610, "neutral face"},
    {0x1F612, "unamused face"},
    {0x1F614, "pensive face"},
    {0x1F616, "confounded face"},
    {0x1F618, "face blowing a kiss"},
    {0x1F61E, "disappointed face"},
    {0x1F620, "angry face"},
    {0x1F621, "enraged face"},
    {0x1F622, "crying face"},
    {0x1F624, "face with steam from nose"},
    {0x1F625, "sad but relieved face"},
    {0x1F628, "fearful face"},
    {0x1F629, "weary face"},
    {0x1F62D, "loudly crying face"},
    {0x1F630, "anxious face with sweat"},
    {0x1F631, "face screaming in fear"},
    {0x1F632, "astonished face"},
    {0x1F633, "flushed face"},
    {0x1F637, "face with medical mask"},
    {0x1F642, "slightly smiling face"},
    {0x1F644, "face with rolling eyes"},
    {0x1F64C, "raising hands"},
    {0x1F64F, "folded hands"},
    {0x1F680, "rocket"},
    {0x1F910, "zipper-mouth face"},
    {0x1F914, "thinking face"},
    {0x1F91E, "crossed fingers"},
    {0x1F922, "nauseated face"},
    {0x1F923, "rolling on the floor laughing"},
    {0x1F92C, "face with symbols on mouth"},
    {0x1F92E, "face vomiting"},
    {0x1F970, "smiling face with hearts"},
    {0x1F973, "partying face"},
    {0x1F97A, "pleading face"},
    {0x1F97B, "sari"},
    {0x1F9D0, "face with monocle"},
    {0x1F9E1, "orange heart"},
    {0x1FA75, "light blue heart"},
    {0x1FAF6, "heart hands"},
}};

constexpr std::array<std::string_view, 40> kAbbreviations = {
    "mr.",  "mrs.",  "ms.",   "dr.",  "prof.", "sr.",   "jr.",   "st.",   "vs.",   "e.g.",
    "i.e.", "etc.",  "cf.",   "fig.", "no.",   "vol.",  "approx.", "dept.", "univ.", "av.",
    "jan.", "feb.",  "mar.",  "apr.", "jun.",  "jul.",  "aug.",  "sep.",  "sept.", "oct.",
    "nov.", "dec.",  "mt.",   "ft.",  "gen.",  "gov.",  "rev.",  "eng.",  "sto.",  "sta.",
};

constexpr std::string_view kClosers = "\"')]}";

std::string_view strip_closers(std::string_view w) {
  while (!w.empty()) {
    if (kClosers.find(w.back()) != std::string_view::npos) {
      w.remove_suffix(1);
    } else if (w.size() >= 3 && (w.substr(w.size() - 3) == "”" || w.substr(w.size() - 3) == "’")) {
      w.remove_suffix(3);
    } else {
      break;
    }
  }
  return w;
}

bool ends_sentence(std::string_view word, std::string_view next) {
  std::string_view w = strip_closers(word);
  if (w.empty()) return false;
  const bool ellipsis = w.size() >= 3 && w.substr(w.size() - 3) == "…";
  const char last = w.back();
  if (!ellipsis && last != '.' && last != '!' && last != '?') return false;
  if (last == '.' && !ellipsis) {
    while (!w.empty() && std::string_view("\"'([{").find(w.front()) != std::string_view::npos) w.remove_prefix(1);
    for (std::string_view q : {"“", "‘"})
      if (w.substr(0, q.size()) == q) w.remove_prefix(q.size());
    if (is_abbreviation(w)) return false;
    // Single-letter initial: "J."
    if (w.size() == 2 && std::isupper(static_cast<unsigned char>(w[0]))) return false;
    // Ordinal-style number followed by lower-case continuation: "no 3. and".
    if (std::all_of(w.begin(), w.end() - 1, [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) &&
        !next.empty() && std::islower(static_cast<unsigned char>(next[0])))
      return false;
  }
  return true;
}

}  // namespace

std::optional<std::string_view> emoji_name(char32_t code_point) {
  auto it = std::lower_bound(kEmojiTable.begin(), kEmojiTable.end(), code_point,
                             [](const EmojiName& e, char32_t cp) { return e.cp < cp; });
  if (it != kEmojiTable.end() && it->cp == code_point) return it->name;
  return std::nullopt;
}

bool is_abbreviation(std::string_view word) {
  std::string lower(word);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) != kAbbreviations.end();
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

Features extract_features(std::string_view text) {
  Features f;
  std::vector<std::string> kept;
  for (const std::string& token : split_words(text)) {
    if (starts_with_ci(token, "http://") || starts_with_ci(token, "https://") || starts_with_ci(token, "www.")) {
      std::string_view url = token;
      while (!url.empty() && std::string_view(".,;:!?)\"'").find(url.back()) != std::string_view::npos)
        url.remove_suffix(1);
      f.meta.urls.emplace_back(url);
      continue;
    }
    std::string out;
    bool prev_word = false;
    std::size_t i = 0;
    while (i < token.size()) {
      const Decoded d = decode(token, i);
      if (is_emoji(d.cp)) {
        if (auto n = emoji_name(d.cp)) f.meta.emojis.emplace_back(token.substr(i, d.len), std::string(*n));
        i += d.len;
        prev_word = false;
        continue;
      }
      if ((d.cp == '#' || d.cp == '@') && !prev_word && i + 1 < token.size() &&
          is_word_char(decode(token, i + 1).cp)) {
        std::size_t j = i + 1;
        while (j < token.size()) {
          const Decoded w = decode(token, j);
          if (!is_word_char(w.cp)) break;
          j += w.len;
        }
        std::string tag = token.substr(i + 1, j - i - 1);
        (d.cp == '#' ? f.meta.hashtags : f.meta.mentions).push_back(tag);
        out += tag;
        i = j;
        prev_word = true;
        continue;
      }
      out.append(token, i, d.len);
      prev_word = is_word_char(d.cp);
      i += d.len;
    }
    if (!out.empty()) kept.push_back(std::move(out));
  }
  for (std::size_t k = 0; k < kept.size(); ++k) {
    if (k) f.cleaned += ' ';
    f.cleaned += kept[k];
  }
  return f;
}

std::vector<std::string> split_sentences(std::string_view text) {
  const std::vector<std::string> words = split_words(text);
  std::vector<std::string> sentences;
  std::string current;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!current.empty()) current += ' ';
    current += words[i];
    const std::string_view next = i + 1 < words.size() ? std::string_view(words[i + 1]) : std::string_view();
    if (ends_sentence(words[i], next)) {
      sentences.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

int core_length(std::string_view word) {
  std::size_t b = 0;
  std::size_t e = word.size();
  auto punct = [](char c) { return c >= 0 && std::ispunct(static_cast<unsigned char>(c)); };
  while (b < e && punct(word[b])) ++b;
  while (e > b && punct(word[e - 1])) --e;
  int n = 0;
  for (std::size_t i = b; i < e; i += decode(word, i).len) ++n;
  return n;
}

namespace {

// Chunk lengths for words[p..n) at a relaxation level:
// 0 = all rules, 1 = small-word rule dropped, 2 = upper bound dropped too.
std::vector<int> chunk_words(const std::vector<std::string>& words, Rng& rng, const LineDivision& cfg) {
  const int n = static_cast<int>(words.size());
  std::vector<bool> small(n);
  for (int i = 0; i < n; ++i) small[i] = core_length(words[i]) <= cfg.small_word_max_chars;

  for (int level = 0; level < 3; ++level) {
    const int hi = level == 2 ? n : cfg.max_words;
    auto valid_cut = [&](int end) { return end == n || level >= 1 || !small[end - 1]; };
    std::vector<bool> ok(n + 1, false);
    ok[n] = true;
    for (int p = n - 1; p >= 0; --p)
      for (int k = cfg.min_words; k <= hi && p + k <= n && !ok[p]; ++k)
        ok[p] = ok[p + k] && valid_cut(p + k);
    if (!ok[0]) continue;

    std::vector<int> chunks;
    int p = 0;
    while (p < n) {
      std::vector<int> options;
      for (int k = cfg.min_words; k <= hi && p + k <= n; ++k)
        if (ok[p + k] && valid_cut(p + k)) options.push_back(k);
      const int k = options[rng.index(options.size())];
      chunks.push_back(k);
      p += k;
    }
    return chunks;
  }
  return {n};
}

}  // namespace

LinePlan divide_lines(const std::vector<std::string>& sentences, Rng& rng, const LineDivision& config) {
  LinePlan plan;
  for (const std::string& sentence : sentences) {
    const std::vector<std::string> words = split_words(sentence);
    if (words.empty()) continue;
    std::vector<int> chunks;
    if (static_cast<int>(words.size()) <= config.max_words)
      chunks = {static_cast<int>(words.size())};
    else
      chunks = chunk_words(words, rng, config);
    std::size_t w = 0;
    for (int k : chunks) {
      std::string line;
      for (int j = 0; j < k; ++j, ++w) {
        if (j) line += ' ';
        line += words[w];
      }
      plan.lines.push_back(std::move(line));
      plan.word_counts.push_back(k);
    }
  }
  return plan;
}

}  // namespace affiche
