#include "affiche/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>

#include "affiche/error.hpp"
#include "affiche/font_metrics.hpp"
#include "affiche/render.hpp"
#include "utf8.hpp"

namespace affiche {

using nlohmann::json;

namespace {

int code_points(std::string_view s) {
  int n = 0;
  for (std::size_t i = 0; i < s.size(); i += detail::decode_utf8(s, i).len) ++n;
  return n;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

enum Stream : std::uint64_t { kLines = 1, kStyle = 2, kTypeset = 3, kMusic = 4 };

}  // namespace

std::vector<double> recency_weights(std::span<const double> created_at, double now, double half_life) {
  std::vector<double> w;
  w.reserve(created_at.size());
  for (double t : created_at) w.push_back(std::exp2(-(now - t) / half_life));
  return w;
}

MemoryStore::MemoryStore(std::vector<Tweet> tweets) : tweets_(std::move(tweets)) {
  std::stable_sort(tweets_.begin(), tweets_.end(),
                   [](const Tweet& a, const Tweet& b) { return a.created_at > b.created_at; });
  for (std::size_t i = 0; i < tweets_.size(); ++i) by_id_.emplace(tweets_[i].id, i);
}

std::vector<const Tweet*> MemoryStore::newest(std::size_t n, double now,
                                              const std::function<bool(const std::string&)>& exclude) const {
  std::vector<const Tweet*> out;
  for (const Tweet& t : tweets_) {
    if (out.size() >= n) break;
    if (t.created_at > now) continue;
    if (exclude && exclude(t.id)) continue;
    out.push_back(&t);
  }
  return out;
}

const Tweet* MemoryStore::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &tweets_[it->second];
}

double parse_iso8601(std::string_view s) {
  int y, mo, d, h = 0, mi = 0;
  double sec = 0.0;
  int consumed = 0;
  const std::string str(s);
  if (std::sscanf(str.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &consumed) != 3)
    throw Error(ErrorCode::ParseError, "bad timestamp '" + str + "'");
  std::size_t pos = static_cast<std::size_t>(consumed);
  if (pos < str.size() && (str[pos] == 'T' || str[pos] == ' ')) {
    int n = 0;
    if (std::sscanf(str.c_str() + pos + 1, "%2d:%2d:%lf%n", &h, &mi, &sec, &n) != 3)
      throw Error(ErrorCode::ParseError, "bad timestamp '" + str + "'");
    pos += 1 + static_cast<std::size_t>(n);
  }
  double offset = 0.0;
  if (pos < str.size()) {
    if (str[pos] == 'Z' && pos + 1 == str.size()) {
      // UTC
    } else if ((str[pos] == '+' || str[pos] == '-') && str.size() - pos == 6 && str[pos + 3] == ':') {
      const int oh = std::stoi(str.substr(pos + 1, 2));
      const int om = std::stoi(str.substr(pos + 4, 2));
      offset = (str[pos] == '-' ? -1 : 1) * (oh * 3600.0 + om * 60.0);
    } else {
      throw Error(ErrorCode::ParseError, "bad timestamp '" + str + "'");
    }
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec >= 61.0 || sec < 0.0)
    throw Error(ErrorCode::ParseError, "bad timestamp '" + str + "'");
  const double days = static_cast<double>(sys_days(ymd).time_since_epoch().count());
  return days * 86400.0 + h * 3600.0 + mi * 60.0 + sec - offset;
}

std::string format_iso8601(double t) {
  using namespace std::chrono;
  const auto whole = static_cast<long long>(std::floor(t));
  const sys_days day{days{static_cast<int>(std::floor(whole / 86400.0))}};
  const year_month_day ymd{day};
  const long long rem = whole - static_cast<long long>(day.time_since_epoch().count()) * 86400;
  const int secs = static_cast<int>(rem);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), secs / 3600, secs / 60 % 60,
                secs % 60);
  return buf;
}

std::vector<Tweet> read_corpus_jsonl(std::istream& in) {
  std::vector<Tweet> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "corpus:" + std::to_string(line_no);
    try {
      const json j = json::parse(line);
      Tweet t;
      t.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      t.text = j.at("text").get<std::string>();
      t.created_at = parse_iso8601(j.at("created_at").get<std::string>());
      if (j.contains("lang") && !j.at("lang").is_null()) t.lang = j.at("lang").get<std::string>();
      out.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, e.what(), where);
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), where);
    }
  }
  return out;
}

std::vector<Tweet> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open corpus", path.string());
  return read_corpus_jsonl(in);
}

TickResult tick(SelectionState& state, const TweetStore& store, double now) {
  TickResult r;
  const bool capped_at_start = state.active.size() >= kMaxActive;
  state.clock = now;

  for (auto it = state.active.begin(); it != state.active.end();) {
    if (now > it->selected_at + it->lifespan) {
      state.seen[it->id] = ItemState::Expired;
      r.expired.push_back(it->id);
      it = state.active.erase(it);
    } else {
      ++it;
    }
  }
  if (capped_at_start || state.active.size() >= kMaxActive) return r;

  std::vector<const Tweet*> candidates;
  try {
    candidates = store.newest(kCandidateCount, now, [&](const std::string& id) { return state.seen.count(id) > 0; });
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::StoreUnavailable, e.what());
  }
  if (candidates.empty()) return r;

  std::vector<double> created;
  for (const Tweet* t : candidates) created.push_back(t->created_at);
  const std::vector<double> weights = recency_weights(created, now, state.half_life);
  const Tweet* chosen = candidates[roulette_select(weights, state.rng)];

  FeedItem item;
  item.id = chosen->id;
  item.state = ItemState::Selected;
  item.selected_at = now;
  item.lifespan = state.rng.uniform(kMinLifespan, kMaxLifespan);
  state.seen[item.id] = ItemState::Selected;
  state.active.push_back(item);
  r.selected = item;
  return r;
}

PipelineResult run_pipeline(const Tweet& item, const Engine& engine, std::uint64_t seed,
                            const PipelineOptions& options) {
  try {
    const StyleConfig& cfg = engine.config;
    const Rng root(seed);
    PipelineResult out;
    out.item_id = item.id;

    const std::string english = engine.translator->to_english(item.text, item.lang.value_or("en"));
    const Features features = extract_features(english);
    if (!engine.scorer) throw Error(ErrorCode::ScorerFailure, "no emotion scorer configured");
    out.profile = classify(features.cleaned, *engine.scorer, cfg.predominance_threshold, features.meta);

    Rng line_rng = root.fork(kLines);
    out.plan = divide_lines(split_sentences(features.cleaned), line_rng, cfg.line_division);
    if (out.plan.lines.empty()) throw Error(ErrorCode::ValidationError, "text has no words", "text");

    Rng style_rng = root.fork(kStyle);
    out.style = select_style(out.profile, style_rng, cfg);

    Rng typeset_rng = root.fork(kTypeset);
    out.composition = typeset(out.plan, out.style, cfg, typeset_rng, engine.measurer_for(out.style.typeface_id));

    const TypefaceDef& typeface = *cfg.find_typeface(out.style.typeface_id);
    if (options.render)
      out.svg = render_svg(out.style, out.composition, typeface, {options.dpi > 0.0 ? options.dpi : cfg.dpi});

    if (options.music) {
      Rng music_rng = root.fork(kMusic);
      const std::optional<Emotion> mood =
          out.profile.predominant.empty() ? std::nullopt : std::optional<Emotion>(out.profile.predominant.front());
      const auto events = generate(mood, cfg.music.bars, music_rng, cfg.music);
      out.midi = emit_midi(events, cfg.music.row(mood));
    }

    RunStats& s = out.stats;
    s.text_id = item.id;
    s.chars = code_points(item.text);
    s.lines = static_cast<int>(out.plan.lines.size());
    s.operations = out.composition.operations_used;
    s.elapsed_s = out.composition.elapsed_s;
    for (const std::string& l : out.plan.lines) s.max_line_chars = std::max(s.max_line_chars, code_points(l));
    s.final_size = out.composition.font.size;
    s.final_weight = out.composition.font.axis(kWeightAxis, 400.0);
    s.final_stretch = out.composition.font.axis(kStretchAxis, 100.0);
    s.format = out.style.format.name;
    s.background = std::string(name(style_of(out.style.background)));
    s.contained = contained(out.composition, out.style.format);
    s.legible = is_legible(out.style.background, cfg);
    return out;
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), item.id);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::PipelineFailure, e.what(), item.id);
  }
}

std::uint64_t item_seed(std::uint64_t seed, std::string_view item_id) { return splitmix64(seed ^ fnv1a(item_id)); }

const TextMeasurer& Engine::measurer_for(const std::string& typeface_id) const {
  auto it = typeface_measurers.find(typeface_id);
  return it != typeface_measurers.end() ? *it->second : *measurer;
}

Engine load_engine(const std::filesystem::path& config_dir, bool real_metrics) {
  Engine engine;
  engine.config = load_config_dir(config_dir);
  engine.scorer = std::make_shared<LexiconScorer>(LexiconScorer::load(config_dir / "lexicon.tsv"));
  if (real_metrics) {
    for (TypefaceDef& t : engine.config.typefaces) {
      if (!t.font_file) continue;
      std::filesystem::path path(*t.font_file);
      if (path.is_relative()) path = config_dir / path;
      if (!std::filesystem::exists(path))
        throw Error(ErrorCode::FontResourceMissing, "font file not found", path.string());
      t.font_file = path.string();
      engine.typeface_measurers[t.id] = std::make_shared<FontMeasurer>(std::make_shared<FontFile>(FontFile::load(path)));
    }
  }
  return engine;
}

std::filesystem::path resolve_config_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kConfigDirEnv); env && *env) return env;
  return "config";
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

namespace {

GroupSummary summarize(std::string group, const std::vector<const RunStats*>& rows) {
  GroupSummary g;
  g.group = std::move(group);
  g.count = rows.size();
  std::vector<double> ops, secs;
  for (const RunStats* r : rows) {
    if (r->status != "ok") continue;
    ops.push_back(r->operations);
    secs.push_back(r->elapsed_s);
  }
  if (ops.empty()) return g;
  g.mean_ops = mean(ops);
  g.median_ops = median(ops);
  g.min_ops = static_cast<int>(*std::min_element(ops.begin(), ops.end()));
  g.max_ops = static_cast<int>(*std::max_element(ops.begin(), ops.end()));
  g.mean_s = mean(secs);
  g.median_s = median(secs);
  return g;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

BenchReport run_bench(const std::vector<std::string>& texts, int runs, const Engine& engine, std::uint64_t seed) {
  if (runs < 1) throw Error(ErrorCode::ValidationError, "runs must be >= 1", "runs");
  const auto start = std::chrono::steady_clock::now();
  BenchReport report;
  PipelineOptions options;
  options.music = false;
  options.render = false;
  for (std::size_t t = 0; t < texts.size(); ++t) {
    char id[16];
    std::snprintf(id, sizeof id, "t%02zu", t + 1);
    Tweet tweet;
    tweet.id = id;
    tweet.text = texts[t];
    for (int r = 0; r < runs; ++r) {
      const std::uint64_t run_seed = splitmix64(splitmix64(splitmix64(seed) + t) + static_cast<std::uint64_t>(r));
      try {
        report.rows.push_back(run_pipeline(tweet, engine, run_seed, options).stats);
      } catch (const Error& e) {
        RunStats failed;
        failed.text_id = id;
        failed.chars = code_points(tweet.text);
        failed.status = std::string(to_string(e.code()));
        report.rows.push_back(failed);
      }
    }
  }

  std::vector<const RunStats*> all;
  std::map<int, std::vector<const RunStats*>> by_lines;
  for (const RunStats& r : report.rows) {
    all.push_back(&r);
    if (r.status == "ok") by_lines[r.lines].push_back(&r);
  }
  report.summary.push_back(summarize("all", all));
  for (const auto& [lines, rows] : by_lines) report.summary.push_back(summarize(std::to_string(lines), rows));
  report.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void write_runs_csv(std::ostream& out, const BenchReport& report) {
  out << "text_id,chars,lines,operations,elapsed_s,max_line_chars,final_size,final_weight,final_stretch,format,"
         "background,contained,legible,status\n";
  char buf[256];
  for (const RunStats& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%.6f,%d,%.3f,%.1f,%.1f,", r.chars, r.lines, r.operations, r.elapsed_s,
                  r.max_line_chars, r.final_size, r.final_weight, r.final_stretch);
    out << csv_field(r.text_id) << ',' << buf << r.format << ',' << r.background << ',' << (r.contained ? 1 : 0)
        << ',' << (r.legible ? 1 : 0) << ',' << r.status << '\n';
  }
}

void write_summary_csv(std::ostream& out, const BenchReport& report) {
  out << "group,count,mean_ops,median_ops,min_ops,max_ops,mean_s,median_s\n";
  char buf[256];
  for (const GroupSummary& g : report.summary) {
    std::snprintf(buf, sizeof buf, "%zu,%.4f,%.4f,%d,%d,%.6f,%.6f", g.count, g.mean_ops, g.median_ops, g.min_ops,
                  g.max_ops, g.mean_s, g.median_s);
    out << g.group << ',' << buf << '\n';
  }
}

Installation::Installation(std::shared_ptr<const TweetStore> store, Engine engine, std::uint64_t seed,
                           double half_life)
    : store_(std::move(store)), engine_(std::move(engine)), seed_(seed) {
  if (!(half_life > 0.0)) throw Error(ErrorCode::ValidationError, "half-life must be positive", "half_life");
  state_.rng = Rng(seed);
  state_.half_life = half_life;
}

Installation::~Installation() = default;

TickResult Installation::step(double now) {
  std::lock_guard lock(mutex_);
  TickResult r = tick(state_, *store_, now);
  for (const std::string& id : r.expired) {
    active_.erase(id);
    pending_.erase(id);
  }
  if (r.selected) {
    const Tweet* tweet = store_->find(r.selected->id);
    Active a;
    a.item = *r.selected;
    const std::uint64_t seed = item_seed(seed_, r.selected->id);
    a.poster_file = svg_file_name(r.selected->id, seed);
    active_[a.item.id] = std::move(a);
    order_.push_back(r.selected->id);
    if (tweet) {
      pending_[r.selected->id] = std::async(std::launch::async, [tweet, seed, this] {
        return run_pipeline(*tweet, engine_, seed);
      });
    }
  }
  // Collect finished generations.
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->second.wait_for(std::chrono::seconds(0)) != std::future_status::ready) {
      ++it;
      continue;
    }
    auto found = active_.find(it->first);
    try {
      PipelineResult res = it->second.get();
      if (found != active_.end()) {
        found->second.predominant = res.profile.predominant;
        found->second.svg = std::move(res.svg);
        found->second.midi = std::move(res.midi);
        found->second.ready = true;
      }
    } catch (const Error& e) {
      if (found != active_.end()) found->second.error = e.what();
    }
    it = pending_.erase(it);
  }
  std::erase_if(order_, [&](const std::string& id) { return !active_.count(id); });
  return r;
}

void Installation::wait_idle() {
  std::lock_guard lock(mutex_);
  for (auto& [id, fut] : pending_) fut.wait();
}

json Installation::current() const {
  std::lock_guard lock(mutex_);
  json list = json::array();
  for (const std::string& id : order_) {
    const Active& a = active_.at(id);
    const Tweet* t = store_->find(id);
    json item;
    item["id"] = id;
    item["text"] = t ? t->text : "";
    json emotions = json::array();
    for (Emotion e : a.predominant) emotions.push_back(std::string(name(e)));
    item["predominant"] = emotions;
    item["poster"] = a.ready ? json(a.poster_file) : json(nullptr);
    item["selected_at"] = format_iso8601(a.item.selected_at);
    item["lifespan_s"] = a.item.lifespan;
    if (!a.error.empty()) item["error"] = a.error;
    list.push_back(item);
  }
  return list;
}

std::optional<std::string> Installation::poster(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = active_.find(id);
  if (it == active_.end() || !it->second.ready) return std::nullopt;
  return it->second.svg;
}

std::optional<std::vector<std::uint8_t>> Installation::audio(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = active_.find(id);
  if (it == active_.end() || !it->second.ready) return std::nullopt;
  return it->second.midi;
}

std::size_t Installation::active_count() const {
  std::lock_guard lock(mutex_);
  return active_.size();
}

}  // namespace affiche
