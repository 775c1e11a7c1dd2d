#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <span>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "affiche/classify.hpp"
#include "affiche/config.hpp"
#include "affiche/essys.hpp"
#include "affiche/rng.hpp"
#include "affiche/styling.hpp"
#include "affiche/text.hpp"
#include "affiche/typesetter.hpp"

namespace affiche {

inline constexpr std::size_t kMaxActive = 5;
inline constexpr std::size_t kCandidateCount = 20;
inline constexpr double kMinLifespan = 60.0;
inline constexpr double kMaxLifespan = 180.0;
inline constexpr double kDefaultHalfLife = 3600.0;

// weight_i = 2^(-age_i / half_life), ages in seconds.
std::vector<double> recency_weights(std::span<const double> created_at, double now,
                                    double half_life = kDefaultHalfLife);

// Read-only source of tweets. `newest` returns up to n items created at or
// before `now`, newest first, skipping ids for which `exclude` is true.
class TweetStore {
 public:
  virtual ~TweetStore() = default;
  virtual std::vector<const Tweet*> newest(std::size_t n, double now,
                                           const std::function<bool(const std::string&)>& exclude) const = 0;
  virtual const Tweet* find(const std::string& id) const = 0;
  virtual std::size_t size() const = 0;
};

class MemoryStore final : public TweetStore {
 public:
  explicit MemoryStore(std::vector<Tweet> tweets);
  std::vector<const Tweet*> newest(std::size_t n, double now,
                                   const std::function<bool(const std::string&)>& exclude) const override;
  const Tweet* find(const std::string& id) const override;
  std::size_t size() const override { return tweets_.size(); }
  const std::vector<Tweet>& tweets() const { return tweets_; }

 private:
  std::vector<Tweet> tweets_;  // sorted newest first
  std::unordered_map<std::string, std::size_t> by_id_;
};

// One object per line: {"id", "text", "created_at" (ISO-8601 UTC), "lang"?}.
std::vector<Tweet> read_corpus_jsonl(std::istream& in);
std::vector<Tweet> load_corpus(const std::filesystem::path& path);
// "2021-05-04T12:30:00Z" (fractional seconds and +hh:mm offsets accepted).
double parse_iso8601(std::string_view s);
std::string format_iso8601(double t);

enum class ItemState { Stored, Selected, Expired };

struct FeedItem {
  std::string id;
  ItemState state = ItemState::Stored;
  double selected_at = 0.0;
  double lifespan = 0.0;
};

struct SelectionState {
  std::vector<FeedItem> active;  // at most kMaxActive
  std::unordered_map<std::string, ItemState> seen;
  double clock = 0.0;
  double half_life = kDefaultHalfLife;
  Rng rng{0};
};

struct TickResult {
  std::vector<std::string> expired;
  std::optional<FeedItem> selected;
};

// Advances the clock to `now`, expires items past selected_at + lifespan and,
// unless the cap was met at tick start, selects at most one new item.
TickResult tick(SelectionState& state, const TweetStore& store, double now);

struct RunStats {
  std::string text_id;
  int chars = 0;
  int lines = 0;
  int operations = 0;
  double elapsed_s = 0.0;
  int max_line_chars = 0;
  double final_size = 0.0;
  double final_weight = 0.0;
  double final_stretch = 0.0;
  std::string format;
  std::string background;
  bool contained = false;
  bool legible = false;
  std::string status = "ok";  // or the error code name
};

struct PipelineResult {
  std::string item_id;
  EmotionProfile profile;
  LinePlan plan;
  PosterStyle style;
  Composition composition;
  std::string svg;
  std::vector<std::uint8_t> midi;
  RunStats stats;
};

struct PipelineOptions {
  bool music = true;
  bool render = true;
  double dpi = 0.0;  // 0: config dpi
};

// Everything a pipeline run needs besides the item and seed.
struct Engine {
  StyleConfig config;
  std::shared_ptr<const EmotionScorer> scorer;
  std::shared_ptr<const Translator> translator = std::make_shared<IdentityTranslator>();
  std::shared_ptr<const TextMeasurer> measurer = std::make_shared<SyntheticMeasurer>();
  // Per-typeface measurers (real font metrics); others use `measurer`.
  std::map<std::string, std::shared_ptr<const TextMeasurer>> typeface_measurers;

  const TextMeasurer& measurer_for(const std::string& typeface_id) const;
};

// Config files plus `lexicon.tsv` from one directory. With real_metrics, every
// typeface that names a font file is measured from that file (a missing file
// raises Error(FontResourceMissing)); relative font paths resolve against the
// directory.
Engine load_engine(const std::filesystem::path& config_dir, bool real_metrics = false);

// --config value, else $AFFICHE_CONFIG_DIR, else ./config.
std::filesystem::path resolve_config_dir(const std::string& flag);

// classify -> divide_lines -> style -> typeset -> render, plus music for the
// top predominant emotion. Module errors keep their code and get the item id
// in where(); anything else becomes Error(PipelineFailure).
PipelineResult run_pipeline(const Tweet& item, const Engine& engine, std::uint64_t seed,
                            const PipelineOptions& options = {});

// Seed for one corpus item, stable across platforms.
std::uint64_t item_seed(std::uint64_t seed, std::string_view item_id);

struct GroupSummary {
  std::string group;  // "all" or the line count
  std::size_t count = 0;
  double mean_ops = 0.0;
  double median_ops = 0.0;
  int min_ops = 0;
  int max_ops = 0;
  double mean_s = 0.0;
  double median_s = 0.0;
};

struct BenchReport {
  std::vector<RunStats> rows;
  std::vector<GroupSummary> summary;  // "all" first, then by line count
  double wall_s = 0.0;
};

BenchReport run_bench(const std::vector<std::string>& texts, int runs, const Engine& engine,
                      std::uint64_t seed);

void write_runs_csv(std::ostream& out, const BenchReport& report);
void write_summary_csv(std::ostream& out, const BenchReport& report);

double mean(std::span<const double> xs);
double median(std::vector<double> xs);

// Live installation: owns the selection loop, hands selected items to the
// pipeline and keeps the generated artifacts of active items.
class Installation {
 public:
  struct Active {
    FeedItem item;
    std::vector<Emotion> predominant;
    std::string poster_file;
    std::string svg;
    std::vector<std::uint8_t> midi;
    bool ready = false;
    std::string error;
  };

  Installation(std::shared_ptr<const TweetStore> store, Engine engine, std::uint64_t seed,
               double half_life = kDefaultHalfLife);
  ~Installation();
  Installation(const Installation&) = delete;
  Installation& operator=(const Installation&) = delete;

  // Blocks until every in-flight generation has finished; the results are
  // collected by the next step().
  void wait_idle();

  TickResult step(double now);
  nlohmann::json current() const;
  std::optional<std::string> poster(const std::string& id) const;
  std::optional<std::vector<std::uint8_t>> audio(const std::string& id) const;
  std::size_t active_count() const;

 private:
  std::shared_ptr<const TweetStore> store_;
  Engine engine_;
  std::uint64_t seed_;
  SelectionState state_;
  mutable std::mutex mutex_;
  std::map<std::string, Active> active_;
  std::map<std::string, std::future<PipelineResult>> pending_;
  std::vector<std::string> order_;
};

}  // namespace affiche
