#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "affiche/error.hpp"
#include "affiche/orchestrator.hpp"
#include "support/fixtures.hpp"
#include "support/smf_reader.hpp"
#include "support/stats.hpp"
#include "support/xml.hpp"

using namespace affiche;

namespace {

const Engine& engine() {
  static const Engine e = load_engine(fixtures::config_dir());
  return e;
}

std::vector<Tweet> synthetic_corpus(std::size_t n, double start, double spacing) {
  std::vector<Tweet> out;
  for (std::size_t i = 0; i < n; ++i) {
    Tweet t;
    t.id = "id" + std::to_string(i);
    t.text = "item number " + std::to_string(i);
    t.created_at = start + static_cast<double>(i) * spacing;
    out.push_back(std::move(t));
  }
  return out;
}

Tweet tweet(std::string id, std::string text) {
  Tweet t;
  t.id = std::move(id);
  t.text = std::move(text);
  return t;
}

}  // namespace

TEST_CASE("recency weights halve every half-life") {
  const std::vector<double> created = {1000.0, 1000.0 - 3600, 1000.0 - 7200};
  const auto w = recency_weights(created, 1000.0);
  REQUIRE(w.size() == 3);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == doctest::Approx(0.5));
  CHECK(w[2] == doctest::Approx(0.25));
  const auto fast = recency_weights(created, 1000.0, 1800.0);
  CHECK(fast[1] == doctest::Approx(0.25));
  CHECK(fast[2] == doctest::Approx(0.0625));
  CHECK(recency_weights(std::vector<double>{}, 0.0).empty());
}

TEST_CASE("memory store ordering and filtering") {
  const MemoryStore store(synthetic_corpus(10, 0.0, 10.0));
  CHECK(store.size() == 10);
  auto got = store.newest(3, 1000.0, nullptr);
  REQUIRE(got.size() == 3);
  CHECK(got[0]->id == "id9");
  CHECK(got[2]->id == "id7");
  got = store.newest(3, 45.0, [](const std::string& id) { return id == "id3"; });
  REQUIRE(got.size() == 3);
  CHECK(got[0]->id == "id4");
  CHECK(got[1]->id == "id2");
  CHECK(store.newest(5, -1.0, nullptr).empty());
  CHECK(store.find("id5")->created_at == 50.0);
  CHECK(store.find("nope") == nullptr);
}

TEST_CASE("timestamps") {
  CHECK(parse_iso8601("2021-05-04T12:30:00Z") == 1620131400.0);
  CHECK(parse_iso8601("2021-05-04T12:30:00.250Z") == 1620131400.25);
  CHECK(parse_iso8601("2021-05-04T14:30:00+02:00") == 1620131400.0);
  CHECK(parse_iso8601("1999-12-31T23:59:59-05:30") == 946704599.0);
  CHECK(parse_iso8601("2024-02-29") == 1709164800.0);
  CHECK(parse_iso8601("1970-01-01T00:00:00Z") == 0.0);
  for (const char* bad : {"", "yesterday", "2023-02-29T00:00:00Z", "2021-05-04T25:00:00Z", "2021-05-04T12:30:00+0200",
                          "2021-05-04T12:30:00Zjunk"}) {
    try {
      parse_iso8601(bad);
      FAIL("accepted " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
    }
  }
  CHECK(format_iso8601(1620131400.9) == "2021-05-04T12:30:00Z");
  CHECK(format_iso8601(0.0) == "1970-01-01T00:00:00Z");
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double t = std::floor(rng.uniform(0, 4e9));
    CHECK(parse_iso8601(format_iso8601(t)) == t);
  }
}

TEST_CASE("corpus JSONL") {
  std::istringstream in(
      "{\"id\": \"a1\", \"text\": \"hello\", \"created_at\": \"2021-05-04T12:30:00Z\", \"lang\": \"en\"}\n"
      "\n"
      "{\"id\": 42, \"text\": \"bonjour\", \"created_at\": \"2021-05-04T12:31:00Z\", \"lang\": null}\n");
  const auto items = read_corpus_jsonl(in);
  REQUIRE(items.size() == 2);
  CHECK(items[0].id == "a1");
  CHECK(items[0].lang == "en");
  CHECK(items[1].id == "42");
  CHECK_FALSE(items[1].lang.has_value());
  CHECK(items[1].created_at - items[0].created_at == 60.0);

  std::istringstream bad("{\"id\": \"a\", \"text\": \"x\", \"created_at\": \"2021-05-04\"}\n{\"id\": \"b\"}\n");
  try {
    read_corpus_jsonl(bad);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(e.where() == "corpus:2");
  }
  CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl"), Error);
  CHECK(load_corpus(fixtures::source_dir() / "data" / "corpus.jsonl").size() > 10);
}

TEST_CASE("tick selects, expires and pauses") {
  const MemoryStore store(synthetic_corpus(50, 0.0, 1.0));
  SelectionState st;
  st.rng = Rng(3);
  TickResult r = tick(st, store, 100.0);
  REQUIRE(r.selected);
  CHECK(r.selected->lifespan >= kMinLifespan);
  CHECK(r.selected->lifespan <= kMaxLifespan);
  CHECK(r.selected->selected_at == 100.0);
  CHECK(st.clock == 100.0);

  for (double t = 100.1; st.active.size() < kMaxActive; t += 0.1) tick(st, store, t);
  CHECK(tick(st, store, 101.0).selected == std::nullopt);

  // Expire exactly one item; the tick that frees the slot still selects nothing.
  const double first_end = st.active.front().selected_at + st.active.front().lifespan;
  for (FeedItem& f : st.active) f.lifespan = std::max(f.lifespan, first_end - f.selected_at + 50.0);
  st.active.front().lifespan = first_end - st.active.front().selected_at;
  const std::string first = st.active.front().id;
  CHECK_FALSE(tick(st, store, first_end).expired.size());  // not yet: expiry is strictly after
  r = tick(st, store, first_end + 0.01);
  CHECK(r.expired == std::vector<std::string>{first});
  CHECK_FALSE(r.selected);
  CHECK(st.active.size() == kMaxActive - 1);
  r = tick(st, store, first_end + 0.02);
  CHECK(r.selected);
  CHECK(st.seen.at(first) == ItemState::Expired);
}

TEST_CASE("empty or exhausted store selects nothing") {
  const MemoryStore empty({});
  SelectionState st;
  CHECK_FALSE(tick(st, empty, 0.0).selected);
  const MemoryStore two(synthetic_corpus(2, 0.0, 1.0));
  CHECK(tick(st, two, 10.0).selected);
  CHECK(tick(st, two, 10.1).selected);
  CHECK_FALSE(tick(st, two, 10.2).selected);  // items are never shown twice
}

TEST_CASE("a failing store surfaces as StoreUnavailable") {
  struct Broken final : TweetStore {
    std::vector<const Tweet*> newest(std::size_t, double, const std::function<bool(const std::string&)>&) const override {
      throw std::runtime_error("disk gone");
    }
    const Tweet* find(const std::string&) const override { return nullptr; }
    std::size_t size() const override { return 0; }
  };
  SelectionState st;
  try {
    tick(st, Broken{}, 0.0);
    FAIL("expected StoreUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StoreUnavailable);
  }
}

TEST_CASE("the active cap holds under random schedules") {
  Rng gen(9);
  for (int run = 0; run < 50; ++run) {
    const MemoryStore store(synthetic_corpus(200, 0.0, gen.uniform(0.5, 30)));
    SelectionState st;
    st.rng = Rng(gen.next());
    double now = store.tweets().front().created_at;
    std::set<std::string> shown;
    for (int i = 0; i < 3000; ++i) {
      now += gen.uniform(0.0, 5.0);
      const std::size_t before = st.active.size();
      const TickResult r = tick(st, store, now);
      CHECK(st.active.size() <= kMaxActive);
      if (before >= kMaxActive) CHECK_FALSE(r.selected);
      if (r.selected) CHECK(shown.insert(r.selected->id).second);
      for (const FeedItem& f : st.active) CHECK(now <= f.selected_at + f.lifespan);
    }
  }
}

TEST_CASE("first pick follows the recency weights") {
  // 20 candidates one hour apart; the first selection's distribution is
  // compared with 2^(-age/h) normalised, computed here.
  const MemoryStore store(synthetic_corpus(20, 0.0, 900.0));
  const double now = 19 * 900.0;
  std::vector<double> p(20);
  double z = 0;
  for (int i = 0; i < 20; ++i) z += p[i] = std::pow(0.5, (now - i * 900.0) / 3600.0);
  std::map<std::string, int> counts;
  const int n = 40000;
  for (int s = 0; s < n; ++s) {
    SelectionState st;
    st.rng = Rng(static_cast<std::uint64_t>(s));
    ++counts[tick(st, store, now).selected->id];
  }
  double chi2 = 0;
  for (int i = 0; i < 20; ++i) {
    const double expected = n * p[i] / z;
    const double got = counts["id" + std::to_string(i)];
    chi2 += (got - expected) * (got - expected) / expected;
  }
  CHECK(chi2 < 43.8);  // chi-square 19 dof, p = 0.001
}

TEST_CASE("pipeline on a neutral text") {
  const Tweet t = tweet("n1", "Meeting moved to room four at noon");
  const PipelineResult r = run_pipeline(t, engine(), 7);
  CHECK(r.profile.neutral);
  CHECK(r.item_id == "n1");
  CHECK(std::holds_alternative<backgrounds::Solid>(r.style.background));
  CHECK(r.stats.contained);
  CHECK(r.stats.legible);
  CHECK(r.stats.chars == 34);
  CHECK(r.stats.lines == static_cast<int>(r.plan.lines.size()));
  const auto root = xml::parse(r.svg);
  CHECK(root->all("text").size() == r.plan.lines.size());
  const smf::File midi = smf::parse(r.midi);
  CHECK(midi.tracks.at(0).tempos.at(0) == std::lround(60'000'000.0 / engine().config.music.neutral.tempo_bpm));
  CHECK_FALSE(midi.tracks.at(1).notes.empty());
}

TEST_CASE("pipeline streams are independent and deterministic") {
  const Tweet t = tweet("e1", "I am so happy and grateful today, what a wonderful surprise from my friends!");
  const PipelineResult a = run_pipeline(t, engine(), 11);
  const PipelineResult b = run_pipeline(t, engine(), 11);
  CHECK(a.svg == b.svg);
  CHECK(a.midi == b.midi);
  CHECK_FALSE(a.profile.neutral);
  PipelineOptions quiet;
  quiet.music = false;
  quiet.render = false;
  const PipelineResult c = run_pipeline(t, engine(), 11, quiet);
  CHECK(c.svg.empty());
  CHECK(c.midi.empty());
  // Turning music off must not disturb the poster.
  CHECK(c.style == a.style);
  CHECK(c.composition.trace == a.composition.trace);
}

TEST_CASE("pipeline errors carry the item id") {
  try {
    run_pipeline(tweet("bad1", "   "), engine(), 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationError);
    CHECK(e.where() == "bad1");
  }
  Engine no_scorer = engine();
  no_scorer.scorer.reset();
  try {
    run_pipeline(tweet("x", "hello"), no_scorer, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ScorerFailure);
  }
}

TEST_CASE("bench with one text and one run") {
  const BenchReport r = run_bench({"Good morning"}, 1, engine(), 1);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].text_id == "t01");
  CHECK(r.rows[0].status == "ok");
  REQUIRE(r.summary.size() == 2);
  CHECK(r.summary[0].group == "all");
  CHECK(r.summary[0].count == 1);
  CHECK(r.summary[0].median_ops == r.rows[0].operations);
  CHECK(r.summary[1].group == std::to_string(r.rows[0].lines));
  CHECK_THROWS_AS(run_bench({"x"}, 0, engine(), 1), Error);
}

TEST_CASE("bench summary matches a recomputation from the rows") {
  const std::vector<std::string> texts = {"Short one", "A somewhat longer text that will need a few lines here",
                                          "Tiny", "Another sentence. And a second sentence that follows it."};
  const BenchReport r = run_bench(texts, 25, engine(), 4);
  CHECK(r.rows.size() == 100);
  std::map<std::string, std::vector<double>> ops;
  for (const RunStats& row : r.rows) {
    REQUIRE(row.status == "ok");
    ops["all"].push_back(row.operations);
    ops[std::to_string(row.lines)].push_back(row.operations);
  }
  REQUIRE(r.summary.size() == ops.size());
  for (const GroupSummary& g : r.summary) {
    const auto& xs = ops.at(g.group);
    CHECK(g.count == xs.size());
    double s = 0;
    for (double x : xs) s += x;
    CHECK(g.mean_ops == doctest::Approx(s / xs.size()));
    CHECK(g.median_ops == stats::median(xs));
    CHECK(g.min_ops == *std::min_element(xs.begin(), xs.end()));
    CHECK(g.max_ops == *std::max_element(xs.begin(), xs.end()));
  }
  std::ostringstream runs, summary;
  write_runs_csv(runs, r);
  write_summary_csv(summary, r);
  const std::string csv = runs.str();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 101);
  CHECK(summary.str().rfind("group,count,mean_ops,median_ops,min_ops,max_ops,mean_s,median_s\nall,100,", 0) == 0);

  // Same seed, same rows; different seed, different rows.
  const BenchReport again = run_bench(texts, 25, engine(), 4);
  const BenchReport other = run_bench(texts, 25, engine(), 5);
  bool same = true, differs = false;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    same = same && r.rows[i].operations == again.rows[i].operations && r.rows[i].format == again.rows[i].format;
    differs = differs || r.rows[i].operations != other.rows[i].operations;
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("item seeds") {
  // FNV-1a 64 of the id, xor the seed, one splitmix64 round; values from a
  // Python transcription.
  CHECK(item_seed(1, "p001") == 7411361884334365049ull);
  CHECK(item_seed(0, "") == 14087677454934409008ull);
  CHECK(item_seed(42, "1234567890") == 14485227681135568702ull);
  CHECK(item_seed(1, "p001") != item_seed(2, "p001"));
}

TEST_CASE("mean and median helpers") {
  CHECK(mean(std::vector<double>{}) == 0.0);
  CHECK(mean(std::vector<double>{1, 2, 3, 4}) == 2.5);
  CHECK(median({}) == 0.0);
  CHECK(median({5, 1, 3}) == 3.0);
  CHECK(median({4, 1, 3, 2}) == 2.5);
}

TEST_CASE("installation keeps artifacts for active items") {
  auto store = std::make_shared<MemoryStore>(synthetic_corpus(30, 0.0, 60.0));
  Installation inst(store, engine(), 5);
  const double t0 = store->tweets().front().created_at;
  const TickResult r = inst.step(t0);
  REQUIRE(r.selected);
  inst.wait_idle();
  inst.step(t0 + 0.1);
  const auto current = inst.current();
  REQUIRE(current.is_array());
  REQUIRE(current.size() >= 1);
  const auto& first = current[0];
  CHECK(first["id"] == r.selected->id);
  CHECK(first["poster"].is_string());
  CHECK(first["text"] == store->find(r.selected->id)->text);
  const auto svg = inst.poster(r.selected->id);
  REQUIRE(svg);
  CHECK_NOTHROW(xml::parse(*svg));
  const auto midi = inst.audio(r.selected->id);
  REQUIRE(midi);
  CHECK(smf::parse(*midi).format == 1);
  CHECK_FALSE(inst.poster("missing"));

  // Far in the future every item has expired and the slots are refilled.
  double t = t0 + 0.2;
  for (int i = 0; i < 10; ++i) inst.step(t += 0.1);
  CHECK(inst.active_count() == kMaxActive);
  inst.step(t + kMaxLifespan + 1);
  inst.wait_idle();
  CHECK(inst.active_count() == 0);
  CHECK_FALSE(inst.poster(r.selected->id));
  CHECK_THROWS_AS(Installation(store, engine(), 1, 0.0), Error);
}

TEST_CASE("config directory resolution") {
  CHECK(resolve_config_dir("/explicit") == "/explicit");
  setenv("AFFICHE_CONFIG_DIR", "/from/env", 1);
  CHECK(resolve_config_dir("") == "/from/env");
  unsetenv("AFFICHE_CONFIG_DIR");
  CHECK(resolve_config_dir("") == "config");
}
