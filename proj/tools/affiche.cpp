// affiche: poster and ambient-music generator for short texts.

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>

#include "affiche/error.hpp"
#include "affiche/orchestrator.hpp"
#include "affiche/render.hpp"

namespace {

using namespace affiche;

std::atomic<bool> g_stop{false};

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write output file", path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string stem(const std::string& svg_name) { return svg_name.substr(0, svg_name.size() - 4); }

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open texts file", path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

struct Common {
  std::string config;
  std::uint64_t seed = 1;
  bool real_metrics = false;
  std::string scorer_url;
  double half_life = kDefaultHalfLife;
};

Engine make_engine(const Common& c) {
  Engine e = load_engine(resolve_config_dir(c.config), c.real_metrics);
  if (!c.scorer_url.empty()) e.scorer = std::make_shared<HttpScorer>(c.scorer_url);
  return e;
}

int cmd_generate(const Common& common, const std::string& text, const std::string& corpus, const std::string& out_dir,
                 bool midi, bool png) {
  if (png) {
    std::cerr << "PNG export is not available in this build; SVG output only\n";
    return 2;
  }
  const Engine engine = make_engine(common);
  std::vector<Tweet> items;
  if (!corpus.empty()) {
    items = load_corpus(corpus);
  } else {
    Tweet t;
    t.id = "text";
    t.text = text;
    items.push_back(std::move(t));
  }
  std::filesystem::create_directories(out_dir);
  for (const Tweet& t : items) {
    // Corpus items each get their own stream; file names keep the given seed.
    const std::uint64_t seed = corpus.empty() ? common.seed : item_seed(common.seed, t.id);
    PipelineResult r = run_pipeline(t, engine, seed, {.music = midi});
    const std::string svg_name = svg_file_name(t.id, common.seed);
    write_file(std::filesystem::path(out_dir) / svg_name, r.svg);
    if (midi)
      write_file(std::filesystem::path(out_dir) / (stem(svg_name) + ".mid"),
                 std::string_view(reinterpret_cast<const char*>(r.midi.data()), r.midi.size()));
    std::string emotions;
    for (Emotion e : r.profile.predominant) emotions += (emotions.empty() ? "" : "+") + std::string(name(e));
    std::cout << svg_name << "  " << (emotions.empty() ? "neutral" : emotions) << "  " << r.stats.format << "  "
              << r.stats.background << "  lines=" << r.stats.lines << "  ops=" << r.stats.operations << '\n';
  }
  return 0;
}

int cmd_simulate(const Common& common, const std::string& corpus, long ticks, double hz, const std::string& out_dir,
                 bool render) {
  const Engine engine = make_engine(common);
  auto store = std::make_shared<MemoryStore>(load_corpus(corpus));
  if (store->size() == 0) throw Error(ErrorCode::StoreUnavailable, "corpus is empty", corpus);
  std::filesystem::create_directories(out_dir);
  SelectionState state;
  state.rng = Rng(common.seed);
  state.half_life = common.half_life;
  const double start = store->tweets().front().created_at;
  std::ofstream log(std::filesystem::path(out_dir) / "events.csv");
  log << "tick,time,event,id,lifespan_s,active\n";
  std::size_t max_active = 0;
  long selections = 0;
  for (long i = 0; i < ticks; ++i) {
    const double now = start + static_cast<double>(i) / hz;
    const TickResult r = tick(state, *store, now);
    max_active = std::max(max_active, state.active.size());
    for (const std::string& id : r.expired)
      log << i << ',' << format_iso8601(now) << ",expired," << id << ",," << state.active.size() << '\n';
    if (!r.selected) continue;
    ++selections;
    log << i << ',' << format_iso8601(now) << ",selected," << r.selected->id << ',' << r.selected->lifespan << ','
        << state.active.size() << '\n';
    if (render) {
      const Tweet* t = store->find(r.selected->id);
      const std::uint64_t seed = item_seed(common.seed, t->id);
      PipelineResult res = run_pipeline(*t, engine, seed);
      const std::string svg_name = svg_file_name(t->id, seed);
      write_file(std::filesystem::path(out_dir) / svg_name, res.svg);
      write_file(std::filesystem::path(out_dir) / (stem(svg_name) + ".mid"),
                 std::string_view(reinterpret_cast<const char*>(res.midi.data()), res.midi.size()));
    }
  }
  std::cout << "ticks=" << ticks << " selections=" << selections << " max_active=" << max_active << '\n';
  return 0;
}

int cmd_bench(const Common& common, const std::string& texts_path, int runs, const std::string& report_path) {
  const Engine engine = make_engine(common);
  const BenchReport report = run_bench(read_lines(texts_path), runs, engine, common.seed);
  {
    std::ofstream out(report_path);
    if (!out) throw Error(ErrorCode::MissingFile, "cannot write report", report_path);
    write_runs_csv(out, report);
  }
  std::filesystem::path summary_path(report_path);
  summary_path.replace_filename(summary_path.stem().string() + "_summary.csv");
  {
    std::ofstream out(summary_path);
    write_summary_csv(out, report);
  }
  write_summary_csv(std::cout, report);
  std::cout << "wall_s=" << report.wall_s << '\n';
  return 0;
}

int cmd_serve(const Common& common, const std::string& addr, const std::string& corpus, double hz) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::ValidationError, "expected host:port", "addr");
  const std::string host = addr.substr(0, colon);
  const int port = std::stoi(addr.substr(colon + 1));

  auto store = std::make_shared<MemoryStore>(load_corpus(corpus));
  Installation installation(store, make_engine(common), common.seed, common.half_life);

  httplib::Server server;
  server.Get("/current", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(installation.current().dump(), "application/json");
  });
  server.Get(R"(/poster/([^/]+)\.svg)", [&](const httplib::Request& req, httplib::Response& res) {
    if (auto svg = installation.poster(req.matches[1])) res.set_content(*svg, "image/svg+xml");
    else res.status = 404;
  });
  server.Get(R"(/audio/([^/]+)\.mid)", [&](const httplib::Request& req, httplib::Response& res) {
    if (auto midi = installation.audio(req.matches[1]))
      res.set_content(std::string(midi->begin(), midi->end()), "audio/midi");
    else res.status = 404;
  });

  std::thread loop([&] {
    // The simulated clock starts at the newest item so the whole corpus is
    // eligible; it then advances in real time.
    const double origin = store->size() ? store->tweets().front().created_at : 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    const auto period = std::chrono::duration<double>(1.0 / hz);
    while (!g_stop) {
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      installation.step(origin + elapsed);
      std::this_thread::sleep_for(period);
    }
    server.stop();
  });
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  std::cout << "serving on http://" << host << ':' << port << '\n';
  const bool ok = server.listen(host, port);
  g_stop = true;
  loop.join();
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emotion-driven typographic posters and ambient MIDI from short texts"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Config directory (default $AFFICHE_CONFIG_DIR or ./config)");
    sub->add_option("--seed", common.seed, "Random seed")->default_val(1);
    sub->add_option("--scorer-url", common.scorer_url, "External emotion model endpoint (HTTP POST)");
    sub->add_flag("--real-metrics", common.real_metrics, "Measure text with the typefaces' font files");
  };

  std::string text, corpus, out_dir = "out";
  bool midi = false, png = false;
  auto* gen = app.add_subcommand("generate", "Generate posters (and music) for a text or a corpus");
  add_common(gen);
  auto* text_opt = gen->add_option("--text", text, "Text to render");
  auto* corpus_opt = gen->add_option("--corpus", corpus, "JSONL corpus to render")->check(CLI::ExistingFile);
  text_opt->excludes(corpus_opt);
  gen->add_option("--out", out_dir, "Output directory");
  gen->add_flag("--midi", midi, "Also write .mid files");
  gen->add_flag("--png", png, "Also rasterize to PNG (not available in this build)");

  long ticks = 10000;
  double hz = 10.0;
  bool no_render = false;
  auto* sim = app.add_subcommand("simulate", "Run the selection loop on a simulated clock");
  add_common(sim);
  sim->add_option("--corpus", corpus, "JSONL corpus")->required()->check(CLI::ExistingFile);
  sim->add_option("--ticks", ticks, "Number of ticks")->default_val(10000);
  sim->add_option("--tick-hz", hz, "Ticks per simulated second")->default_val(10.0)->check(CLI::PositiveNumber);
  sim->add_option("--out", out_dir, "Output directory");
  sim->add_flag("--no-render", no_render, "Only log selections");
  sim->add_option("--half-life", common.half_life, "Recency half-life in seconds")
      ->default_val(kDefaultHalfLife)
      ->check(CLI::PositiveNumber);

  std::string texts_path, report_path = "bench.csv";
  int runs = 300;
  auto* bench = app.add_subcommand("bench", "Typesetting performance over a set of texts");
  add_common(bench);
  bench->add_option("--texts", texts_path, "One text per line")->required()->check(CLI::ExistingFile);
  bench->add_option("--runs", runs, "Runs per text")->default_val(300)->check(CLI::PositiveNumber);
  bench->add_option("--report", report_path, "Per-run CSV; a _summary.csv is written next to it");

  std::string addr = "127.0.0.1:8080";
  auto* serve = app.add_subcommand("serve", "Run the installation loop behind a read-only HTTP API");
  add_common(serve);
  serve->add_option("--addr", addr, "host:port");
  serve->add_option("--corpus", corpus, "JSONL corpus")->required()->check(CLI::ExistingFile);
  serve->add_option("--tick-hz", hz, "Ticks per second")->default_val(10.0)->check(CLI::PositiveNumber);
  serve->add_option("--half-life", common.half_life, "Recency half-life in seconds")
      ->default_val(kDefaultHalfLife)
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      if (text.empty() && corpus.empty()) {
        std::cerr << "generate: give --text or --corpus\n";
        return 2;
      }
      return cmd_generate(common, text, corpus, out_dir, midi, png);
    }
    if (*sim) return cmd_simulate(common, corpus, ticks, hz, out_dir, !no_render);
    if (*bench) return cmd_bench(common, texts_path, runs, report_path);
    if (*serve) return cmd_serve(common, addr, corpus, hz);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
