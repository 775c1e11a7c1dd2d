#include <doctest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "support/fixtures.hpp"
#include "support/smf_reader.hpp"
#include "support/xml.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* p = std::getenv("AFFICHE_CLI");
  REQUIRE_MESSAGE(p != nullptr, "AFFICHE_CLI is not set");
  return p;
}

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& prefix = "") {
  const std::string cmd = prefix + "'" + cli() + "' " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string config_flag() { return "--config '" + fixtures::config_dir().string() + "' "; }

}  // namespace

TEST_CASE("generate writes an SVG and a MIDI file") {
  const fs::path out = fixtures::temp_dir("cli_generate");
  const Run r = run("generate " + config_flag() + "--seed 3 --midi --out '" + out.string() +
                    "' --text 'What a wonderful surprise, I am so happy!'");
  INFO(r.out);
  REQUIRE(r.status == 0);
  CHECK(r.out.find("text_3.svg") != std::string::npos);
  const std::string svg = fixtures::read_text(out / "text_3.svg");
  CHECK_NOTHROW(xml::parse(svg));
  const smf::File midi = smf::parse(fixtures::read_bytes(out / "text_3.mid"));
  CHECK(midi.format == 1);
  CHECK(midi.tracks.size() == 3);
}

TEST_CASE("generate is byte-identical across invocations") {
  const fs::path a = fixtures::temp_dir("cli_det_a");
  const fs::path b = fixtures::temp_dir("cli_det_b");
  const std::string args = "generate " + config_flag() + "--seed 99 --midi --text 'Lost my keys again, so annoyed'";
  REQUIRE(run(args + " --out '" + a.string() + "'").status == 0);
  REQUIRE(run(args + " --out '" + b.string() + "'").status == 0);
  CHECK(fixtures::read_text(a / "text_99.svg") == fixtures::read_text(b / "text_99.svg"));
  CHECK(fixtures::read_text(a / "text_99.mid") == fixtures::read_text(b / "text_99.mid"));
}

TEST_CASE("generate over a corpus") {
  const fs::path out = fixtures::temp_dir("cli_corpus");
  const fs::path corpus = out / "c.jsonl";
  fixtures::write_text(corpus,
                       "{\"id\": \"x1\", \"text\": \"Sunny and calm\", \"created_at\": \"2024-05-01T10:00:00Z\"}\n"
                       "{\"id\": \"x2\", \"text\": \"Terrified of spiders\", \"created_at\": \"2024-05-01T10:01:00Z\"}\n");
  const Run r = run("generate " + config_flag() + "--corpus '" + corpus.string() + "' --out '" + out.string() + "'");
  INFO(r.out);
  REQUIRE(r.status == 0);
  CHECK(fs::exists(out / "x1_1.svg"));
  CHECK(fs::exists(out / "x2_1.svg"));
  CHECK_FALSE(fs::exists(out / "x1_1.mid"));
  // Items draw from their own streams, so the two texts do not share a layout seed.
  CHECK(fixtures::read_text(out / "x1_1.svg") != fixtures::read_text(out / "x2_1.svg"));
}

TEST_CASE("usage errors") {
  CHECK(run("").status != 0);
  CHECK(run("generate " + config_flag() + "--text hi --png --out /tmp").status == 2);
  CHECK(run("generate " + config_flag()).status == 2);
  const Run missing = run("generate --config /nonexistent/dir --text hi --out /tmp");
  CHECK(missing.status == 1);
  CHECK(missing.out.find("error") != std::string::npos);
  CHECK(run("bench " + config_flag() + "--texts /nonexistent.txt").status != 0);
}

TEST_CASE("config directory from the environment") {
  const fs::path out = fixtures::temp_dir("cli_env");
  const std::string env = "cd '" + out.string() + "' && AFFICHE_CONFIG_DIR='" + fixtures::config_dir().string() + "' ";
  const Run ok = run("generate --text 'hello there' --out .", env);
  INFO(ok.out);
  CHECK(ok.status == 0);
  CHECK(fs::exists(out / "text_1.svg"));
  // Without the variable, ./config is tried and does not exist here.
  CHECK(run("generate --text 'hello there' --out .", "cd '" + out.string() + "' && unset AFFICHE_CONFIG_DIR; ").status ==
        1);
}

TEST_CASE("bench writes per-run and summary CSVs") {
  const fs::path out = fixtures::temp_dir("cli_bench");
  fixtures::write_text(out / "texts.txt", "# comment\nGood morning\nA rather longer text that spans a few lines\n");
  const Run r = run("bench " + config_flag() + "--texts '" + (out / "texts.txt").string() + "' --runs 3 --report '" +
                    (out / "b.csv").string() + "'");
  INFO(r.out);
  REQUIRE(r.status == 0);
  const std::string rows = fixtures::read_text(out / "b.csv");
  CHECK(std::count(rows.begin(), rows.end(), '\n') == 7);
  const std::string summary = fixtures::read_text(out / "b_summary.csv");
  CHECK(summary.find("all,6,") != std::string::npos);
  CHECK(r.out.find("group,count") != std::string::npos);
}

TEST_CASE("simulate logs selections") {
  const fs::path out = fixtures::temp_dir("cli_sim");
  const std::string corpus = (fixtures::source_dir() / "data" / "corpus.jsonl").string();
  const Run r = run("simulate " + config_flag() + "--corpus '" + corpus + "' --ticks 3000 --half-life 600 --out '" +
                    out.string() + "'");
  INFO(r.out);
  REQUIRE(r.status == 0);
  CHECK(r.out.find("max_active=5") != std::string::npos);
  const std::string log = fixtures::read_text(out / "events.csv");
  CHECK(log.rfind("tick,time,event,id,lifespan_s,active\n", 0) == 0);
  CHECK(log.find(",selected,") != std::string::npos);
  int svgs = 0;
  for (const auto& e : fs::directory_iterator(out)) svgs += e.path().extension() == ".svg";
  CHECK(svgs >= 5);
  CHECK(run("simulate " + config_flag() + "--corpus '" + corpus + "' --half-life 0").status != 0);
}

TEST_CASE("serve answers the read-only API") {
  const fs::path out = fixtures::temp_dir("cli_serve");
  const int port = 20000 + static_cast<int>(getpid() % 20000);
  const std::string corpus = (fixtures::source_dir() / "data" / "corpus.jsonl").string();
  const std::string cmd = "'" + cli() + "' serve " + config_flag() + "--corpus '" + corpus + "' --addr 127.0.0.1:" +
                          std::to_string(port) + " > '" + (out / "log").string() + "' 2>&1 & echo $! > '" +
                          (out / "pid").string() + "'";
  REQUIRE(std::system(cmd.c_str()) == 0);
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(1, 0);
  nlohmann::json current;
  bool ready = false;
  for (int i = 0; i < 100 && !ready; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    auto res = client.Get("/current");
    if (!res || res->status != 200) continue;
    current = nlohmann::json::parse(res->body);
    ready = !current.empty() && current[0]["poster"].is_string();
  }
  const std::string pid = fixtures::read_text(out / "pid");
  CHECK(ready);
  if (ready) {
    const std::string id = current[0]["id"];
    auto svg = client.Get("/poster/" + id + ".svg");
    REQUIRE(svg);
    CHECK(svg->status == 200);
    CHECK_NOTHROW(xml::parse(svg->body));
    auto mid = client.Get("/audio/" + id + ".mid");
    REQUIRE(mid);
    CHECK(mid->status == 200);
    CHECK(mid->body.rfind("MThd", 0) == 0);
    auto missing = client.Get("/poster/nope.svg");
    REQUIRE(missing);
    CHECK(missing->status == 404);
  }
  CHECK(std::system(("kill " + pid).c_str()) == 0);
}
