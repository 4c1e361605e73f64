#include <doctest.h>

#include <cstdlib>
#include <set>
#include <sys/wait.h>

#include "monah/features.hpp"
#include "monah/ingest.hpp"
#include "support.hpp"

using namespace monah;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const std::string& stdin_text = "") {
  static int counter = 0;
  const auto dir = fs::temp_directory_path() / "monah_test_cli_io";
  fs::create_directories(dir);
  const auto out = dir / ("out" + std::to_string(counter) + ".txt");
  const auto in = dir / ("in" + std::to_string(counter++) + ".txt");
  write_file(in.string(), stdin_text);
  const std::string cmd = std::string("'") + MONAH_CLI + "' " + args + " < '" + in.string() + "' > '" + out.string() +
                          "' 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out.string())};
}

std::string trim_nl(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

/// Small corpus shared by the tests below.
const fs::path& corpus() {
  static const fs::path manifest = [] {
    const auto dir = test::scratch("cli_corpus");
    const auto r = run("synth --n 50 --seed 1 --out '" + dir.string() + "'");
    REQUIRE(r.code == 0);
    return fs::path(trim_nl(r.out));
  }();
  return manifest;
}

std::set<std::string> dh_clauses() {
  std::set<std::string> out;
  for (const auto& s : FeatureRegistry::builtin().specs()) {
    if (s.family != Family::Demographics && s.family != Family::History) continue;
    if (s.template_id == 3) {
      for (const char* g : {"male", "female"}) out.insert("the " + std::string(to_string(s.scope)) + " is " + g);
      continue;
    }
    const std::string prefix = s.scope == Scope::Session ? "" : std::string(to_string(s.scope)) + " ";
    for (const char* b : {"very low", "low", "high", "very high"}) out.insert(prefix + s.phrase + " " + b);
  }
  return out;
}

std::vector<std::string> clauses(std::string text) {
  std::vector<std::string> out;
  if (!text.empty() && text.back() == '.') text.pop_back();
  std::size_t i = 0;
  while (i <= text.size()) {
    std::size_t j = std::min(text.find(". ", i), text.find(", ", i));
    if (j == std::string::npos) j = text.size();
    out.push_back(text.substr(i, j - i));
    i = j + 2;
  }
  return out;
}

}  // namespace

TEST_CASE("synth piped into ingest-check finds no violations") {
  const auto r = run("ingest-check", corpus().string() + "\n");
  CHECK(r.code == 0);
  CHECK(r.out == "50 sessions, 0 violations\n");
}

TEST_CASE("ingest-check reports violations with exit 1") {
  const auto dir = test::scratch("cli_bad");
  fs::copy(test::fixtures() / "golden", dir, fs::copy_options::recursive);
  auto text = read_file((dir / "au.csv").string());
  const auto nl = text.find('\n');
  const auto end = text.find('\n', nl + 1);
  auto row = text.substr(nl + 1, end - nl - 1);
  auto parts = split(row, ',');
  std::string bad;
  for (std::size_t k = 0; k < parts.size(); ++k) bad += (k ? "," : "") + (k == 4 ? std::string("7.0") : std::string(parts[k]));
  text.replace(nl + 1, end - nl - 1, bad);
  write_file((dir / "au.csv").string(), text);
  const auto r = run("ingest-check --corpus '" + (dir / "manifest.json").string() + "'");
  CHECK(r.code == 1);
  CHECK(r.out.find("au_frame 0: intensity out of [0,5]") != std::string::npos);
  CHECK(r.out.find("1 sessions, 1 violations") != std::string::npos);
}

TEST_CASE("weave DH coarse-only emits only D and H sentences") {
  const auto dir = test::scratch("cli_weave");
  const auto stats = dir / "stats.json";
  REQUIRE(run("fit-stats --corpus '" + corpus().string() + "' --out '" + stats.string() + "'").code == 0);
  const auto out = dir / "narratives";
  const auto r = run("weave --corpus '" + corpus().string() + "' --stats '" + stats.string() +
                     "' --config DH --coarse-only --out '" + out.string() + "'");
  REQUIRE(r.code == 0);
  const auto allowed = dh_clauses();
  std::size_t files = 0, non_gender = 0;
  for (const auto& e : fs::directory_iterator(out)) {
    const auto n = read_narrative(e.path());
    ++files;
    CHECK(n.fine_turns.empty());
    for (const auto& c : clauses(n.coarse_text)) {
      CHECK_MESSAGE(allowed.count(c) == 1, c);
      non_gender += c.rfind("the ", 0) != 0;
    }
  }
  CHECK(files == 50);
  CHECK(non_gender > 0);
}

TEST_CASE("fit-stats with a fold assignment matches the in-process fold stats") {
  const auto dir = test::scratch("cli_fold");
  const auto run_dir = dir / "run";
  REQUIRE(run("evaluate --corpus '" + corpus().string() + "' --configs DH --trials 1 --out '" + run_dir.string() + "'")
              .code == 0);
  const auto stats = dir / "stats1.json";
  REQUIRE(run("fit-stats --corpus '" + corpus().string() + "' --fold-assignment '" + (run_dir / "folds.json").string() +
              "' --fold 1 --out '" + stats.string() + "'")
              .code == 0);
  CHECK(read_file(stats.string()) == read_file((run_dir / "stats_fold1.json").string()));
}

TEST_CASE("evaluate twice gives an identical report") {
  const auto dir = test::scratch("cli_eval");
  std::string md[2];
  for (int k = 0; k < 2; ++k) {
    const auto r = run("evaluate --corpus '" + corpus().string() + "' --configs \"D'A'P',DH,DAPSMH\" --trials 20 --seed 7 --out '" +
                       (dir / std::to_string(k)).string() + "'");
    REQUIRE(r.code == 0);
    md[k] = r.out;
  }
  CHECK(md[0] == md[1]);
  CHECK(read_file((dir / "0" / "report.json").string()) == read_file((dir / "1" / "report.json").string()));
  CHECK(md[0].find("| DAPSMH | ") != std::string::npos);

  // Attaching external AUCs rebuilds the narrative-model columns.
  std::string csv = "config,fold,auc\n";
  for (int f = 0; f < 5; ++f) csv += "DH," + std::to_string(f) + ",0.7" + std::to_string(f) + "\n";
  write_file((dir / "aucs.csv").string(), csv);
  const auto r = run("report --run '" + (dir / "0").string() + "' --han-aucs '" + (dir / "aucs.csv").string() + "'");
  CHECK(r.code == 0);
  CHECK(r.out.find("| 0.720 (0.016) |") != std::string::npos);
}

TEST_CASE("render writes html and svg") {
  const auto g = test::load_golden();
  const auto dir = test::scratch("cli_render");
  write_narrative(weave(g.session, g.vector, g.stats, WeaveConfig::parse("DAPSMH-vpa")), dir / "in" / "g001.json");
  const auto r = run("render --narrative '" + (dir / "in").string() + "' --attentions '" +
                     (test::fixtures() / "golden" / "attention.json").string() + "' --out '" + (dir / "out").string() + "'");
  REQUIRE(r.code == 0);
  CHECK(read_file((dir / "out" / "g001.html").string()) == test::golden("fixture.html"));
  CHECK(read_file((dir / "out" / "g001.svg").string()) == test::golden("fixture.svg"));
}

TEST_CASE("exit codes") {
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("evaluate --corpus x --trials 0").code == 2);
  CHECK(run("weave --corpus '" + test::golden_manifest().string() + "' --stats '" +
            (test::fixtures() / "golden" / "stats.json").string() + "' --config DQ --out /tmp/monah_test_never")
            .code == 2);
  CHECK(run("ingest-check --corpus /nonexistent/manifest.json").code == 1);
  CHECK(run("--help").code == 0);
}
