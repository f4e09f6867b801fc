#include "helpers.hpp"
#include "pipemeta/cli.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <sstream>

using namespace pipemeta;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> stable_lines(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  const auto store = read_results(path);
  for (auto r : store.records()) {
    r.train_time_s = 0;
    r.test_time_s = 0;
    lines.push_back(to_json_line(r));
  }
  return lines;
}

}  // namespace

TEST_CASE("usage errors exit 2, runtime failures exit 1") {
  testutil::TempDir dir;
  CHECK(run_cli({"run", "--bogus"}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
  CHECK(run_cli({"datasets", "synth", "--out", (dir / "x").string()}).code == 2);  // no seed
  const auto missing = run_cli({"run", "--data-dir", (dir / "nope").string(), "--out", (dir / "r.jsonl").string(),
                                "--seed", "1"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("pipemeta: error:") != std::string::npos);
  CHECK(run_cli({"report", "table3"}).code == 1);
  CHECK(run_cli({"report", "table9"}).code == 2);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("end-to-end on a small corpus") {
  testutil::TempDir dir;
  const auto data = (dir / "data").string();
  auto r = run_cli({"datasets", "synth", "--n", "3", "--out", data, "--seed", "2"});
  REQUIRE(r.code == 0);
  CHECK(discover_datasets(data).size() == 3);

  r = run_cli({"run", "--data-dir", data, "--out", (dir / "a.jsonl").string(), "--seed", "5"});
  REQUIRE(r.code == 0);
  r = run_cli({"run", "--data-dir", data, "--out", (dir / "b.jsonl").string(), "--seed", "5", "--jobs", "2"});
  REQUIRE(r.code == 0);
  CHECK(stable_lines(dir / "a.jsonl").size() == 162);
  CHECK(stable_lines(dir / "a.jsonl") == stable_lines(dir / "b.jsonl"));

  r = run_cli({"metafeatures", "--data-dir", data, "--out", (dir / "mf.csv").string(), "--seed", "5"});
  REQUIRE(r.code == 0);
  r = run_cli({"metadataset", "--results", (dir / "a.jsonl").string(), "--metafeatures", (dir / "mf.csv").string(),
               "--out", (dir / "meta.csv").string()});
  REQUIRE(r.code == 0);
  r = run_cli({"train-meta", "--meta", (dir / "meta.csv").string(), "--seed", "5", "--report"});
  CHECK(r.code == 0);
  CHECK(r.out.find("all") != std::string::npos);
  r = run_cli({"train-meta", "--meta", (dir / "meta.csv").string(), "--seed", "5", "--report",
               (dir / "eval.csv").string()});
  CHECK(r.code == 0);
  CHECK(testutil::read_file(dir / "eval.csv").rfind("clf,accuracy", 0) == 0);

  r = run_cli({"simulate", "--results", (dir / "a.jsonl").string(), "--metafeatures", (dir / "mf.csv").string(),
               "--seed", "5", "--out", (dir / "t3.csv").string(), "--log", (dir / "log.jsonl").string()});
  REQUIRE(r.code == 0);
  r = run_cli({"report", "table3", "--report", (dir / "t3.csv").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("Optimal") != std::string::npos);
  for (const std::string kind : {"table1", "table2", "fig1", "summary"}) {
    r = run_cli({"report", kind, "--results", (dir / "a.jsonl").string()});
    CHECK(r.code == 0);
    CHECK_FALSE(r.out.empty());
  }

  // Same input and output path is refused.
  r = run_cli({"metadataset", "--results", (dir / "a.jsonl").string(), "--metafeatures", (dir / "mf.csv").string(),
               "--out", (dir / "a.jsonl").string()});
  CHECK(r.code == 1);
}

TEST_CASE("config files supply defaults") {
  testutil::TempDir dir;
  testutil::write_file(dir / "cfg", "# defaults\nseed=9\n\nn=2\n");
  const auto expanded = expand_config({"datasets", "synth", "--config", (dir / "cfg").string(), "--n=4"});
  CHECK(std::find(expanded.begin(), expanded.end(), "--seed=9") != expanded.end());
  CHECK(std::find(expanded.begin(), expanded.end(), "--n=2") == expanded.end());
  CHECK(std::find(expanded.begin(), expanded.end(), "--n=4") != expanded.end());

  const auto r = run_cli({"datasets", "synth", "--out", (dir / "d").string(), "--config=" + (dir / "cfg").string()});
  CHECK(r.code == 0);
  CHECK(discover_datasets(dir / "d").size() == 2);

  testutil::write_file(dir / "bad", "seed 9\n");
  CHECK_THROWS(expand_config({"--config", (dir / "bad").string()}));
  CHECK(run_cli({"datasets", "synth", "--config", (dir / "absent").string()}).code != 0);
}

TEST_CASE("seed falls back to the environment") {
  testutil::TempDir dir;
  ::setenv("PIPEMETA_SEED", "4", 1);
  const auto r = run_cli({"datasets", "synth", "--n", "1", "--out", (dir / "d").string()});
  ::unsetenv("PIPEMETA_SEED");
  CHECK(r.code == 0);
  CHECK(discover_datasets(dir / "d").size() == 1);
}
