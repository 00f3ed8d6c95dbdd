#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "crossfake/cli.hpp"
#include "crossfake/corpus.hpp"
#include "crossfake/json_io.hpp"
#include "helpers.hpp"

using namespace crossfake;
using crossfake::testing::kFixtures;
using crossfake::testing::TempDir;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  args.insert(args.begin(), "--quiet");
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t epoch_lines(const std::string& out) {
  std::size_t n = 0;
  std::istringstream in(out);
  for (std::string line; std::getline(in, line);) n += line.rfind("epoch ", 0) == 0;
  return n;
}

// Trains a small planted-signal checkpoint once per process.
const std::filesystem::path& trained_checkpoint() {
  static TempDir dir("cli-ckpt");
  static const bool done = [] {
    REQUIRE(cli({"synth", "--kind", "planted", "--fake", "60", "--real", "60", "--seed", "3",
                 "-o", (dir / "train.jsonl").string()})
                .code == 0);
    const auto r = cli({"train", "--train", (dir / "train.jsonl").string(), "-o",
                        (dir / "ckpt").string(), "--epochs", "2", "--seed", "1"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return true;
  }();
  (void)done;
  static const auto path = dir / "ckpt";
  return path;
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({}).code == 2);
  CHECK(cli({"stats", "--bogus", "x"}).code == 2);
  CHECK(cli({"predict", "--checkpoint", "x"}).code == 2);
}

TEST_CASE("ingest reports rejected rows") {
  TempDir dir("cli");
  std::ofstream(dir / "raw.jsonl") << R"({"language":"en","id":"a","body":"one two","label":1})" "\n"
                                   << R"({"language":"en","id":"b","body":"three","label":"real"})" "\n"
                                   << R"({"language":"en","id":"c","label":1})" "\n"
                                   << R"({"language":"en","id":"d","body":"four five six","label":0})" "\n";
  const auto strict = cli({"ingest", "-i", (dir / "raw.jsonl").string(), "-o",
                           (dir / "clean.jsonl").string()});
  CHECK(strict.code == 1);
  CHECK(contains(strict.err, "first at row 2"));

  const auto lenient = cli({"ingest", "-i", (dir / "raw.jsonl").string(), "-o",
                            (dir / "clean.jsonl").string(), "--allow-partial"});
  REQUIRE(lenient.code == 0);
  CHECK(contains(lenient.out, "Accepted: 2\nRejected: 2\n"));
  CHECK(contains(lenient.out, "  row 3: missing body\n"));
  CHECK(load_dataset(dir / "clean.jsonl").size() == 2);
  const auto report = read_json_file(dir / "clean.jsonl.report.json");
  CHECK(report.dump().find("\"row\":3") != std::string::npos);
}

TEST_CASE("stats prints the dataset summary") {
  TempDir dir("cli");
  std::ofstream(dir / "d.jsonl") << R"({"language":"en","id":"a","body":"one two","label":1})" "\n"
                                 << R"({"language":"en","id":"b","body":"three","label":0})" "\n"
                                 << R"({"language":"en","id":"c","body":"x y z","label":0})" "\n";
  const auto r = cli({"stats", (dir / "d.jsonl").string()});
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "[d] "));
  CHECK(contains(r.out, "  Total: 3\n"));
  CHECK(contains(r.out, "  Fake: 33.33%\n"));
  CHECK(contains(r.out, "  Long Text: 0.00%\n"));

  std::ofstream(dir / "empty.jsonl").flush();
  CHECK(cli({"stats", (dir / "empty.jsonl").string()}).code != 0);
  CHECK(cli({"stats", (dir / "absent.jsonl").string()}).code != 0);
}

TEST_CASE("training needs labels") {
  TempDir dir("cli");
  std::ofstream(dir / "u.jsonl") << R"({"language":"en","id":"a","body":"one two"})" "\n"
                                 << R"({"language":"en","id":"b","body":"three","label":0})" "\n";
  const auto r = cli({"train", "--train", (dir / "u.jsonl").string(), "-o", (dir / "ck").string()});
  CHECK(r.code == 1);
  CHECK(contains(r.err, "'a'"));
}

TEST_CASE("option precedence: flag over config over environment") {
  TempDir dir("cli");
  REQUIRE(cli({"synth", "--fake", "10", "--real", "10", "-o", (dir / "t.jsonl").string()}).code == 0);
  std::ofstream(dir / "run.toml") << "[train]\nepochs = 2\n";
  const std::vector<std::string> base = {"train", "--train", (dir / "t.jsonl").string(), "-o",
                                         (dir / "ck").string(), "--val-fraction", "0.2"};
  ::setenv("CROSSFAKE_EPOCHS", "4", 1);
  const auto env_only = cli(base);
  auto with_config = base;
  with_config.insert(with_config.begin(), {"--config", (dir / "run.toml").string()});
  const auto config = cli(with_config);
  with_config.insert(with_config.end(), {"--epochs", "1"});
  const auto flag = cli(with_config);
  ::unsetenv("CROSSFAKE_EPOCHS");
  REQUIRE(env_only.code == 0);
  REQUIRE(config.code == 0);
  REQUIRE(flag.code == 0);
  CHECK(epoch_lines(env_only.out) == 4);
  CHECK(epoch_lines(config.out) == 2);
  CHECK(epoch_lines(flag.out) == 1);
  CHECK(epoch_lines(cli(base).out) == 3);
}

TEST_CASE("predicting on another language requires translation") {
  const auto& ckpt = trained_checkpoint();
  TempDir dir("cli");
  const auto zh = (kFixtures / "zh_articles.jsonl").string();
  const auto refused = cli({"predict", "-c", ckpt.string(), "-i", zh, "-o", (dir / "p.jsonl").string()});
  CHECK(refused.code == 2);
  CHECK(contains(refused.err, "--translate"));

  const std::vector<std::string> args = {"predict", "-c", ckpt.string(), "-i", zh, "--translate",
                                         "--mt-backend", "fixture", "--mt-fixture",
                                         (kFixtures / "mt_fixture.jsonl").string()};
  auto first = args;
  first.insert(first.end(), {"-o", (dir / "p1.jsonl").string()});
  auto second = args;
  second.insert(second.end(), {"-o", (dir / "p2.jsonl").string()});
  second.insert(second.begin(), {"--threads", "3"});
  const auto r1 = cli(first);
  REQUIRE_MESSAGE(r1.code == 0, r1.err);
  REQUIRE(cli(second).code == 0);
  CHECK(contains(r1.out, "Predicted: 6 ("));
  CHECK(slurp(dir / "p1.jsonl") == slurp(dir / "p2.jsonl"));

  const auto meta = read_json_file(dir / "p1.jsonl.meta.json");
  CHECK(meta.at("translation").at("backend") == "fixture");
  CHECK(meta.at("config").at("mode") == "sub");
  CHECK(meta.at("input").at("sha256").get<std::string>().size() == 64);
  CHECK(meta.at("predictions").at("count") == 6);

  auto missing = args;
  missing[9] = (kFixtures / "absent.jsonl").string();
  missing.insert(missing.end(), {"-o", (dir / "p3.jsonl").string()});
  CHECK(cli(missing).code != 0);
}

TEST_CASE("evaluate scores runs and checks article order") {
  const auto& ckpt = trained_checkpoint();
  TempDir dir("cli");
  REQUIRE(cli({"synth", "--fake", "8", "--real", "8", "--seed", "11", "-o",
               (dir / "test.jsonl").string()})
              .code == 0);
  for (const auto* run : {"run1", "run2"}) {
    std::filesystem::create_directories(dir / run);
    REQUIRE(cli({"predict", "-c", ckpt.string(), "-i", (dir / "test.jsonl").string(), "-o",
                 (dir / run / "predictions.jsonl").string()})
                .code == 0);
  }
  const auto r = cli({"evaluate", "--runs-dir", dir.path().string(), "-l",
                      (dir / "test.jsonl").string(), "-o", (dir / "report").string(), "--name",
                      "CrossFake-sub"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(contains(r.out, "CrossFake-sub"));
  CHECK(contains(r.out, "2 run(s)"));
  const auto report = read_json_file(dir / "report" / "report.json");
  CHECK(report.at("n_runs") == 2);
  CHECK(report.at("std").at("accuracy") == 0.0);
  CHECK(std::filesystem::exists(dir / "report" / "table.txt"));

  auto ds = load_dataset(dir / "test.jsonl");
  std::swap(ds.articles[0], ds.articles[1]);
  save_jsonl(ds, dir / "shuffled.jsonl");
  const auto bad = cli({"evaluate", "-p", (dir / "run1" / "predictions.jsonl").string(), "-l",
                        (dir / "shuffled.jsonl").string()});
  CHECK(bad.code == 1);
  CHECK(contains(bad.err, ds.articles[0].id));

  CHECK(cli({"evaluate", "-l", (dir / "test.jsonl").string()}).code == 2);
}
