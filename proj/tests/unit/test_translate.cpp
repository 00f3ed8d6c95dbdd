#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "crossfake/error.hpp"
#include "crossfake/json_io.hpp"
#include "crossfake/parallel.hpp"
#include "crossfake/translate.hpp"
#include "helpers.hpp"

using namespace crossfake;
using crossfake::testing::kFixtures;
using crossfake::testing::make_article;
using crossfake::testing::TempDir;

namespace {

// Upper-cases its input; can be told to fail the first `failures` calls.
class ScriptedBackend final : public TranslationBackend {
 public:
  explicit ScriptedBackend(int failures = 0, bool retryable = true, bool empty = false)
      : failures_(failures), retryable_(retryable), empty_(empty) {}

  std::string name() const override { return "scripted"; }
  std::string translate(const TranslationRequest& request) const override {
    const int active = ++active_;
    int seen = max_active_.load();
    while (active > seen && !max_active_.compare_exchange_weak(seen, active)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    --active_;
    if (calls_++ < failures_) throw ServiceError("scripted failure", retryable_);
    if (empty_) return "  ";
    std::string out = request.text;
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
  }

  int calls() const { return calls_.load(); }
  int max_active() const { return max_active_.load(); }
  int delay_ms = 0;

 private:
  int failures_;
  bool retryable_;
  bool empty_;
  mutable std::atomic<int> calls_{0};
  mutable std::atomic<int> active_{0};
  mutable std::atomic<int> max_active_{0};
};

TranslatorOptions fast_retry(std::size_t attempts = 3) {
  TranslatorOptions o;
  o.retry.max_attempts = attempts;
  o.retry.initial_delay = std::chrono::milliseconds(1);
  return o;
}

const TranslationRequest kHello{Language::zh, Language::en, "ni hao"};

// LibreTranslate-style endpoint on an ephemeral local port.
class FakeService {
 public:
  FakeService() {
    server_.Post("/translate", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      last_body = req.body;
      if (status != 200) {
        res.status = status;
        return;
      }
      const auto j = Json::parse(req.body);
      res.set_content(Json{{"translatedText", "EN:" + j.at("q").get<std::string>()}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::atomic<int> hits{0};
  std::atomic<int> status{200};
  std::string last_body;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("cache keys hash the whole request") {
  CHECK(cache_key(kHello) == cache_key(TranslationRequest{Language::zh, Language::en, "ni hao"}));
  CHECK(cache_key(kHello) != cache_key(TranslationRequest{Language::en, Language::zh, "ni hao"}));
  CHECK(cache_key(kHello).size() == 64);
}

TEST_CASE("a repeated request is served from the cache") {
  auto backend = std::make_shared<ScriptedBackend>();
  Translator t(backend, nullptr);
  CHECK(t.translate(kHello) == "NI HAO");
  CHECK(t.translate(kHello) == "NI HAO");
  CHECK(backend->calls() == 1);
  CHECK(t.backend_calls() == 1);
}

TEST_CASE("the cache file survives a restart") {
  TempDir dir("mt");
  const auto file = dir / "cache.jsonl";
  {
    Translator t(std::make_shared<ScriptedBackend>(), std::make_shared<TranslationCache>(file));
    t.translate(kHello);
    t.translate({Language::zh, Language::en, "zai jian"});
  }
  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  const auto entry = Json::parse(line);
  CHECK(entry.at("key") == cache_key(kHello));
  CHECK(entry.at("source_lang") == "zh");
  CHECK(entry.at("target_lang") == "en");
  CHECK(entry.at("input_hash").get<std::string>().size() == 64);
  CHECK(entry.at("output") == "NI HAO");

  std::ofstream(file, std::ios::app) << "{truncated";
  auto backend = std::make_shared<ScriptedBackend>();
  auto cache = std::make_shared<TranslationCache>(file);
  CHECK(cache->size() == 2);
  CHECK(cache->skipped_lines() == 1);
  Translator t(backend, cache);
  CHECK(t.translate(kHello) == "NI HAO");
  CHECK(backend->calls() == 0);
}

TEST_CASE("fixture backend replays recorded pairs") {
  const auto backend = FixtureBackend::from_file(kFixtures / "mt_fixture.jsonl");
  CHECK(backend->size() >= 1);
  Translator t(backend, nullptr, fast_retry());
  CHECK(t.translate({Language::zh, Language::en, "新冠病毒疫苗是假新闻"}) ==
        "The new crown virus vaccine is fake news");
  try {
    t.translate({Language::zh, Language::en, "未录制"});
    FAIL("expected a ServiceError");
  } catch (const ServiceError& e) {
    CHECK_FALSE(e.retryable());
  }
  CHECK(t.backend_calls() == 2);
}

TEST_CASE("requests are validated") {
  Translator t(std::make_shared<ScriptedBackend>(), nullptr);
  CHECK_THROWS_AS(t.translate({Language::en, Language::en, "x"}), ValidationError);
  CHECK_THROWS_AS(t.translate({Language::zh, Language::en, " "}), ValidationError);
}

TEST_CASE("retryable failures are retried with backoff") {
  auto flaky = std::make_shared<ScriptedBackend>(2);
  Translator t(flaky, nullptr, fast_retry(3));
  CHECK(t.translate(kHello) == "NI HAO");
  CHECK(flaky->calls() == 3);

  auto down = std::make_shared<ScriptedBackend>(100);
  Translator t2(down, nullptr, fast_retry(3));
  try {
    t2.translate(kHello);
    FAIL("expected a ServiceError");
  } catch (const ServiceError& e) {
    CHECK(e.retryable());
  }
  CHECK(down->calls() == 3);

  RetryPolicy p;
  CHECK(p.delay_before(1).count() == 200);
  CHECK(p.delay_before(2).count() == 400);
  CHECK(p.delay_before(10).count() == 5000);
}

TEST_CASE("hard failures are not retried") {
  auto broken = std::make_shared<ScriptedBackend>(100, false);
  Translator t(broken, nullptr, fast_retry(3));
  CHECK_THROWS_AS(t.translate(kHello), ServiceError);
  CHECK(broken->calls() == 1);

  auto empty = std::make_shared<ScriptedBackend>(0, true, true);
  Translator t2(empty, nullptr, fast_retry(3));
  try {
    t2.translate(kHello);
    FAIL("expected a ServiceError");
  } catch (const ServiceError& e) {
    CHECK_FALSE(e.retryable());
  }
  CHECK(empty->calls() == 1);
  CHECK(t2.cache().size() == 0);
}

TEST_CASE("in-flight requests are bounded and shared") {
  auto backend = std::make_shared<ScriptedBackend>();
  backend->delay_ms = 5;
  TranslatorOptions opts;
  opts.max_in_flight = 2;
  Translator t(backend, nullptr, opts);
  parallel_for(24, 8, [&](std::size_t i) {
    t.translate({Language::zh, Language::en, "text " + std::to_string(i % 12)});
  });
  CHECK(backend->calls() == 12);
  CHECK(backend->max_active() <= 2);
}

TEST_CASE("glossary replacement") {
  TermGlossary g;
  g.add("new crown virus", "coronavirus");
  CHECK(g.apply("new crown virus spreads") == "coronavirus spreads");
  CHECK(TermGlossary{}.apply("new crown virus spreads") == "new crown virus spreads");
  CHECK(g.apply("New crown virus, new crown virus and NEW CROWN VIRUS") ==
        "coronavirus, coronavirus and coronavirus");
  CHECK(g.apply("renew crown viruses") == "renew crown viruses");
  const std::string once = g.apply("the new crown virus");
  CHECK(g.apply(once) == once);

  const auto d = TermGlossary::covid_default();
  CHECK(d.apply("The new crown pneumonia and new coronary pneumonia") ==
        "The COVID-19 and COVID-19");
}

TEST_CASE("glossary patterns apply in order") {
  TermGlossary g;
  g.add("a b", "c");
  g.add("c d", "e");
  CHECK(g.apply("a b d") == "e");
}

TEST_CASE("glossary TSV files") {
  TempDir dir("mt");
  std::ofstream(dir / "g.tsv") << "# comment\n\nwuhan pneumonia\tCOVID-19\r\nnew crown\tcorona\n";
  const auto g = TermGlossary::load_tsv(dir / "g.tsv");
  CHECK(g.size() == 2);
  CHECK(g.apply("wuhan pneumonia, new crown") == "COVID-19, corona");
  std::ofstream(dir / "bad.tsv") << "no tab here\n";
  CHECK_THROWS_AS(TermGlossary::load_tsv(dir / "bad.tsv"), ConfigError);
  CHECK_THROWS_AS(TermGlossary::load_tsv(dir / "absent.tsv"), ConfigError);
}

TEST_CASE("articles translate body only") {
  Translator t(std::make_shared<ScriptedBackend>(), nullptr);
  auto a = make_article("z1", "new crown virus", Label::fake, Language::zh);
  a.title = "title";
  const auto out = translate_article(a, Language::en, t, TermGlossary::covid_default());
  CHECK(out.language == Language::en);
  CHECK(out.title == "title");
  CHECK(out.body == "coronavirus");
  CHECK(out.label == Label::fake);
  CHECK(out.id == "z1");
}

TEST_CASE("dataset translation with and without partial results") {
  auto fixture = std::make_shared<FixtureBackend>();
  fixture->add({Language::zh, Language::en, "一"}, "one");
  Dataset ds;
  ds.language = Language::zh;
  ds.articles.push_back(make_article("a", "一", Label::real, Language::zh));
  ds.articles.push_back(make_article("b", "二", Label::fake, Language::zh));
  Translator t(fixture, nullptr, fast_retry());
  CHECK_THROWS_AS(translate_dataset(ds, Language::en, t, {}, 2, false), ServiceError);
  const auto partial = translate_dataset(ds, Language::en, t, {}, 2, true);
  REQUIRE(partial.dataset.size() == 1);
  CHECK(partial.dataset.articles[0].body == "one");
  CHECK(partial.dataset.language == Language::en);
  REQUIRE(partial.failures.size() == 1);
  CHECK(partial.failures[0].article_id == "b");
}

TEST_CASE("live backend speaks the LibreTranslate protocol") {
  FakeService service;
  HttpBackendOptions opts;
  opts.url = service.url();
  opts.api_key = "k";
  opts.timeout = std::chrono::milliseconds(2000);
  auto backend = std::make_shared<HttpBackend>(opts);
  Translator t(backend, nullptr, fast_retry(2));
  CHECK(t.translate(kHello) == "EN:ni hao");
  const auto body = Json::parse(service.last_body);
  CHECK(body.at("q") == "ni hao");
  CHECK(body.at("source") == "zh");
  CHECK(body.at("target") == "en");
  CHECK(body.at("format") == "text");
  CHECK(body.at("api_key") == "k");

  service.status = 503;
  try {
    t.translate({Language::zh, Language::en, "other"});
    FAIL("expected a ServiceError");
  } catch (const ServiceError& e) {
    CHECK(e.retryable());
  }
  CHECK(service.hits == 3);

  service.status = 400;
  try {
    t.translate({Language::zh, Language::en, "third"});
    FAIL("expected a ServiceError");
  } catch (const ServiceError& e) {
    CHECK_FALSE(e.retryable());
  }
  CHECK(service.hits == 4);
}

TEST_CASE("live backend reports an unreachable service as retryable") {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  HttpBackendOptions opts;
  opts.url = "http://127.0.0.1:" + std::to_string(port);
  opts.timeout = std::chrono::milliseconds(500);
  Translator t(std::make_shared<HttpBackend>(opts), nullptr, fast_retry(2));
  try {
    t.translate(kHello);
    FAIL("expected a ServiceError");
  } catch (const ServiceError& e) {
    CHECK(e.retryable());
  }
  CHECK_THROWS_AS(HttpBackend(HttpBackendOptions{"localhost:5000", "", std::chrono::milliseconds(100)}), ConfigError);
  CHECK_THROWS_AS(HttpBackend(HttpBackendOptions{"ftp://x", "", std::chrono::milliseconds(100)}), ConfigError);
}
