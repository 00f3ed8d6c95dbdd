#include "crossfake/cli.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "crossfake/corpus.hpp"
#include "crossfake/encoder.hpp"
#include "crossfake/error.hpp"
#include "crossfake/eval.hpp"
#include "crossfake/hashing.hpp"
#include "crossfake/json_io.hpp"
#include "crossfake/model.hpp"
#include "crossfake/synthetic.hpp"
#include "crossfake/text.hpp"
#include "crossfake/translate.hpp"

namespace crossfake {
namespace {

namespace fs = std::filesystem;

std::string env_name(std::string_view flag) {
  std::string out = "CROSSFAKE_";
  flag = flag.substr(0, flag.find(','));
  for (char c : flag.substr(flag.find_first_not_of('-'))) {
    out.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

template <typename T>
CLI::Option* add(CLI::App* app, const std::string& flag, T& value, const std::string& help) {
  return app->add_option(flag, value, help)->envname(env_name(flag))->capture_default_str();
}

CLI::Option* add_flag(CLI::App* app, const std::string& flag, bool& value,
                      const std::string& help) {
  return app->add_flag(flag, value, help)->envname(env_name(flag));
}

struct Global {
  std::size_t threads = 0;
  bool quiet = false;
};

class Log {
 public:
  Log(std::ostream& err, const Global& global) : err_(err), global_(global) {}
  template <typename... Args>
  void operator()(fmt::format_string<Args...> f, Args&&... args) const {
    if (!global_.quiet) err_ << "[crossfake] " << fmt::format(f, std::forward<Args>(args)...) << '\n';
  }

 private:
  std::ostream& err_;
  const Global& global_;
};

Format format_of(const std::string& name, const fs::path& path) {
  if (name == "auto") {
    return path.extension() == ".csv" ? Format::csv : Format::jsonl;
  }
  const auto f = parse_format(name);
  if (!f) throw ConfigError(fmt::format("unknown format '{}'", name));
  return *f;
}

Language language_of(const std::string& code) {
  const auto lang = parse_language(code);
  if (!lang) throw ConfigError(fmt::format("unsupported language '{}'", code));
  return *lang;
}

Json data_json(const fs::path& path, const Dataset& ds) {
  return Json{{"path", path.string()},
              {"name", ds.name},
              {"language", to_code(ds.language)},
              {"size", ds.size()},
              {"sha256", fingerprint(ds)}};
}

std::string percent(double fraction) { return fmt::format("{:.2f}%", 100.0 * fraction); }

// ---------------------------------------------------------------------------

struct EncoderFlags {
  std::string name = "mock";
  std::string model_dir;
  std::string pooling = "cls";
  std::uint64_t mock_seed = 0;
  std::size_t mock_dim = MockEncoder::kDefaultDim;

  void attach(CLI::App* app) {
    add(app, "--encoder", name, "Encoder backend (mock, bert)");
    add(app, "--model-dir", model_dir, "Directory with config.json, vocab.txt, model.safetensors");
    add(app, "--pooling", pooling, "Group pooling for transformer encoders")
        ->check(CLI::IsMember({"cls", "mean"}));
    add(app, "--mock-seed", mock_seed, "Seed of the mock encoder");
    add(app, "--mock-dim", mock_dim, "Embedding size of the mock encoder");
  }

  EncoderSpec spec() const {
    EncoderSpec s;
    s.name = name;
    s.model_dir = model_dir;
    s.pooling = *parse_pooling(pooling);
    s.mock_seed = mock_seed;
    s.mock_dim = mock_dim;
    return s;
  }
};

// ---------------------------------------------------------------------------
// ingest

struct IngestCmd {
  std::string input;
  std::string format = "auto";
  std::string output;
  std::string language;
  std::string name;
  std::string report;
  bool allow_partial = false;

  void attach(CLI::App* app) {
    add(app, "--input,-i", input, "Raw corpus file")->required();
    add(app, "--format", format, "jsonl, csv or auto (by extension)")
        ->check(CLI::IsMember({"auto", "jsonl", "csv"}));
    add(app, "--output,-o", output, "Validated JSONL dataset to write")->required();
    add(app, "--language", language, "Expected language of every row (en, zh)");
    add(app, "--name", name, "Dataset name (default: input file stem)");
    add(app, "--report", report, "Validation report JSON (default: <output>.report.json)");
    add_flag(app, "--allow-partial", allow_partial, "Succeed even when rows were rejected");
  }

  Json config() const {
    return Json{{"input", input},       {"format", format},   {"output", output},
                {"language", language}, {"name", name},       {"report", report},
                {"allow_partial", allow_partial}};
  }

  int run(std::ostream& out, const Log& log) const {
    const fs::path in_path(input);
    LoadOptions opts;
    if (!language.empty()) opts.language = language_of(language);
    opts.name = name.empty() ? in_path.stem().string() : name;
    const auto loaded = load_articles(in_path, format_of(format, in_path), opts);

    Json rep;
    rep["command"] = "ingest";
    rep["config"] = config();
    rep["input"] = Json{{"path", input}, {"sha256", sha256_file(in_path)}};
    rep["accepted"] = loaded.dataset.size();
    rep["rejected"] = Json::array();
    for (const auto& r : loaded.rejected) {
      rep["rejected"].push_back(Json{{"row", r.row}, {"reason", r.reason}});
    }
    const fs::path report_path = report.empty() ? fs::path(output + ".report.json") : fs::path(report);

    out << fmt::format("Accepted: {}\nRejected: {}\n", loaded.dataset.size(), loaded.rejected.size());
    for (const auto& r : loaded.rejected) out << fmt::format("  row {}: {}\n", r.row, r.reason);

    if (!loaded.rejected.empty() && !allow_partial) {
      rep["output"] = nullptr;
      write_json_file(report_path, rep);
      const auto& first = loaded.rejected.front();
      throw ValidationError(fmt::format(
          "{} row(s) rejected, first at row {} ({}); pass --allow-partial to keep the valid rows",
          loaded.rejected.size(), first.row, first.reason));
    }
    for (const auto& r : loaded.rejected) log("dropped row {}: {}", r.row, r.reason);
    save_jsonl(loaded.dataset, output);
    rep["output"] = data_json(output, loaded.dataset);
    write_json_file(report_path, rep);
    log("wrote {} articles to {}", loaded.dataset.size(), output);
    return 0;
  }
};

// ---------------------------------------------------------------------------
// stats

struct StatsCmd {
  std::vector<std::string> datasets;
  std::string format = "auto";
  std::size_t token_limit = 512;
  std::string json;
  EncoderFlags encoder;

  void attach(CLI::App* app) {
    app->add_option("datasets", datasets, "Dataset files")->required();
    add(app, "--format", format, "jsonl, csv or auto")->check(CLI::IsMember({"auto", "jsonl", "csv"}));
    add(app, "--token-limit", token_limit, "Articles longer than this count as long text");
    add(app, "--json", json, "Also write the statistics as JSON");
    encoder.attach(app);
  }

  int run(std::ostream& out, const Log&) const {
    const auto bundle = make_encoder(encoder.spec());
    Json all = Json::array();
    for (const auto& path : datasets) {
      const fs::path p(path);
      LoadOptions opts;
      opts.name = p.stem().string();
      const Dataset ds = load_dataset(p, format_of(format, p), opts);
      const auto report = dataset_stats(ds, *bundle.tokenizer, token_limit);
      out << fmt::format("[{}] {}\n", ds.name, path);
      out << fmt::format("  Total: {}\n", report.total);
      out << fmt::format("  Fake: {}\n",
                         report.fake_fraction ? percent(*report.fake_fraction) : "n/a (unlabeled)");
      out << fmt::format("  Long Text: {}\n", percent(report.long_text_fraction));
      Json j = to_json(report);
      j["dataset"] = data_json(p, ds);
      all.push_back(std::move(j));
    }
    if (!json.empty()) write_json_file(json, all);
    return 0;
  }
};

// ---------------------------------------------------------------------------
// train

struct TrainCmd {
  std::string train_path;
  std::string val_path;
  double val_fraction = 0.1;
  std::string out_dir;
  std::string format = "auto";
  TrainConfig cfg;
  EncoderFlags encoder;

  void attach(CLI::App* app) {
    add(app, "--train", train_path, "Labeled training dataset")->required();
    add(app, "--val", val_path, "Labeled validation dataset (default: split from --train)");
    add(app, "--val-fraction", val_fraction, "Validation share split from --train when --val is absent")
        ->check(CLI::Range(0.0, 0.99));
    add(app, "--out,-o", out_dir, "Checkpoint directory")->required();
    add(app, "--format", format, "jsonl, csv or auto")->check(CLI::IsMember({"auto", "jsonl", "csv"}));
    add(app, "--learning-rate,--lr", cfg.learning_rate, "SGD learning rate");
    add(app, "--epochs", cfg.epochs, "Training epochs");
    add(app, "--batch-size", cfg.batch_size, "Articles per SGD step");
    add(app, "--seed", cfg.seed, "Seed for initialisation, shuffling and the validation split");
    add(app, "--window-train", cfg.window_train, "Tokens per group during training");
    add(app, "--theta", cfg.theta, "Default sub-mode threshold stored with the checkpoint");
    add(app, "--fc-dim", cfg.fc_dim, "Width of the projection layer");
    add(app, "--hidden-dim", cfg.hidden_dim, "Width of the classifier hidden layer");
    add_flag(app, "--include-title", cfg.include_title, "Prefix the title to the body");
    add_flag(app, "--fine-tune", cfg.fine_tune, "Update encoder weights (trainable encoders only)");
    encoder.attach(app);
  }

  Json config() const {
    Json j = cfg.to_json();
    j["train"] = train_path;
    j["val"] = val_path;
    j["val_fraction"] = val_fraction;
    j["out"] = out_dir;
    return j;
  }

  int run(std::ostream& out, const Log& log, const Global& global) {
    cfg.encoder = encoder.spec();
    cfg.threads = global.threads;
    cfg.validate();
    const fs::path tp(train_path);
    LoadOptions opts;
    opts.name = tp.stem().string();
    Dataset train_set = load_dataset(tp, format_of(format, tp), opts);
    Dataset val_set;
    if (!val_path.empty()) {
      const fs::path vp(val_path);
      LoadOptions vopts;
      vopts.name = vp.stem().string();
      val_set = load_dataset(vp, format_of(format, vp), vopts);
    } else if (val_fraction > 0.0) {
      std::tie(train_set, val_set) = split_dataset(train_set, cfg.seed, val_fraction);
    } else {
      val_set.language = train_set.language;
    }
    log("training on {} articles, validating on {}", train_set.size(), val_set.size());

    auto ckpt = train(train_set, val_set, cfg);
    ckpt.manifest.run_config = config();
    save_checkpoint(ckpt, out_dir);

    for (const auto& e : ckpt.manifest.history) {
      out << fmt::format("epoch {}: train_loss {:.6f}", e.epoch, e.train_loss);
      if (e.val_loss) out << fmt::format(" val_loss {:.6f} val_acc {:.4f}", *e.val_loss, *e.val_accuracy);
      out << '\n';
    }
    out << fmt::format("selected epoch: {}\n", ckpt.manifest.selected_epoch);
    if (ckpt.manifest.val_metrics) {
      const auto& v = ckpt.manifest.val_metrics->values;
      out << fmt::format("val accuracy {:.4f} precision {:.4f} recall {:.4f} f1 {:.4f}\n",
                         v.accuracy, v.precision, v.recall, v.f1);
    }
    log("checkpoint written to {}", out_dir);
    return 0;
  }
};

// ---------------------------------------------------------------------------
// machine translation flags shared by predict and translate

struct MtFlags {
  std::string backend = "identity";
  std::string fixture;
  std::string url = "http://127.0.0.1:5000";
  std::string api_key;
  std::size_t timeout_ms = 30000;
  std::string cache;
  std::size_t max_in_flight = 4;
  std::size_t attempts = 4;
  std::size_t backoff_ms = 200;
  std::string glossary;
  bool no_default_glossary = false;
  bool allow_partial = false;

  void attach(CLI::App* app) {
    add(app, "--mt-backend", backend, "Translation backend")
        ->check(CLI::IsMember({"live", "fixture", "identity"}));
    add(app, "--mt-fixture", fixture, "Recorded translations (JSONL) for the fixture backend");
    add(app, "--mt-url", url, "Base URL of a LibreTranslate-compatible service");
    add(app, "--mt-api-key", api_key, "API key sent to the live service");
    add(app, "--mt-timeout-ms", timeout_ms, "Per-request timeout of the live service");
    add(app, "--mt-cache", cache, "Persistent translation cache (JSONL)");
    add(app, "--mt-max-in-flight", max_in_flight, "Concurrent backend requests");
    add(app, "--mt-attempts", attempts, "Attempts per request before giving up");
    add(app, "--mt-backoff-ms", backoff_ms, "Delay before the first retry; doubles each retry");
    add(app, "--glossary", glossary, "Extra term replacements (TSV: phrase<TAB>replacement)");
    add_flag(app, "--no-default-glossary", no_default_glossary, "Skip the built-in COVID-19 terms");
    add_flag(app, "--allow-partial", allow_partial, "Drop articles whose translation fails");
  }

  Json config() const {
    return Json{{"backend", backend},       {"fixture", fixture},
                {"url", url},               {"timeout_ms", timeout_ms},
                {"cache", cache},           {"max_in_flight", max_in_flight},
                {"attempts", attempts},     {"backoff_ms", backoff_ms},
                {"glossary", glossary},     {"default_glossary", !no_default_glossary},
                {"allow_partial", allow_partial}};
  }

  std::shared_ptr<const TranslationBackend> make_backend() const {
    if (backend == "identity") return std::make_shared<IdentityBackend>();
    if (backend == "fixture") {
      if (fixture.empty()) throw ConfigError("--mt-backend fixture needs --mt-fixture");
      return FixtureBackend::from_file(fixture);
    }
    return std::make_shared<HttpBackend>(
        HttpBackendOptions{url, api_key, std::chrono::milliseconds(timeout_ms)});
  }

  TermGlossary make_glossary() const {
    TermGlossary g = no_default_glossary ? TermGlossary{} : TermGlossary::covid_default();
    if (!glossary.empty()) g.extend(TermGlossary::load_tsv(glossary));
    return g;
  }

  DatasetTranslation translate(const Dataset& ds, Language target, std::size_t threads,
                               const Log& log) const {
    TranslatorOptions opts;
    opts.max_in_flight = max_in_flight;
    opts.retry.max_attempts = attempts;
    opts.retry.initial_delay = std::chrono::milliseconds(backoff_ms);
    auto cache_store = cache.empty() ? std::make_shared<TranslationCache>()
                                     : std::make_shared<TranslationCache>(fs::path(cache));
    if (cache_store->skipped_lines() > 0) {
      log("ignored {} unreadable line(s) in {}", cache_store->skipped_lines(), cache);
    }
    Translator translator(make_backend(), cache_store, opts);
    auto result = translate_dataset(ds, target, translator, make_glossary(), threads, allow_partial);
    log("translated {} articles {}->{} with the {} backend ({} backend calls)",
        result.dataset.size(), to_code(ds.language), to_code(target), backend,
        translator.backend_calls());
    for (const auto& f : result.failures) log("dropped '{}': {}", f.article_id, f.reason);
    if (result.dataset.empty()) throw ServiceError("no article could be translated", true);
    return result;
  }
};

Json failures_json(const std::vector<TranslationFailure>& failures) {
  Json j = Json::array();
  for (const auto& f : failures) j.push_back(Json{{"id", f.article_id}, {"reason", f.reason}});
  return j;
}

// ---------------------------------------------------------------------------
// predict

struct PredictCmd {
  std::string checkpoint;
  std::string input;
  std::string output;
  std::string format = "auto";
  std::string mode = "sub";
  std::optional<double> theta;
  std::size_t window = kTestWindow;
  std::size_t limit = 512;
  std::string model_dir;
  bool translate = false;
  MtFlags mt;

  void attach(CLI::App* app) {
    add(app, "--checkpoint,-c", checkpoint, "Checkpoint directory")->required();
    add(app, "--input,-i", input, "Dataset to classify")->required();
    add(app, "--output,-o", output, "Predictions JSONL")->required();
    add(app, "--format", format, "jsonl, csv or auto")->check(CLI::IsMember({"auto", "jsonl", "csv"}));
    add(app, "--mode", mode, "avg, sub or truncated")
        ->check(CLI::IsMember({"avg", "sub", "truncated"}));
    app->add_option("--theta", theta, "Decision threshold (default: the checkpoint's)")
        ->envname("CROSSFAKE_THETA");
    add(app, "--window", window, "Tokens per group at prediction time");
    add(app, "--limit", limit, "Encoder input limit in truncated mode, boundary tokens included");
    add(app, "--model-dir", model_dir, "Override the encoder weights location");
    add_flag(app, "--translate", translate,
             "Translate input whose language differs from the checkpoint's");
    mt.attach(app);
  }

  Json config(double resolved_theta) const {
    return Json{{"checkpoint", checkpoint}, {"input", input},     {"output", output},
                {"mode", mode},             {"theta", resolved_theta},
                {"window", window},         {"limit", limit},     {"model_dir", model_dir},
                {"translate", translate},   {"mt", mt.config()}};
  }

  int run(std::ostream& out, const Log& log, const Global& global) const {
    const auto clf = model_dir.empty() ? Classifier::open(checkpoint)
                                       : Classifier::open(checkpoint, fs::path(model_dir));
    const auto& manifest = clf.checkpoint().manifest;
    const fs::path in_path(input);
    LoadOptions opts;
    opts.name = in_path.stem().string();
    const Dataset original = load_dataset(in_path, format_of(format, in_path), opts);

    Json meta;
    meta["command"] = "predict";
    const double th = theta.value_or(manifest.config.theta);
    meta["config"] = config(th);
    meta["checkpoint"] = Json{{"path", checkpoint},
                              {"language", to_code(manifest.language)},
                              {"tokenizer_id", manifest.tokenizer_id},
                              {"encoder_fingerprint", manifest.encoder_fingerprint},
                              {"head_sha256", sha256_file(fs::path(checkpoint) / "head.bin")},
                              {"train_data_sha256", manifest.train_data.sha256}};
    meta["input"] = data_json(in_path, original);

    Dataset ds = original;
    if (original.language != manifest.language) {
      if (!translate) {
        throw ConfigError(fmt::format(
            "input is '{}' but the checkpoint was trained on '{}'; pass --translate with an "
            "--mt-backend to translate it first",
            to_code(original.language), to_code(manifest.language)));
      }
      auto result = mt.translate(original, manifest.language, global.threads, log);
      meta["translation"] = Json{{"backend", mt.backend},
                                 {"target", to_code(manifest.language)},
                                 {"translated_sha256", fingerprint(result.dataset)},
                                 {"failures", failures_json(result.failures)}};
      ds = std::move(result.dataset);
    }

    PredictOptions popts;
    popts.mode = *parse_mode(mode);
    popts.window = window;
    popts.limit = limit;
    popts.theta = th;
    popts.threads = global.threads;
    const auto records = predict_all(clf, ds.articles, popts);

    std::string lines;
    std::size_t fakes = 0;
    for (const auto& r : records) {
      lines += r.to_json().dump();
      lines += '\n';
      if (r.verdict == Label::fake) ++fakes;
    }
    write_text_file(output, lines);
    meta["predictions"] = Json{{"path", output}, {"count", records.size()}, {"sha256", sha256_hex(lines)}};
    write_json_file(output + ".meta.json", meta);
    out << fmt::format("Predicted: {} ({} fake, {} real) mode={} theta={}\n", records.size(), fakes,
                       records.size() - fakes, mode, popts.mode == PredictionMode::avg ? kAvgThreshold : th);
    log("predictions written to {}", output);
    return 0;
  }
};

// ---------------------------------------------------------------------------
// translate

struct TranslateCmd {
  std::string input;
  std::string output;
  std::string format = "auto";
  std::string target = "en";
  MtFlags mt;

  void attach(CLI::App* app) {
    add(app, "--input,-i", input, "Dataset to translate")->required();
    add(app, "--output,-o", output, "Translated JSONL dataset")->required();
    add(app, "--format", format, "jsonl, csv or auto")->check(CLI::IsMember({"auto", "jsonl", "csv"}));
    add(app, "--target", target, "Target language")->check(CLI::IsMember({"en", "zh"}));
    mt.attach(app);
  }

  int run(std::ostream& out, const Log& log, const Global& global) const {
    const fs::path in_path(input);
    LoadOptions opts;
    opts.name = in_path.stem().string();
    const Dataset ds = load_dataset(in_path, format_of(format, in_path), opts);
    const auto result = mt.translate(ds, language_of(target), global.threads, log);
    save_jsonl(result.dataset, output);
    Json meta;
    meta["command"] = "translate";
    meta["config"] = Json{{"input", input}, {"output", output}, {"target", target}, {"mt", mt.config()}};
    meta["input"] = data_json(in_path, ds);
    meta["output"] = data_json(output, result.dataset);
    meta["failures"] = failures_json(result.failures);
    write_json_file(output + ".meta.json", meta);
    out << fmt::format("Translated: {}\nFailed: {}\n", result.dataset.size(), result.failures.size());
    return 0;
  }
};

// ---------------------------------------------------------------------------
// evaluate

std::vector<PredictionRecord> load_predictions(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open predictions '{}'", path.string()));
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (text::is_blank(line)) continue;
    try {
      out.push_back(PredictionRecord::from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw ValidationError(fmt::format("{}:{}: {}", path.string(), row, e.what()));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}:{}: {}", path.string(), row, e.what()));
    }
  }
  if (out.empty()) throw ValidationError(fmt::format("{} holds no predictions", path.string()));
  return out;
}

RunMetrics score_run(const std::vector<PredictionRecord>& preds, const Dataset& labels,
                     const fs::path& source) {
  const std::size_t n = std::min(preds.size(), labels.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (preds[i].article_id != labels.articles[i].id) {
      throw ValidationError(fmt::format("{}: prediction {} is for '{}' but label {} is for '{}'",
                                        source.string(), i + 1, preds[i].article_id, i + 1,
                                        labels.articles[i].id));
    }
  }
  if (preds.size() != labels.size()) {
    const bool more_preds = preds.size() > labels.size();
    throw ValidationError(fmt::format(
        "{}: {} predictions for {} labels; first unmatched id '{}'", source.string(), preds.size(),
        labels.size(), more_preds ? preds[n].article_id : labels.articles[n].id));
  }
  std::vector<Label> p;
  std::vector<Label> y;
  for (std::size_t i = 0; i < n; ++i) {
    if (!labels.articles[i].label) {
      throw ValidationError(fmt::format("article '{}' has no label", labels.articles[i].id));
    }
    p.push_back(preds[i].verdict);
    y.push_back(*labels.articles[i].label);
  }
  return compute_metrics(p, y);
}

struct EvaluateCmd {
  std::vector<std::string> predictions;
  std::string runs_dir;
  std::string labels;
  std::string format = "auto";
  std::string out_dir;
  std::string model_name = "CrossFake";

  void attach(CLI::App* app) {
    add(app, "--predictions,-p", predictions, "Predictions JSONL of one run (repeatable)");
    add(app, "--runs-dir", runs_dir, "Directory whose subdirectories each hold predictions.jsonl");
    add(app, "--labels,-l", labels, "Labeled dataset in prediction order")->required();
    add(app, "--format", format, "jsonl, csv or auto")->check(CLI::IsMember({"auto", "jsonl", "csv"}));
    add(app, "--out,-o", out_dir, "Write report.json and table.txt here");
    add(app, "--name", model_name, "Row label of the results table");
  }

  std::vector<fs::path> run_files() const {
    std::vector<fs::path> files(predictions.begin(), predictions.end());
    if (!runs_dir.empty()) {
      if (!fs::is_directory(runs_dir)) {
        throw ConfigError(fmt::format("runs directory '{}' does not exist", runs_dir));
      }
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(runs_dir)) {
        const auto candidate = entry.path() / "predictions.jsonl";
        if (entry.is_directory() && fs::exists(candidate)) found.push_back(candidate);
      }
      std::sort(found.begin(), found.end());
      if (found.empty()) {
        throw ConfigError(fmt::format("no */predictions.jsonl under '{}'", runs_dir));
      }
      files.insert(files.end(), found.begin(), found.end());
    }
    if (files.empty()) throw ConfigError("pass --predictions or --runs-dir");
    return files;
  }

  int run(std::ostream& out, const Log& log) const {
    const fs::path label_path(labels);
    LoadOptions opts;
    opts.name = label_path.stem().string();
    const Dataset ds = load_dataset(label_path, format_of(format, label_path), opts);
    std::vector<RunMetrics> runs;
    Json inputs = Json::array();
    for (const auto& f : run_files()) {
      runs.push_back(score_run(load_predictions(f), ds, f));
      for (const auto& w : runs.back().warnings) log("{}: {}", f.string(), w);
      inputs.push_back(Json{{"path", f.string()}, {"sha256", sha256_file(f)}});
    }
    const auto report = multi_run_report(std::move(runs));
    const std::string table = render_table(report, model_name);
    out << table;
    if (!out_dir.empty()) {
      Json j = to_json(report);
      j["config"] = Json{{"labels", labels},   {"runs_dir", runs_dir}, {"predictions", predictions},
                         {"out", out_dir},     {"name", model_name}};
      j["inputs"] = Json{{"labels", data_json(label_path, ds)}, {"predictions", inputs}};
      write_json_file(fs::path(out_dir) / "report.json", j);
      write_text_file(fs::path(out_dir) / "table.txt", table);
      log("report written to {}", (fs::path(out_dir) / "report.json").string());
    }
    return 0;
  }
};

// ---------------------------------------------------------------------------
// synth

struct SynthCmd {
  std::string kind = "planted";
  std::string output;
  std::uint64_t seed = 7;
  std::size_t n_fake = 200;
  std::size_t n_real = 200;

  void attach(CLI::App* app) {
    add(app, "--kind", kind, "planted, train-composition or test-composition")
        ->check(CLI::IsMember({"planted", "train-composition", "test-composition"}));
    add(app, "--output,-o", output, "JSONL dataset to write")->required();
    add(app, "--seed", seed, "Generator seed");
    add(app, "--fake", n_fake, "Fake articles (planted only)");
    add(app, "--real", n_real, "Real articles (planted only)");
  }

  int run(std::ostream& out, const Log&) const {
    Dataset ds;
    if (kind == "planted") {
      synthetic::PlantedOptions opts;
      opts.seed = seed;
      opts.n_fake = n_fake;
      opts.n_real = n_real;
      ds = synthetic::planted_corpus(opts).dataset;
    } else {
      auto spec = kind == "train-composition" ? synthetic::training_composition()
                                              : synthetic::test_composition();
      ds = synthetic::composition_fixture(spec);
    }
    save_jsonl(ds, output);
    out << fmt::format("Wrote {} articles to {}\n", ds.size(), output);
    return 0;
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-lingual fake news detection with chunked transformer encoders",
               "crossfake"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML file of option values (flags > config > environment)");
  Global global;
  add(&app, "--threads", global.threads, "Worker threads (0 = all cores)");
  add_flag(&app, "--quiet,-q", global.quiet, "Suppress progress messages");

  IngestCmd ingest;
  StatsCmd stats;
  TrainCmd train_cmd;
  PredictCmd predict_cmd;
  TranslateCmd translate_cmd;
  EvaluateCmd evaluate;
  SynthCmd synth;
  auto* ingest_app = app.add_subcommand("ingest", "Validate a raw corpus and write canonical JSONL");
  auto* stats_app = app.add_subcommand("stats", "Dataset statistics: size, fake share, long texts");
  auto* train_app = app.add_subcommand("train", "Train a classifier head and write a checkpoint");
  auto* predict_app = app.add_subcommand("predict", "Classify articles with a checkpoint");
  auto* translate_app = app.add_subcommand("translate", "Machine-translate a dataset");
  auto* evaluate_app = app.add_subcommand("evaluate", "Score predictions against labels");
  auto* synth_app = app.add_subcommand("synth", "Generate synthetic datasets");
  ingest.attach(ingest_app);
  stats.attach(stats_app);
  train_cmd.attach(train_app);
  predict_cmd.attach(predict_app);
  translate_cmd.attach(translate_app);
  evaluate.attach(evaluate_app);
  synth.attach(synth_app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kConfig);
  }

  const Log log(err, global);
  try {
    if (*ingest_app) return ingest.run(out, log);
    if (*stats_app) return stats.run(out, log);
    if (*train_app) return train_cmd.run(out, log, global);
    if (*predict_app) return predict_cmd.run(out, log, global);
    if (*translate_app) return translate_cmd.run(out, log, global);
    if (*evaluate_app) return evaluate.run(out, log);
    if (*synth_app) return synth.run(out, log);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kValidation);
  }
  return static_cast<int>(ExitCode::kConfig);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("crossfake");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace crossfake
