#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "crossfake/error.hpp"
#include "crossfake/model.hpp"

namespace crossfake {
namespace {

constexpr std::array<char, 8> kHeadMagic = {'C', 'F', 'H', 'E', 'A', 'D', '0', '1'};
constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kHeadFile = "head.bin";

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) {
    v = (v << 8) | static_cast<unsigned char>(in[offset + static_cast<std::size_t>(i)]);
  }
  return v;
}

Json fingerprint_json(const DataFingerprint& d) {
  return Json{{"name", d.name}, {"size", d.size}, {"sha256", d.sha256}};
}

DataFingerprint fingerprint_from_json(const Json& j) {
  return {j.at("name").get<std::string>(), j.at("size").get<std::size_t>(),
          j.at("sha256").get<std::string>()};
}

template <typename T>
void read_optional(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Json TrainConfig::to_json() const {
  Json j;
  j["learning_rate"] = learning_rate;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["seed"] = seed;
  j["window_train"] = window_train;
  j["optimizer"] = "sgd";
  j["theta"] = theta;
  j["encoder"] = encoder.to_json();
  j["fine_tune"] = fine_tune;
  j["fc_dim"] = fc_dim;
  j["hidden_dim"] = hidden_dim;
  j["include_title"] = include_title;
  return j;
}

TrainConfig TrainConfig::from_json(const Json& j) {
  TrainConfig c;
  read_optional(j, "learning_rate", c.learning_rate);
  read_optional(j, "epochs", c.epochs);
  read_optional(j, "batch_size", c.batch_size);
  read_optional(j, "seed", c.seed);
  read_optional(j, "window_train", c.window_train);
  if (j.contains("optimizer") && j["optimizer"].get<std::string>() != "sgd") {
    throw ConfigError(fmt::format("unsupported optimizer '{}'", j["optimizer"].get<std::string>()));
  }
  read_optional(j, "theta", c.theta);
  if (j.contains("encoder")) c.encoder = EncoderSpec::from_json(j["encoder"]);
  read_optional(j, "fine_tune", c.fine_tune);
  read_optional(j, "fc_dim", c.fc_dim);
  read_optional(j, "hidden_dim", c.hidden_dim);
  read_optional(j, "include_title", c.include_title);
  return c;
}

Json Manifest::to_json() const {
  Json j;
  j["format"] = "crossfake-checkpoint/1";
  j["language"] = to_code(language);
  j["tokenizer_id"] = tokenizer_id;
  j["encoder_fingerprint"] = encoder_fingerprint;
  j["config"] = config.to_json();
  j["train_data"] = fingerprint_json(train_data);
  j["val_data"] = val_data ? fingerprint_json(*val_data) : Json(nullptr);
  j["history"] = Json::array();
  for (const auto& e : history) {
    Json h;
    h["epoch"] = e.epoch;
    h["train_loss"] = e.train_loss;
    h["val_loss"] = e.val_loss ? Json(*e.val_loss) : Json(nullptr);
    h["val_accuracy"] = e.val_accuracy ? Json(*e.val_accuracy) : Json(nullptr);
    j["history"].push_back(std::move(h));
  }
  j["selected_epoch"] = selected_epoch;
  j["val_metrics"] = val_metrics ? crossfake::to_json(*val_metrics) : Json(nullptr);
  j["val_loss"] = val_loss ? Json(*val_loss) : Json(nullptr);
  if (!run_config.is_null()) j["run_config"] = run_config;
  return j;
}

Manifest Manifest::from_json(const Json& j) {
  Manifest m;
  const auto lang = parse_language(j.at("language").get<std::string>());
  if (!lang) throw ConfigError("manifest has an unknown language");
  m.language = *lang;
  m.tokenizer_id = j.at("tokenizer_id").get<std::string>();
  m.encoder_fingerprint = j.at("encoder_fingerprint").get<std::string>();
  m.config = TrainConfig::from_json(j.at("config"));
  m.train_data = fingerprint_from_json(j.at("train_data"));
  if (j.contains("val_data") && !j["val_data"].is_null()) {
    m.val_data = fingerprint_from_json(j["val_data"]);
  }
  if (j.contains("history")) {
    for (const auto& h : j["history"]) {
      EpochRecord e;
      e.epoch = h.at("epoch").get<std::size_t>();
      e.train_loss = h.at("train_loss").get<double>();
      if (h.contains("val_loss") && !h["val_loss"].is_null()) e.val_loss = h["val_loss"].get<double>();
      if (h.contains("val_accuracy") && !h["val_accuracy"].is_null()) {
        e.val_accuracy = h["val_accuracy"].get<double>();
      }
      m.history.push_back(e);
    }
  }
  read_optional(j, "selected_epoch", m.selected_epoch);
  if (j.contains("val_metrics") && !j["val_metrics"].is_null()) {
    m.val_metrics = run_metrics_from_json(j["val_metrics"]);
  }
  if (j.contains("val_loss") && !j["val_loss"].is_null()) m.val_loss = j["val_loss"].get<double>();
  if (j.contains("run_config")) m.run_config = j["run_config"];
  return m;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir) {
  if (!ckpt.head.all_finite()) throw ValidationError("refusing to save a head with non-finite weights");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));

  const auto shape = ckpt.head.shape();
  std::string blob(kHeadMagic.begin(), kHeadMagic.end());
  put_u64(blob, shape.input_dim);
  put_u64(blob, shape.fc_dim);
  put_u64(blob, shape.hidden_dim);
  for (double v : ckpt.head.flatten()) put_u64(blob, std::bit_cast<std::uint64_t>(v));
  write_text_file(dir / kHeadFile, blob);
  write_json_file(dir / kManifestFile, ckpt.manifest.to_json());
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError(fmt::format("checkpoint directory {} does not exist", dir.string()));
  }
  Checkpoint ckpt;
  try {
    ckpt.manifest = Manifest::from_json(read_json_file(dir / kManifestFile));
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("malformed checkpoint manifest: {}", e.what()));
  }

  const std::string blob = read_text_file(dir / kHeadFile);
  constexpr std::size_t kHeader = 8 + 3 * 8;
  if (blob.size() < kHeader || std::memcmp(blob.data(), kHeadMagic.data(), 8) != 0) {
    throw ConfigError(fmt::format("{} is not a classifier head file", (dir / kHeadFile).string()));
  }
  const HeadShape shape{get_u64(blob, 8), get_u64(blob, 16), get_u64(blob, 24)};
  if (shape.input_dim == 0 || shape.fc_dim == 0 || shape.hidden_dim == 0) {
    throw ConfigError("head file records a zero dimension");
  }
  ckpt.head = ClassifierHead::zeros(shape);
  const std::size_t n = ckpt.head.parameter_count();
  if (blob.size() != kHeader + 8 * n) {
    throw ConfigError(fmt::format("head file holds {} bytes of weights, expected {}",
                                  blob.size() - kHeader, 8 * n));
  }
  std::vector<double> params(n);
  for (std::size_t i = 0; i < n; ++i) {
    params[i] = std::bit_cast<double>(get_u64(blob, kHeader + 8 * i));
  }
  ckpt.head.assign(params);
  if (!ckpt.head.all_finite()) throw ConfigError("head file contains non-finite weights");
  if (ckpt.manifest.config.fc_dim != shape.fc_dim ||
      ckpt.manifest.config.hidden_dim != shape.hidden_dim) {
    throw ConfigError("head file dimensions disagree with the manifest");
  }
  return ckpt;
}

}  // namespace crossfake
