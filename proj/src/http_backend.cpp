#include <fmt/format.h>
#include <httplib.h>

#include "crossfake/error.hpp"
#include "crossfake/json_io.hpp"
#include "crossfake/translate.hpp"

namespace crossfake {

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
  const std::string& url = options_.url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError(fmt::format("translation URL '{}' has no scheme", url));
  }
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError(fmt::format("unsupported translation URL scheme '{}'", scheme));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  if (origin_.size() <= scheme_end + 3) {
    throw ConfigError(fmt::format("translation URL '{}' has no host", url));
  }
  if (path_start != std::string::npos) {
    path_prefix_ = url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
  if (options_.timeout.count() <= 0) throw ConfigError("translation timeout must be positive");
}

std::string HttpBackend::translate(const TranslationRequest& request) const {
  httplib::Client client(origin_);
  const auto seconds = options_.timeout.count() / 1000;
  const auto micros = (options_.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  Json body;
  body["q"] = request.text;
  body["source"] = to_code(request.source);
  body["target"] = to_code(request.target);
  body["format"] = "text";
  if (!options_.api_key.empty()) body["api_key"] = options_.api_key;

  const std::string path = path_prefix_ + "/translate";
  const auto res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    throw ServiceError(fmt::format("{}{}: {}", origin_, path, httplib::to_string(res.error())),
                       true);
  }
  if (res->status == 429 || res->status >= 500) {
    throw ServiceError(fmt::format("{}{} answered HTTP {}", origin_, path, res->status), true);
  }
  if (res->status != 200) {
    throw ServiceError(fmt::format("{}{} rejected the request with HTTP {}: {}", origin_, path,
                                   res->status, res->body.substr(0, 200)),
                       false);
  }
  try {
    const Json reply = Json::parse(res->body);
    return reply.at("translatedText").get<std::string>();
  } catch (const Json::exception& e) {
    throw ServiceError(fmt::format("{}{} sent an unreadable reply: {}", origin_, path, e.what()),
                       false);
  }
}

}  // namespace crossfake
