#include <regex>

#include <httplib.h>
#include <json.hpp>

#include "dialogic/coder.hpp"
#include "dialogic/error.hpp"

namespace dialogic::coder {
namespace {

constexpr std::string_view kSystemMessage =
    "You are an expert annotator of classroom dialogue. Answer with a single code label.";

}  // namespace

RemoteLlmBackend::RemoteLlmBackend(BackendConfig config) : config_(std::move(config)) {
  check_config(config_);
  static const std::regex url(R"(^(https?)://([^/?#]+)([^#]*)$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, url)) {
    throw Error(ErrorKind::InvalidArgument, "endpoint must be an http(s) URL, got '" + config_.endpoint + "'");
  }
  std::string scheme = m[1].str();
  std::transform(scheme.begin(), scheme.end(), scheme.begin(), [](unsigned char c) { return std::tolower(c); });
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw Error(ErrorKind::InvalidArgument, "this build has no TLS support; use an http endpoint");
#endif
  origin_ = scheme + "://" + m[2].str();
  path_ = m[3].str().empty() ? "/" : m[3].str();
  scheme_ = config_.scheme_document.empty() ? std::string(default_scheme_document()) : config_.scheme_document;
}

std::string RemoteLlmBackend::request_body(std::string_view model, std::string_view prompt) {
  nlohmann::ordered_json body;
  body["model"] = model;
  body["messages"] = nlohmann::ordered_json::array({
      {{"role", "system"}, {"content", kSystemMessage}},
      {{"role", "user"}, {"content", prompt}},
  });
  body["temperature"] = 0;
  return body.dump();
}

CodedResult RemoteLlmBackend::code(const CodingContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  const std::string body = request_body(config_.model, build_prompt(scheme_, ctx));

  httplib::Client client(origin_);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) {
    throw Error(ErrorKind::BackendUnavailable, "request to " + origin_ + path_ + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorKind::BackendUnavailable, "endpoint answered HTTP " + std::to_string(res->status));
  }

  std::string content;
  try {
    auto reply = nlohmann::json::parse(res->body);
    content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Syntax, std::string("malformed chat-completion response: ") + e.what());
  }

  CodedResult r;
  r.code = parse_reply(content);
  if (content != to_string(r.code)) r.rationale = content;
  r.latency = std::chrono::steady_clock::now() - start;
  return r;
}

}  // namespace dialogic::coder
