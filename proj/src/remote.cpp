#include "signbridge/remote.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <regex>
#include <stdexcept>
#include <thread>

#include "signbridge/error.hpp"

namespace signbridge {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

void RemoteCorrectorConfig::validate() const {
  if (timeout_ms <= 0) throw std::invalid_argument("remote timeout must be > 0");
  if (max_retries < 0) throw std::invalid_argument("remote retries must be >= 0");
  if (max_in_flight == 0) throw std::invalid_argument("remote in-flight cap must be >= 1");
  if (prompt_template.find("{text}") == std::string::npos)
    throw std::invalid_argument("prompt template needs a {text} placeholder");
  static const std::regex url(R"(^https?://[^/\s]+(/\S*)?$)");
  if (!std::regex_match(endpoint, url)) throw std::invalid_argument("bad remote endpoint: " + endpoint);
}

std::string RemoteCorrectorConfig::render_prompt(const std::string& text) const {
  std::string out = prompt_template;
  const auto pos = out.find("{text}");
  if (pos != std::string::npos) out.replace(pos, 6, text);
  return out;
}

CorrectionResult parse_remote_response(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("remote response is not JSON: ") + e.what());
  }
  if (!doc.is_array() || doc.size() != 3)
    throw ProtocolError("remote response must be a JSON array of exactly 3 strings");
  CorrectionResult r;
  r.source = CorrectionSource::remote;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!doc[i].is_string()) throw ProtocolError("remote candidate " + std::to_string(i + 1) + " is not a string");
    r.candidates[i] = normalize_text(doc[i].get<std::string>());
  }
  try {
    r.validate();
  } catch (const std::invalid_argument& e) {
    throw ProtocolError(std::string("remote candidates invalid: ") + e.what());
  }
  return r;
}

namespace {

bool transient_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

}  // namespace

CorrectionResult correct_remote(const std::string& text, const RemoteCorrectorConfig& cfg) {
  cfg.validate();
  const std::string norm = normalize_text(text);
  if (norm.empty()) throw std::invalid_argument("correct_remote: empty text");

  static const std::regex url(R"(^(https?://[^/\s]+)(/\S*)?$)");
  std::smatch m;
  std::regex_match(cfg.endpoint, m, url);
  const std::string base = m[1].str();
  const std::string path = m[2].matched ? m[2].str() : "/";

  httplib::Headers headers;
  if (!cfg.token_env.empty()) {
    if (const char* tok = std::getenv(cfg.token_env.c_str()); tok && *tok)
      headers.emplace("Authorization", std::string("Bearer ") + tok);
  }
  const std::string body = json{{"input", norm}, {"prompt", cfg.render_prompt(norm)}}.dump();

  const auto timeout = std::chrono::milliseconds(cfg.timeout_ms);
  const auto deadline = Clock::now() + timeout * (cfg.max_retries + 1);
  auto backoff = std::max(std::chrono::milliseconds(1), timeout / 10);
  std::string last_error = "no attempt made";

  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (remaining.count() <= 0) break;
    const auto attempt_timeout = std::min(timeout, remaining);

    httplib::Client client(base);
    client.set_connection_timeout(attempt_timeout);
    client.set_read_timeout(attempt_timeout);
    client.set_write_timeout(attempt_timeout);
    auto res = client.Post(path, headers, body, "application/json");
    if (res && res->status >= 200 && res->status < 300) return parse_remote_response(res->body);
    if (res && !transient_status(res->status))
      throw TransportError("remote corrector returned HTTP " + std::to_string(res->status));
    last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());

    if (attempt == cfg.max_retries) break;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left <= backoff) break;
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
  throw TransportError("remote corrector failed after " + std::to_string(cfg.max_retries + 1) +
                       " attempt(s): " + last_error);
}

struct RemoteCorrector::Gate {
  std::mutex mu;
  std::condition_variable cv;
  std::size_t in_flight = 0;
};

RemoteCorrector::RemoteCorrector(RemoteCorrectorConfig cfg) : cfg_(std::move(cfg)), gate_(std::make_shared<Gate>()) {
  cfg_.validate();
}

RemoteCorrector::~RemoteCorrector() = default;

CorrectionResult RemoteCorrector::operator()(const std::string& text) const {
  {
    std::unique_lock lock(gate_->mu);
    gate_->cv.wait(lock, [&] { return gate_->in_flight < cfg_.max_in_flight; });
    ++gate_->in_flight;
  }
  struct Release {
    Gate& g;
    ~Release() {
      {
        std::lock_guard lock(g.mu);
        --g.in_flight;
      }
      g.cv.notify_one();
    }
  } release{*gate_};
  return correct_remote(text, cfg_);
}

}  // namespace signbridge
