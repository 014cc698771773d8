#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "signbridge/correction.hpp"

namespace signbridge {

struct RemoteCorrectorConfig {
  std::string endpoint;   // http(s)://host[:port]/path
  std::string token_env;  // name of the environment variable holding a bearer token; may be empty
  int timeout_ms = 10000;
  int max_retries = 2;
  std::string prompt_template =
      "Correct the following fingerspelled text. Reply with a JSON array of exactly three "
      "uppercase candidate phrases, best first. Text: {text}";
  std::size_t max_in_flight = 4;

  void validate() const;
  // Substitutes the first "{text}" placeholder.
  std::string render_prompt(const std::string& text) const;
};

// One POST per attempt; transient failures (connection errors, timeouts, 429,
// 5xx) are retried with exponential backoff. Total wall time stays within
// (max_retries + 1) * timeout_ms. Throws TransportError or ProtocolError.
CorrectionResult correct_remote(const std::string& text, const RemoteCorrectorConfig& cfg);

// Shares an in-flight cap across concurrent callers.
class RemoteCorrector {
 public:
  explicit RemoteCorrector(RemoteCorrectorConfig cfg);
  ~RemoteCorrector();
  CorrectionResult operator()(const std::string& text) const;

 private:
  struct Gate;
  RemoteCorrectorConfig cfg_;
  std::shared_ptr<Gate> gate_;
};

// Parses a response body into a validated CorrectionResult; ProtocolError otherwise.
CorrectionResult parse_remote_response(const std::string& body);

}  // namespace signbridge
