#pragma once

// Pluggable chat-model backend with a deterministic scripted variant, plus
// the append-only transcript log every workflow writes through.

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "creagentive/errors.hpp"

namespace creagentive {

struct TokenUsage {
  std::size_t prompt = 0;
  std::size_t completion = 0;
};

struct ChatRequest {
  std::string system;
  std::string user;
  double temperature = 0.1;
  int max_tokens = 4096;
  std::string tag;  // agent role emitting the request, e.g. "role:c2"
};

struct ChatResponse {
  std::string text;
  TokenUsage token_usage;
  std::int64_t latency_ms = 0;
};

// Base agent-role set; a tag may carry a ":qualifier" suffix.
bool known_tag(const std::string& tag);

struct BackendConfig {
  std::string kind = "scripted";  // scripted | http
  std::string endpoint;           // http only, e.g. https://api.example.com/v1
  std::string model;
  std::string api_key_env = "CREAGENTIVE_API_KEY";
  int timeout_s = 60;
  int retries = 2;
  std::string script;  // scripted only: path of the reply script
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

// Replies are keyed by request order within each tag. Lookup tries the full
// tag first, then its base before the ':'. A queue marked loop replays from
// the start instead of exhausting.
class ScriptedBackend : public Backend {
 public:
  void push_reply(const std::string& tag, const std::string& text);
  void push_replies(const std::string& tag, const std::vector<std::string>& texts);
  void set_loop(const std::string& tag, bool loop);
  ChatResponse complete(const ChatRequest& request) override;

 private:
  struct Queue {
    std::vector<std::string> replies;
    std::size_t next = 0;
    bool loop = false;
  };
  std::map<std::string, Queue> queues_;
  std::mutex mu_;
};

// OpenAI-compatible chat completions endpoint. Transient failures (connect
// errors, 429, 5xx) are retried with exponential backoff up to `retries`
// extra attempts.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(BackendConfig config);
  ChatResponse complete(const ChatRequest& request) override;

 private:
  BackendConfig config_;
};

// Newline-delimited records of every exchange, append-only. Workflows set
// the chapter context before talking to agents so downstream audits can
// attribute calls.
class TranscriptLog {
 public:
  TranscriptLog() = default;  // disabled sink
  explicit TranscriptLog(const std::string& path);

  bool enabled() const { return !path_.empty(); }
  const std::string& path() const { return path_; }
  void set_chapter(int chapter);
  void record(const ChatRequest& request, const ChatResponse& response);
  void note(const std::string& kind, const std::string& text);

 private:
  std::string path_;
  std::ofstream out_;
  int chapter_ = -1;
  std::mutex mu_;
};

struct Schema;  // structured.hpp

// Front door used by all agents: completes requests through the backend,
// mirrors every exchange into the transcript, and layers the one-shot
// structured-output repair on top. The optional check hook runs after schema
// validation; raising Unparseable/SchemaViolation/UnknownEventId/CoverageGap
// from it consumes the same single repair attempt.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, std::shared_ptr<TranscriptLog> log);

  ChatResponse complete(const ChatRequest& request);
  nlohmann::ordered_json complete_structured(
      const ChatRequest& request, const Schema& schema,
      const std::function<void(const nlohmann::ordered_json&)>& check = {});

  TranscriptLog& log() { return *log_; }
  Backend& backend() { return *backend_; }

 private:
  std::shared_ptr<Backend> backend_;
  std::shared_ptr<TranscriptLog> log_;
};

}  // namespace creagentive
