#include "creagentive/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <set>
#include <thread>

#include <httplib.h>

#include "creagentive/structured.hpp"

namespace creagentive {

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::size_t count_words(const std::string& s) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
    if (!ws && !in_word) ++n;
    in_word = !ws;
  }
  return n;
}

}  // namespace

bool known_tag(const std::string& tag) {
  static const std::set<std::string> base = {"init",   "goal", "role", "scorer",
                                             "exit",   "recall", "thread", "plan",
                                             "writer", "caa",  "gea"};
  std::size_t colon = tag.find(':');
  if (colon == std::string::npos) return base.count(tag) > 0;
  return colon + 1 < tag.size() && base.count(tag.substr(0, colon)) > 0;
}

void ScriptedBackend::push_reply(const std::string& tag, const std::string& text) {
  std::lock_guard<std::mutex> lock(mu_);
  queues_[tag].replies.push_back(text);
}

void ScriptedBackend::push_replies(const std::string& tag,
                                   const std::vector<std::string>& texts) {
  std::lock_guard<std::mutex> lock(mu_);
  auto& q = queues_[tag];
  q.replies.insert(q.replies.end(), texts.begin(), texts.end());
}

void ScriptedBackend::set_loop(const std::string& tag, bool loop) {
  std::lock_guard<std::mutex> lock(mu_);
  queues_[tag].loop = loop;
}

ChatResponse ScriptedBackend::complete(const ChatRequest& request) {
  std::lock_guard<std::mutex> lock(mu_);
  auto servable = [this](const std::string& key) -> Queue* {
    auto it = queues_.find(key);
    if (it == queues_.end()) return nullptr;
    Queue& q = it->second;
    bool has_more = q.next < q.replies.size() || (q.loop && !q.replies.empty());
    return has_more ? &q : nullptr;
  };
  Queue* q = servable(request.tag);
  if (q == nullptr) {
    std::size_t colon = request.tag.find(':');
    if (colon != std::string::npos) q = servable(request.tag.substr(0, colon));
  }
  if (q == nullptr) {
    raise(Errc::script_exhausted, "no scripted reply left for tag " + request.tag);
  }
  const std::string& text = q->replies[q->loop ? q->next % q->replies.size() : q->next];
  ++q->next;
  ChatResponse res;
  res.text = text;
  res.token_usage.prompt = count_words(request.system) + count_words(request.user);
  res.token_usage.completion = count_words(text);
  res.latency_ms = 0;
  return res;
}

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty() || config_.model.empty()) {
    raise(Errc::precondition_failed, "http backend needs endpoint and model");
  }
}

ChatResponse HttpBackend::complete(const ChatRequest& request) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    raise(Errc::precondition_failed,
          "API key environment variable " + config_.api_key_env + " not set");
  }

  std::string host = config_.endpoint;
  std::string base_path;
  std::size_t scheme = host.find("://");
  std::size_t slash = scheme == std::string::npos ? host.find('/')
                                                  : host.find('/', scheme + 3);
  if (slash != std::string::npos) {
    base_path = host.substr(slash);
    host = host.substr(0, slash);
  }
  while (!base_path.empty() && base_path.back() == '/') base_path.pop_back();
  const std::string path = base_path + "/chat/completions";

  nlohmann::ordered_json body;
  body["model"] = config_.model;
  body["messages"] = nlohmann::ordered_json::array();
  if (!request.system.empty()) {
    body["messages"].push_back({{"role", "system"}, {"content", request.system}});
  }
  body["messages"].push_back({{"role", "user"}, {"content", request.user}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  const std::string payload = body.dump();

  httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

  std::string last_error;
  int last_status = 0;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) {
      int delay = std::min(100 * (1 << (attempt - 1)), 2000);
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    httplib::Client cli(host);
    cli.set_connection_timeout(config_.timeout_s, 0);
    cli.set_read_timeout(config_.timeout_s, 0);
    cli.set_write_timeout(config_.timeout_s, 0);

    auto t0 = std::chrono::steady_clock::now();
    httplib::Result res = cli.Post(path, headers, payload, "application/json");
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();

    if (!res) {
      last_error = httplib::to_string(res.error());
      last_status = 0;
      continue;  // connection-level failure: transient
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      last_status = res->status;
      continue;
    }
    if (res->status != 200) {
      throw EngineError(Errc::http_status,
                        "HTTP " + std::to_string(res->status) + " from backend",
                        res->status);
    }
    nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty() ||
        !parsed["choices"][0].contains("message")) {
      throw EngineError(Errc::http_status, "malformed completion body", res->status);
    }
    ChatResponse out;
    out.text = parsed["choices"][0]["message"].value("content", "");
    if (parsed.contains("usage")) {
      out.token_usage.prompt = parsed["usage"].value("prompt_tokens", 0);
      out.token_usage.completion = parsed["usage"].value("completion_tokens", 0);
    }
    out.latency_ms = elapsed;
    return out;
  }
  if (last_status != 0) {
    throw EngineError(Errc::http_status,
                      last_error + " after " + std::to_string(config_.retries + 1) +
                          " attempts",
                      last_status);
  }
  raise(Errc::timeout, "backend unreachable after " +
                           std::to_string(config_.retries + 1) + " attempts: " + last_error);
}

TranscriptLog::TranscriptLog(const std::string& path) : path_(path) {
  out_.open(path, std::ios::app);
  if (!out_) raise(Errc::io_error, "cannot open transcript " + path);
}

void TranscriptLog::set_chapter(int chapter) {
  std::lock_guard<std::mutex> lock(mu_);
  chapter_ = chapter;
}

void TranscriptLog::record(const ChatRequest& request, const ChatResponse& response) {
  if (!enabled()) return;
  std::lock_guard<std::mutex> lock(mu_);
  nlohmann::ordered_json line;
  line["ts"] = now_ms();
  line["type"] = "exchange";
  line["chapter"] = chapter_;
  line["tag"] = request.tag;
  line["system"] = request.system;
  line["user"] = request.user;
  line["reply"] = response.text;
  line["prompt_tokens"] = response.token_usage.prompt;
  line["completion_tokens"] = response.token_usage.completion;
  line["latency_ms"] = response.latency_ms;
  out_ << line.dump() << '\n';
  out_.flush();
}

void TranscriptLog::note(const std::string& kind, const std::string& text) {
  if (!enabled()) return;
  std::lock_guard<std::mutex> lock(mu_);
  nlohmann::ordered_json line;
  line["ts"] = now_ms();
  line["type"] = "note";
  line["chapter"] = chapter_;
  line["kind"] = kind;
  line["text"] = text;
  out_ << line.dump() << '\n';
  out_.flush();
}

Gateway::Gateway(std::shared_ptr<Backend> backend, std::shared_ptr<TranscriptLog> log)
    : backend_(std::move(backend)), log_(std::move(log)) {
  if (!backend_) raise(Errc::precondition_failed, "gateway needs a backend");
  if (!log_) log_ = std::make_shared<TranscriptLog>();
}

ChatResponse Gateway::complete(const ChatRequest& request) {
  if (request.user.empty()) raise(Errc::precondition_failed, "empty user prompt");
  if (!known_tag(request.tag)) {
    raise(Errc::precondition_failed, "unknown agent tag " + request.tag);
  }
  ChatResponse res = backend_->complete(request);
  log_->record(request, res);
  return res;
}

nlohmann::ordered_json Gateway::complete_structured(
    const ChatRequest& request, const Schema& schema,
    const std::function<void(const nlohmann::ordered_json&)>& check) {
  auto attempt = [&](const ChatRequest& req) {
    nlohmann::ordered_json doc = parse_structured(complete(req).text, schema);
    if (check) check(doc);
    return doc;
  };
  auto repairable = [](Errc c) {
    return c == Errc::unparseable || c == Errc::schema_violation ||
           c == Errc::unknown_event_id || c == Errc::coverage_gap;
  };
  try {
    return attempt(request);
  } catch (const EngineError& e) {
    if (!repairable(e.code())) throw;
    log_->note("repair", schema.name + ": " + e.what());
    ChatRequest retry = request;
    retry.user += "\n\n";
    retry.user += schema.reminder.empty()
                      ? "Return only the JSON object in the required format."
                      : schema.reminder;
    return attempt(retry);
  }
}

}  // namespace creagentive
