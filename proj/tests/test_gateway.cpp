#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "creagentive/gateway.hpp"
#include "creagentive/structured.hpp"

using namespace creagentive;

namespace {

template <typename Fn>
Errc thrown(Fn&& fn) {
  try {
    fn();
  } catch (const EngineError& e) {
    return e.code();
  }
  throw std::logic_error("expected EngineError");
}

std::string tmp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "creagentive_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

Schema judge_schema() {
  Schema s;
  s.name = "judge";
  s.required = {"/Surface Features/Plot Summary", "/Surface Features/Current Objective Conditions"};
  s.scores = {{"/Partial Scores",
               {"Relevance", "Coherence", "Empathy", "Surprise", "Creativity",
                "Complexity", "Immersion"}}};
  s.reminder = "Return only the JSON object.";
  return s;
}

const char* kGoodJudgeReply = R"({
  "Surface Features": {"Plot Summary": "Ava lands.", "Current Objective Conditions": "ring active"},
  "Partial Scores": {"Relevance": 7.5, "Coherence": 8, "Empathy": 6.25, "Surprise": 7,
                     "Creativity": 7, "Complexity": 6, "Immersion": "8.5"}
})";

}  // namespace

TEST_CASE("scripted backend keys replies by tag and order") {
  auto run = [] {
    ScriptedBackend b;
    b.push_replies("goal", {"g1", "g2"});
    b.push_reply("writer", "w1");
    std::vector<std::string> out;
    out.push_back(b.complete({"", "u", 0.8, 100, "goal"}).text);
    out.push_back(b.complete({"", "u", 0.8, 100, "writer"}).text);
    out.push_back(b.complete({"", "u", 0.8, 100, "goal"}).text);
    return out;
  };
  auto a = run();
  auto b = run();
  CHECK(a == std::vector<std::string>{"g1", "w1", "g2"});
  CHECK(a == b);
}

TEST_CASE("scripted backend exhaustion and loop") {
  ScriptedBackend b;
  b.push_reply("exit", "no");
  CHECK(b.complete({"", "u", 0.1, 100, "exit"}).text == "no");
  CHECK(thrown([&] { b.complete({"", "u", 0.1, 100, "exit"}); }) == Errc::script_exhausted);
  CHECK(thrown([&] { b.complete({"", "u", 0.1, 100, "plan"}); }) == Errc::script_exhausted);

  ScriptedBackend looped;
  looped.push_replies("caa", {"a", "b"});
  looped.set_loop("caa", true);
  CHECK(looped.complete({"", "u", 0.1, 100, "caa"}).text == "a");
  CHECK(looped.complete({"", "u", 0.1, 100, "caa"}).text == "b");
  CHECK(looped.complete({"", "u", 0.1, 100, "caa"}).text == "a");
}

TEST_CASE("scripted tag lookup falls back to the base role") {
  ScriptedBackend b;
  b.push_replies("role", {"generic 1", "generic 2"});
  b.push_reply("role:c2", "specific");
  CHECK(b.complete({"", "u", 0.8, 100, "role:c2"}).text == "specific");
  CHECK(b.complete({"", "u", 0.8, 100, "role:c1"}).text == "generic 1");
  // exact queue exhausted: falls back to the base queue
  CHECK(b.complete({"", "u", 0.8, 100, "role:c2"}).text == "generic 2");
  CHECK(thrown([&] { b.complete({"", "u", 0.8, 100, "role:c3"}); }) ==
        Errc::script_exhausted);

  ScriptedBackend counts;
  counts.push_reply("role", "ok");
  ChatResponse r = counts.complete({"sys words", "three user words", 0.8, 100, "role:c9"});
  CHECK(r.token_usage.prompt == 5);
  CHECK(r.token_usage.completion == 1);
}

TEST_CASE("template rendering") {
  PromptTemplate t{"demo", "no placeholders"};
  CHECK(t.render({}) == "no placeholders");

  PromptTemplate t2{"demo", "Dear {{name}}, meet {{name}} at {{place}}."};
  CHECK(t2.render({{"name", "Ava"}, {"place", "the harbor"}}) ==
        "Dear Ava, meet Ava at the harbor.");
  CHECK(thrown([&] { t2.render({{"name", "Ava"}}); }) == Errc::missing_binding);
}

TEST_CASE("object extraction tolerates fences and prose") {
  const std::string obj = R"({"a": 1, "b": "x}y"})";
  CHECK(extract_object(obj) == obj);
  CHECK(extract_object("Sure! Here you go:\n```json\n" + obj + "\n```\nHope that helps.") == obj);
  CHECK(extract_object("{ broken\nthen " + obj + " trailing") == obj);
  CHECK(thrown([] { extract_object("no object here"); }) == Errc::unparseable);
  CHECK(thrown([] { extract_object("{ never closes"); }) == Errc::unparseable);
}

TEST_CASE("structured parsing validates and normalizes scores") {
  Schema s = judge_schema();
  auto doc = parse_structured(kGoodJudgeReply, s);
  CHECK(doc["Partial Scores"]["Immersion"].is_number());
  CHECK(doc["Partial Scores"]["Immersion"].get<double>() == doctest::Approx(8.5));
  CHECK(doc["Partial Scores"]["Empathy"].get<double>() == doctest::Approx(6.25));

  auto fenced = parse_structured("```json\n" + std::string(kGoodJudgeReply) + "\n```", s);
  CHECK(fenced == doc);

  // idempotent: parse of the printed parse equals the parse
  CHECK(parse_structured(doc.dump(), s) == doc);

  auto broken = nlohmann::ordered_json::parse(extract_object(kGoodJudgeReply));
  broken["Partial Scores"]["Relevance"] = 11.0;
  CHECK(thrown([&] { parse_structured(broken.dump(), s); }) == Errc::schema_violation);
  broken["Partial Scores"]["Relevance"] = 7.123;
  CHECK(thrown([&] { parse_structured(broken.dump(), s); }) == Errc::schema_violation);
  broken["Partial Scores"]["Relevance"] = "eight";
  CHECK(thrown([&] { parse_structured(broken.dump(), s); }) == Errc::schema_violation);
  broken["Partial Scores"].erase("Relevance");
  CHECK(thrown([&] { parse_structured(broken.dump(), s); }) == Errc::schema_violation);

  auto no_summary = nlohmann::ordered_json::parse(extract_object(kGoodJudgeReply));
  no_summary["Surface Features"].erase("Plot Summary");
  CHECK(thrown([&] { parse_structured(no_summary.dump(), s); }) == Errc::schema_violation);
}

TEST_CASE("gateway enforces request invariants and logs exchanges") {
  auto backend = std::make_shared<ScriptedBackend>();
  backend->push_reply("goal", "fine");
  const std::string log_path = tmp_path("gateway_log.jsonl");
  std::filesystem::remove(log_path);
  Gateway gw(backend, std::make_shared<TranscriptLog>(log_path));

  CHECK(thrown([&] { gw.complete({"", "", 0.8, 100, "goal"}); }) == Errc::precondition_failed);
  CHECK(thrown([&] { gw.complete({"", "u", 0.8, 100, "villain"}); }) == Errc::precondition_failed);
  CHECK(thrown([&] { gw.complete({"", "u", 0.8, 100, "goal:"}); }) == Errc::precondition_failed);

  gw.log().set_chapter(4);
  CHECK(gw.complete({"sys", "user text", 0.8, 100, "goal"}).text == "fine");

  std::ifstream in(log_path);
  std::string line;
  REQUIRE(std::getline(in, line));
  auto rec = nlohmann::json::parse(line);
  CHECK(rec["type"] == "exchange");
  CHECK(rec["chapter"] == 4);
  CHECK(rec["tag"] == "goal");
  CHECK(rec["reply"] == "fine");
  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("gateway repairs once then fails hard") {
  Schema s = judge_schema();
  const std::string log_path = tmp_path("repair_log.jsonl");
  std::filesystem::remove(log_path);
  {
    auto backend = std::make_shared<ScriptedBackend>();
    backend->push_replies("caa", {"garbage with no braces", kGoodJudgeReply});
    Gateway gw(backend, std::make_shared<TranscriptLog>(log_path));
    auto doc = gw.complete_structured({"sys", "judge this", 0.1, 800, "caa"}, s);
    CHECK(doc["Partial Scores"]["Coherence"].get<double>() == doctest::Approx(8.0));
  }
  {
    std::ifstream in(log_path);
    std::string line;
    int exchanges = 0, notes = 0;
    bool reminder_seen = false;
    while (std::getline(in, line)) {
      auto rec = nlohmann::json::parse(line);
      if (rec["type"] == "exchange") {
        ++exchanges;
        if (rec["user"].get<std::string>().find("Return only the JSON object") !=
            std::string::npos)
          reminder_seen = true;
      } else {
        ++notes;
      }
    }
    CHECK(exchanges == 2);
    CHECK(notes == 1);
    CHECK(reminder_seen);
  }

  auto backend = std::make_shared<ScriptedBackend>();
  backend->push_replies("caa", {"nope", "still nope"});
  backend->push_reply("gea", kGoodJudgeReply);
  Gateway gw(backend, nullptr);
  CHECK(thrown([&] { gw.complete_structured({"", "judge", 0.1, 800, "caa"}, s); }) ==
        Errc::unparseable);
  // queue fully consumed: exactly two attempts were made
  CHECK(thrown([&] { gw.complete({"", "again", 0.1, 800, "caa"}); }) ==
        Errc::script_exhausted);
}

TEST_CASE("http backend round-trips against a stub server") {
  httplib::Server svr;
  std::atomic<int> hits{0};
  std::atomic<int> fail_first{0};
  std::string captured_auth, captured_body;
  const std::string reply_text = "na\xC3\xAFve reply\nwith two lines \xE2\x80\xA2";

  svr.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    int n = ++hits;
    captured_auth = req.get_header_value("Authorization");
    captured_body = req.body;
    if (n <= fail_first.load()) {
      res.status = 503;
      res.set_content("{\"error\":\"busy\"}", "application/json");
      return;
    }
    nlohmann::json out;
    out["choices"] = nlohmann::json::array();
    out["choices"].push_back({{"message", {{"role", "assistant"}, {"content", reply_text}}}});
    out["usage"] = {{"prompt_tokens", 12}, {"completion_tokens", 34}};
    res.set_content(out.dump(), "application/json");
  });

  int port = svr.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread th([&] { svr.listen_after_bind(); });
  svr.wait_until_ready();

  setenv("CREAGENTIVE_TEST_KEY", "sekrit", 1);
  BackendConfig cfg;
  cfg.kind = "http";
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  cfg.model = "demo-model";
  cfg.api_key_env = "CREAGENTIVE_TEST_KEY";
  cfg.timeout_s = 5;
  cfg.retries = 2;

  {
    HttpBackend backend(cfg);
    ChatRequest req{"be brief", "hello", 0.25, 64, "writer"};
    ChatResponse res = backend.complete(req);
    CHECK(res.text == reply_text);
    CHECK(res.token_usage.prompt == 12);
    CHECK(res.token_usage.completion == 34);
    CHECK(captured_auth == "Bearer sekrit");
    auto body = nlohmann::json::parse(captured_body);
    CHECK(body["model"] == "demo-model");
    CHECK(body["temperature"].get<double>() == doctest::Approx(0.25));
    CHECK(body["max_tokens"] == 64);
    REQUIRE(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["content"] == "hello");
    CHECK(hits == 1);
  }

  {
    hits = 0;
    fail_first = 2;
    HttpBackend backend(cfg);
    ChatResponse res = backend.complete({"", "retry me", 0.1, 64, "writer"});
    CHECK(res.text == reply_text);
    CHECK(hits == 3);  // attempts = retries + 1 at most; two 503s then success
  }

  {
    hits = 0;
    fail_first = 1000;
    BackendConfig once = cfg;
    once.retries = 0;
    HttpBackend backend(once);
    try {
      backend.complete({"", "fail", 0.1, 64, "writer"});
      CHECK(false);
    } catch (const EngineError& e) {
      CHECK(e.code() == Errc::http_status);
      CHECK(e.status() == 503);
    }
    CHECK(hits == 1);
  }

  {
    BackendConfig bad = cfg;
    bad.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/wrong";
    HttpBackend backend(bad);
    try {
      backend.complete({"", "404 me", 0.1, 64, "writer"});
      CHECK(false);
    } catch (const EngineError& e) {
      CHECK(e.code() == Errc::http_status);
      CHECK(e.status() == 404);
    }
  }

  unsetenv("CREAGENTIVE_TEST_KEY");
  {
    HttpBackend backend(cfg);
    CHECK(thrown([&] { backend.complete({"", "no key", 0.1, 64, "writer"}); }) ==
          Errc::precondition_failed);
  }

  svr.stop();
  th.join();
}
