#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "creagentive/store.hpp"
#include "oracle.hpp"

using namespace creagentive;
using nlohmann::ordered_json;

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
  auto path = dir / name;
  std::filesystem::remove(path);
  return path.string();
}

std::string fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "creagentive_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

StoryPrototype seeded() {
  StoryPrototype p;
  StoryMeta m;
  m.title = "The Salt Crown";
  m.background = "Two rival heirs contest a drowned throne.";
  m.long_term_goal = "Crown a single ruler of the tide courts";
  p.set_meta(m);
  auto ava = p.add_character("Ava", {{"temper", "calm"}}, 0);
  auto brek = p.add_character("Brek", {}, 0);
  p.upsert_relationship(ava, brek, "rivalry", 0.4, Direction::mutual, 0);
  auto hall = p.add_scene("Drowned Hall", "dusk", "flooded throne room", 0);
  p.add_event(0, "The heirs swear the tide oath", {}, {{ava, "resolve", 0.6}}, hall);
  p.snapshot_chapter(0);
  return p;
}

const char* kOneGoal = R"({"goals": [
  {"description": "Force the heirs to parley", "involved_characters": ["Ava", "Brek"]}
]})";

const char* kRoleReply = R"({
  "text": "We should meet at the hall and settle the claim.",
  "proposed_events": [{
    "description": "The heirs argue over the crown at dusk",
    "consequences": ["tension rises"],
    "participants": [
      {"character": "Ava", "emotional_impact": "anger", "impact_intensity": 0.5},
      {"character": "Brek", "emotional_impact": "fear", "impact_intensity": -0.2}],
    "scene": {"location": "Drowned Hall", "time_label": "dusk"}}]
})";

const char* kScorerReply =
    R"({"scores": {"logical_coherence": 7, "dramatic_quality": 6,
                   "character_motivation_consistency": 5}})";

}  // namespace

TEST_CASE("prototype documents round-trip through disk") {
  const std::string path = tmp_path("store_proto.json");
  StoryPrototype p = seeded();
  save_prototype(p, path);

  StoryPrototype q = load_prototype(path);
  CHECK(graph_equal(p, q));
  CHECK(p.serialize() == q.serialize());
  CHECK(q.snapshot_view(0).serialize() == p.snapshot_view(0).serialize());

  SUBCASE("missing and damaged files are rejected") {
    CHECK(thrown([&] { load_prototype(tmp_path("store_nothere.json")); }) == Errc::io_error);

    std::ofstream(path, std::ios::binary) << p.serialize().substr(0, 40);
    CHECK(thrown([&] { load_prototype(path); }) == Errc::corrupt_document);

    ordered_json doc = ordered_json::parse(p.serialize());
    doc["format_version"] = 9;
    std::ofstream(path, std::ios::binary) << doc.dump();
    CHECK(thrown([&] { load_prototype(path); }) == Errc::unsupported_version);
  }
}

TEST_CASE("fuzzed prototypes survive the round trip") {
  const std::string path = tmp_path("store_fuzz.json");
  for (std::uint32_t seed = 1; seed <= 25; ++seed) {
    oracle::Fuzzer fuzz(seed);
    auto log = fuzz.make_log(60, seed % 2 == 0);
    StoryPrototype p;
    for (const auto& m : log) oracle::apply(p, m);

    save_prototype(p, path);
    StoryPrototype q = load_prototype(path);
    REQUIRE(graph_equal(p, q));
    REQUIRE(p.serialize() == q.serialize());
  }
}

TEST_CASE("run config round-trips and hashes stably") {
  const std::string path = tmp_path("store_config.json");
  RunConfig c;
  c.backend.kind = "scripted";
  c.backend.script = "replies.json";
  c.goals_per_chapter = 2;
  c.max_chapters = 5;
  c.exit_conditions.push_back({"event_count", ordered_json{{"value", 9}}});
  c.genre.genre = "screenplay";
  c.genre.target_words = 400;
  c.seed = 42;
  c.planned_plots.push_back({4, "the crown resurfaces"});
  save_run_config(c, path);

  RunConfig d = load_run_config(path);
  CHECK(d.backend.kind == "scripted");
  CHECK(d.backend.script == "replies.json");
  CHECK(d.goals_per_chapter == 2);
  CHECK(d.max_chapters == 5);
  REQUIRE(d.exit_conditions.size() == 1);
  CHECK(d.exit_conditions[0].kind == "event_count");
  CHECK(d.exit_conditions[0].params["value"] == 9);
  CHECK(d.genre.genre == "screenplay");
  CHECK(d.genre.target_words == 400);
  CHECK(d.seed == 42);
  REQUIRE(d.planned_plots.size() == 1);
  CHECK(d.planned_plots[0].target_chapter == 4);
  CHECK(config_hash(d) == config_hash(c));

  RunConfig e = d;
  e.max_chapters = 6;
  CHECK(config_hash(e) != config_hash(c));

  SUBCASE("damaged documents are rejected") {
    std::ofstream(path) << "{nope";
    CHECK(thrown([&] { load_run_config(path); }) == Errc::corrupt_document);

    std::ofstream(path) << R"({"format_version": 1, "kind": "other"})";
    CHECK(thrown([&] { load_run_config(path); }) == Errc::corrupt_document);

    std::ofstream(path) << R"({"format_version": 3, "kind": "run_config"})";
    CHECK(thrown([&] { load_run_config(path); }) == Errc::unsupported_version);

    std::ofstream(path) << R"({"format_version": 1, "kind": "run_config", "max_chapters": 0})";
    CHECK(thrown([&] { load_run_config(path); }) == Errc::corrupt_document);

    std::ofstream(path)
        << R"({"format_version": 1, "kind": "run_config", "paths": {"prototype": ""}})";
    CHECK(thrown([&] { load_run_config(path); }) == Errc::corrupt_document);
  }

  SUBCASE("defaults fill a minimal document") {
    std::ofstream(path) << R"({"format_version": 1, "kind": "run_config"})";
    RunConfig minimal = load_run_config(path);
    CHECK(minimal.goals_per_chapter == 3);
    CHECK(minimal.max_chapters == 100);
    CHECK(minimal.genre.genre == "novel");
    CHECK(minimal.recall_window == 5);
    CHECK(minimal.thread_lookahead == 3);
    CHECK(minimal.prototype_path == "prototype.json");
  }
}

TEST_CASE("manifest stages only move forward") {
  RunConfig c;
  RunManifest m = new_manifest(c);
  CHECK(m.run_id.rfind("run-", 0) == 0);
  CHECK(m.config_hash == config_hash(c));
  CHECK(m.last_committed_chapter == 0);
  CHECK_FALSE(m.created_at.empty());

  advance_stage(m, 1, Stage::generated);
  CHECK(m.last_committed_chapter == 1);
  advance_stage(m, 2, Stage::generated);
  CHECK(m.last_committed_chapter == 2);
  advance_stage(m, 1, Stage::written);
  advance_stage(m, 1, Stage::evaluated);
  advance_stage(m, 1, Stage::evaluated);  // repeat is a no-op
  CHECK(thrown([&] { advance_stage(m, 1, Stage::written); }) == Errc::precondition_failed);
  CHECK(thrown([&] { advance_stage(m, 0, Stage::generated); }) == Errc::precondition_failed);

  const std::string path = tmp_path("store_manifest.json");
  save_manifest(m, path);
  RunManifest n = load_manifest(path);
  CHECK(n.run_id == m.run_id);
  CHECK(n.config_hash == m.config_hash);
  CHECK(n.last_committed_chapter == 2);
  REQUIRE(n.stages.size() == 2);
  CHECK(n.stages.at(1) == Stage::evaluated);
  CHECK(n.stages.at(2) == Stage::generated);
  CHECK_FALSE(n.updated_at.empty());

  std::ofstream(path) << R"({"format_version": 1, "kind": "run_manifest",
    "run_id": "run-x", "config_hash": "zz", "stages": {}})";
  CHECK(thrown([&] { load_manifest(path); }) == Errc::corrupt_document);
}

TEST_CASE("resume points at the chapter after the last committed one") {
  RunConfig c;
  RunManifest m = new_manifest(c);
  CHECK(resume_point(m, c) == 1);

  advance_stage(m, 1, Stage::generated);
  advance_stage(m, 2, Stage::generated);
  CHECK(resume_point(m, c) == 3);

  RunConfig changed = c;
  changed.seed = 777;
  CHECK(thrown([&] { resume_point(m, changed); }) == Errc::config_mismatch);
  CHECK(resume_point(m, changed, true) == 3);
}

TEST_CASE("reply scripts feed the scripted backend") {
  const std::string path = tmp_path("store_script.json");
  ordered_json doc;
  doc["format_version"] = 1;
  doc["kind"] = "reply_script";
  doc["tags"] = {{"goal", {{"replies", {"first", "second"}}, {"loop", false}}},
                 {"role", {{"replies", {"again"}}, {"loop", true}}}};
  std::ofstream(path) << doc.dump();

  ScriptedBackend backend;
  load_script(backend, path);
  ChatRequest req;
  req.tag = "goal";
  CHECK(backend.complete(req).text == "first");
  CHECK(backend.complete(req).text == "second");
  CHECK(thrown([&] { backend.complete(req); }) == Errc::script_exhausted);
  req.tag = "role:c7";
  CHECK(backend.complete(req).text == "again");
  CHECK(backend.complete(req).text == "again");

  SUBCASE("backend factory") {
    BackendConfig cfg;
    cfg.kind = "scripted";
    cfg.script = path;
    auto made = make_backend(cfg);
    ChatRequest r;
    r.tag = "role";
    CHECK(made->complete(r).text == "again");

    cfg.kind = "teapot";
    CHECK(thrown([&] { make_backend(cfg); }) == Errc::precondition_failed);
  }

  SUBCASE("damaged scripts are rejected") {
    std::ofstream(path) << R"({"format_version": 1, "kind": "reply_script"})";
    ScriptedBackend b;
    CHECK(thrown([&] { load_script(b, path); }) == Errc::corrupt_document);

    std::ofstream(path) << R"({"format_version": 1, "kind": "reply_script",
      "tags": {"goal": {"replies": [4]}}})";
    CHECK(thrown([&] { load_script(b, path); }) == Errc::corrupt_document);
  }
}

TEST_CASE("rule documents load into the scorer configuration") {
  const std::string path = tmp_path("store_rules.json");
  std::ofstream(path) << R"({"format_version": 1, "kind": "rule_config",
    "general": [{"name": "clarity", "weight": 2, "description": "stays legible"}],
    "story": [{"name": "tide_lore", "weight": 1, "description": "respects the tide"},
              {"name": "court_focus", "weight": 1, "description": "keeps court scenes"}]})";

  RuleConfig rules = load_rules(path);
  REQUIRE(rules.general_rules.size() == 1);
  REQUIRE(rules.story_rules.size() == 2);
  CHECK(rules.general_rules[0].name == "clarity");
  CHECK(rules.general_rules[0].weight == doctest::Approx(2.0));
  CHECK(rules.story_rules[1].description == "keeps court scenes");

  std::ofstream(path) << R"({"format_version": 1, "kind": "rule_config",
    "general": [{"weight": 2}]})";
  CHECK(thrown([&] { load_rules(path); }) == Errc::corrupt_document);

  std::ofstream(path) << R"({"format_version": 1, "kind": "rule_config",
    "general": [{"name": "x", "weight": "heavy"}]})";
  CHECK(thrown([&] { load_rules(path); }) == Errc::corrupt_document);
}

TEST_CASE("the run lock is exclusive and self-cleaning") {
  const std::string dir = fresh_dir("store_lock");
  {
    RunLock lock(dir);
    CHECK(std::filesystem::exists(lock.path()));
    CHECK(thrown([&] { RunLock second(dir); }) == Errc::locked);
  }
  CHECK_FALSE(std::filesystem::exists(std::filesystem::path(dir) / "run.lock"));
  RunLock again(dir);
  CHECK(std::filesystem::exists(again.path()));
}

TEST_CASE("an interrupted run resumes without regenerating chapters") {
  const std::string dir = fresh_dir("store_resume");
  const std::string proto_path = dir + "/prototype.json";
  const std::string manifest_path = dir + "/manifest.json";

  RunConfig run_cfg;
  run_cfg.goals_per_chapter = 1;
  run_cfg.plotweave_rounds = 1;
  run_cfg.max_chapters = 4;

  StorygenConfig gen_cfg;
  gen_cfg.goals_per_chapter = 1;
  gen_cfg.plotweave_rounds = 1;
  gen_cfg.max_chapters = 4;

  // Replies for exactly two chapters; the third cycle dies mid-flight.
  auto backend = std::make_shared<ScriptedBackend>();
  backend->push_replies("goal", {kOneGoal, kOneGoal});
  backend->push_replies("role", {kRoleReply, kRoleReply, kRoleReply, kRoleReply});
  backend->push_replies("scorer", {kScorerReply, kScorerReply});
  Gateway gw(backend, nullptr);

  StoryPrototype proto = seeded();
  RunManifest manifest = new_manifest(run_cfg);
  auto persist = [&](int chapter) {
    save_prototype(proto, proto_path);
    advance_stage(manifest, chapter, Stage::generated);
    save_manifest(manifest, manifest_path);
  };

  CHECK_THROWS_AS(run_story(proto, gen_cfg, gw, persist), EngineError);

  // Disk holds exactly the last committed chapter.
  StoryPrototype recovered = load_prototype(proto_path);
  CHECK(recovered.head_chapter() == 2);
  CHECK(recovered.validate().empty());
  const std::string ch1 = recovered.snapshot_view(1).serialize();
  const std::string ch2 = recovered.snapshot_view(2).serialize();

  RunManifest loaded = load_manifest(manifest_path);
  CHECK(resume_point(loaded, run_cfg) == 3);

  // Fresh backend, same config: the run continues from chapter 3.
  auto backend2 = std::make_shared<ScriptedBackend>();
  backend2->push_reply("goal", kOneGoal);
  backend2->set_loop("goal", true);
  backend2->push_reply("role", kRoleReply);
  backend2->set_loop("role", true);
  backend2->push_reply("scorer", kScorerReply);
  backend2->set_loop("scorer", true);
  Gateway gw2(backend2, nullptr);

  std::vector<int> committed;
  StoryPrototype resumed = recovered;
  RunManifest manifest2 = loaded;
  auto persist2 = [&](int chapter) {
    save_prototype(resumed, proto_path);
    advance_stage(manifest2, chapter, Stage::generated);
    save_manifest(manifest2, manifest_path);
  };
  GenerationSummary summary = run_story(resumed, gen_cfg, gw2, [&](int chapter) {
    committed.push_back(chapter);
    persist2(chapter);
  });

  CHECK(summary.exit_reason == "max_chapters");
  CHECK(committed == std::vector<int>{3, 4});
  CHECK(resumed.head_chapter() == 4);
  // Earlier chapters came through the restart byte-identical.
  CHECK(resumed.snapshot_view(1).serialize() == ch1);
  CHECK(resumed.snapshot_view(2).serialize() == ch2);
  CHECK(load_manifest(manifest_path).last_committed_chapter == 4);
}
