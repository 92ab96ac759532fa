#include "creagentive/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>

#include <json.hpp>

#include "creagentive/fsutil.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace creagentive {

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::uint64_t from_hex64(const std::string& text, const std::string& path) {
  if (text.size() != 16 || text.find_first_not_of("0123456789abcdef") != std::string::npos) {
    raise(Errc::corrupt_document, "bad field " + path + ": not a 16-digit hex hash");
  }
  return std::strtoull(text.c_str(), nullptr, 16);
}

std::string iso_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json parse_document(const std::string& path, const char* expected_kind) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(read_file(path));
  } catch (const ordered_json::parse_error& e) {
    raise(Errc::corrupt_document, std::string("not a structured document: ") + e.what());
  }
  if (!doc.is_object()) raise(Errc::corrupt_document, "top level is not an object");
  if (!doc.contains("format_version") || !doc.at("format_version").is_number_integer()) {
    raise(Errc::corrupt_document, "missing field format_version");
  }
  const int version = doc.at("format_version").get<int>();
  if (version != 1) {
    throw EngineError(Errc::unsupported_version,
                      "format_version " + std::to_string(version) + " not supported");
  }
  if (expected_kind && doc.value("kind", "") != expected_kind) {
    raise(Errc::corrupt_document, std::string("document kind is not ") + expected_kind);
  }
  return doc;
}

void write_document(const ordered_json& doc, const std::string& path) {
  write_file_atomic(path, doc.dump(2) + "\n");
}

// Typed field access with a document path in every complaint.

template <typename T>
T field_as(const ordered_json& obj, const std::string& key, const std::string& path, T fallback);

template <>
std::string field_as(const ordered_json& obj, const std::string& key, const std::string& path,
                     std::string fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) raise(Errc::corrupt_document, "bad field " + path + "/" + key);
  return obj.at(key).get<std::string>();
}

template <>
int field_as(const ordered_json& obj, const std::string& key, const std::string& path,
             int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer()) {
    raise(Errc::corrupt_document, "bad field " + path + "/" + key);
  }
  return obj.at(key).get<int>();
}

template <>
std::uint64_t field_as(const ordered_json& obj, const std::string& key, const std::string& path,
                       std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_unsigned()) {
    raise(Errc::corrupt_document, "bad field " + path + "/" + key);
  }
  return obj.at(key).get<std::uint64_t>();
}

const ordered_json& array_field(const ordered_json& obj, const std::string& key,
                                const std::string& path) {
  static const ordered_json empty = ordered_json::array();
  if (!obj.contains(key)) return empty;
  if (!obj.at(key).is_array()) raise(Errc::corrupt_document, "bad field " + path + "/" + key);
  return obj.at(key);
}

std::vector<Rule> rules_from(const ordered_json& arr, const std::string& path) {
  std::vector<Rule> out;
  for (const auto& item : arr) {
    if (!item.is_object()) raise(Errc::corrupt_document, "bad field " + path + ": not an object");
    Rule r;
    r.name = field_as<std::string>(item, "name", path, "");
    r.description = field_as<std::string>(item, "description", path, "");
    if (r.name.empty()) raise(Errc::corrupt_document, "bad field " + path + ": rule needs a name");
    if (!item.contains("weight") || !item.at("weight").is_number()) {
      raise(Errc::corrupt_document, "bad field " + path + "/weight");
    }
    r.weight = item.at("weight").get<double>();
    out.push_back(std::move(r));
  }
  return out;
}

ordered_json config_json(const RunConfig& c) {
  ordered_json doc;
  doc["format_version"] = 1;
  doc["kind"] = "run_config";
  doc["backend"] = {{"kind", c.backend.kind},
                    {"endpoint", c.backend.endpoint},
                    {"model", c.backend.model},
                    {"api_key_env", c.backend.api_key_env},
                    {"timeout_s", c.backend.timeout_s},
                    {"retries", c.backend.retries},
                    {"script", c.backend.script}};
  doc["goals_per_chapter"] = c.goals_per_chapter;
  doc["plotweave_rounds"] = c.plotweave_rounds;
  doc["max_chapters"] = c.max_chapters;
  doc["rules_path"] = c.rules_path;
  ordered_json conditions = ordered_json::array();
  for (const auto& cond : c.exit_conditions) {
    conditions.push_back({{"kind", cond.kind}, {"params", cond.params}});
  }
  doc["exit_conditions"] = std::move(conditions);
  doc["genre"] = {{"genre", c.genre.genre},
                  {"style_notes", c.genre.style_notes},
                  {"target_words", c.genre.target_words}};
  doc["seed"] = c.seed;
  doc["recall_window"] = c.recall_window;
  doc["thread_lookahead"] = c.thread_lookahead;
  ordered_json planned = ordered_json::array();
  for (const auto& p : c.planned_plots) {
    planned.push_back({{"target_chapter", p.target_chapter}, {"text", p.text}});
  }
  doc["planned_plots"] = std::move(planned);
  doc["paths"] = {{"prototype", c.prototype_path},
                  {"chapters_dir", c.chapters_dir},
                  {"transcript", c.transcript_path}};
  return doc;
}

}  // namespace

void save_prototype(const StoryPrototype& proto, const std::string& path) {
  const auto report = proto.validate();
  if (!report.empty()) {
    raise(Errc::precondition_failed,
          "refusing to save an invalid prototype: " + report.front().code + " on " +
              report.front().subject);
  }
  write_file_atomic(path, proto.serialize());
}

StoryPrototype load_prototype(const std::string& path) {
  return StoryPrototype::deserialize(read_file(path));
}

RunConfig load_run_config(const std::string& path) {
  const ordered_json doc = parse_document(path, "run_config");
  RunConfig c;
  if (doc.contains("backend")) {
    const auto& b = doc.at("backend");
    if (!b.is_object()) raise(Errc::corrupt_document, "bad field backend");
    c.backend.kind = field_as<std::string>(b, "kind", "backend", c.backend.kind);
    c.backend.endpoint = field_as<std::string>(b, "endpoint", "backend", "");
    c.backend.model = field_as<std::string>(b, "model", "backend", "");
    c.backend.api_key_env = field_as<std::string>(b, "api_key_env", "backend", c.backend.api_key_env);
    c.backend.timeout_s = field_as<int>(b, "timeout_s", "backend", c.backend.timeout_s);
    c.backend.retries = field_as<int>(b, "retries", "backend", c.backend.retries);
    c.backend.script = field_as<std::string>(b, "script", "backend", "");
  }
  c.goals_per_chapter = field_as<int>(doc, "goals_per_chapter", "", c.goals_per_chapter);
  c.plotweave_rounds = field_as<int>(doc, "plotweave_rounds", "", c.plotweave_rounds);
  c.max_chapters = field_as<int>(doc, "max_chapters", "", c.max_chapters);
  if (c.max_chapters < 1) raise(Errc::corrupt_document, "max_chapters must be at least 1");
  c.rules_path = field_as<std::string>(doc, "rules_path", "", "");
  for (const auto& item : array_field(doc, "exit_conditions", "")) {
    if (!item.is_object() || !item.contains("kind") || !item.at("kind").is_string()) {
      raise(Errc::corrupt_document, "bad field exit_conditions/kind");
    }
    ExitCondition cond;
    cond.kind = item.at("kind").get<std::string>();
    if (item.contains("params")) {
      if (!item.at("params").is_object()) {
        raise(Errc::corrupt_document, "bad field exit_conditions/params");
      }
      cond.params = item.at("params");
    }
    c.exit_conditions.push_back(std::move(cond));
  }
  if (doc.contains("genre")) {
    const auto& g = doc.at("genre");
    if (!g.is_object()) raise(Errc::corrupt_document, "bad field genre");
    c.genre.genre = field_as<std::string>(g, "genre", "genre", c.genre.genre);
    c.genre.style_notes = field_as<std::string>(g, "style_notes", "genre", "");
    c.genre.target_words = field_as<int>(g, "target_words", "genre", c.genre.target_words);
  }
  c.seed = field_as<std::uint64_t>(doc, "seed", "", 0);
  c.recall_window = field_as<int>(doc, "recall_window", "", c.recall_window);
  c.thread_lookahead = field_as<int>(doc, "thread_lookahead", "", c.thread_lookahead);
  for (const auto& item : array_field(doc, "planned_plots", "")) {
    if (!item.is_object()) raise(Errc::corrupt_document, "bad field planned_plots");
    PlannedPlot p;
    p.target_chapter = field_as<int>(item, "target_chapter", "planned_plots", 0);
    p.text = field_as<std::string>(item, "text", "planned_plots", "");
    if (p.target_chapter < 1 || p.text.empty()) {
      raise(Errc::corrupt_document, "bad field planned_plots: needs target_chapter and text");
    }
    c.planned_plots.push_back(std::move(p));
  }
  if (doc.contains("paths")) {
    const auto& p = doc.at("paths");
    if (!p.is_object()) raise(Errc::corrupt_document, "bad field paths");
    c.prototype_path = field_as<std::string>(p, "prototype", "paths", c.prototype_path);
    c.chapters_dir = field_as<std::string>(p, "chapters_dir", "paths", c.chapters_dir);
    c.transcript_path = field_as<std::string>(p, "transcript", "paths", c.transcript_path);
  }
  if (c.prototype_path.empty() || c.chapters_dir.empty() || c.transcript_path.empty()) {
    raise(Errc::corrupt_document, "paths must all be set");
  }
  return c;
}

void save_run_config(const RunConfig& config, const std::string& path) {
  write_document(config_json(config), path);
}

std::uint64_t config_hash(const RunConfig& config) {
  return fnv1a(config_json(config).dump());
}

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::generated: return "generated";
    case Stage::written: return "written";
    case Stage::evaluated: return "evaluated";
  }
  return "generated";
}

Stage stage_from(const std::string& name) {
  if (name == "generated") return Stage::generated;
  if (name == "written") return Stage::written;
  if (name == "evaluated") return Stage::evaluated;
  raise(Errc::corrupt_document, "unknown stage " + name);
}

RunManifest new_manifest(const RunConfig& config) {
  RunManifest m;
  m.config_hash = config_hash(config);
  m.created_at = iso_now();
  m.updated_at = m.created_at;
  m.run_id = "run-" + hex64(m.config_hash ^ fnv1a(m.created_at));
  return m;
}

RunManifest load_manifest(const std::string& path) {
  const ordered_json doc = parse_document(path, "run_manifest");
  RunManifest m;
  m.run_id = field_as<std::string>(doc, "run_id", "", "");
  if (m.run_id.empty()) raise(Errc::corrupt_document, "missing field run_id");
  m.config_hash = from_hex64(field_as<std::string>(doc, "config_hash", "", ""), "config_hash");
  m.last_committed_chapter = field_as<int>(doc, "last_committed_chapter", "", 0);
  if (doc.contains("stages")) {
    if (!doc.at("stages").is_object()) raise(Errc::corrupt_document, "bad field stages");
    for (const auto& [key, value] : doc.at("stages").items()) {
      if (!value.is_string()) raise(Errc::corrupt_document, "bad field stages/" + key);
      char* end = nullptr;
      const long chapter = std::strtol(key.c_str(), &end, 10);
      if (end == key.c_str() || *end != '\0' || chapter < 1) {
        raise(Errc::corrupt_document, "bad field stages/" + key);
      }
      m.stages[static_cast<int>(chapter)] = stage_from(value.get<std::string>());
    }
  }
  m.created_at = field_as<std::string>(doc, "created_at", "", "");
  m.updated_at = field_as<std::string>(doc, "updated_at", "", "");
  return m;
}

void save_manifest(RunManifest& manifest, const std::string& path) {
  manifest.updated_at = iso_now();
  ordered_json doc;
  doc["format_version"] = 1;
  doc["kind"] = "run_manifest";
  doc["run_id"] = manifest.run_id;
  doc["config_hash"] = hex64(manifest.config_hash);
  doc["last_committed_chapter"] = manifest.last_committed_chapter;
  ordered_json stages = ordered_json::object();
  for (const auto& [chapter, stage] : manifest.stages) {
    stages[std::to_string(chapter)] = stage_name(stage);
  }
  doc["stages"] = std::move(stages);
  doc["created_at"] = manifest.created_at;
  doc["updated_at"] = manifest.updated_at;
  write_document(doc, path);
}

void advance_stage(RunManifest& manifest, int chapter, Stage stage) {
  if (chapter < 1) {
    raise(Errc::precondition_failed, "chapter must be positive");
  }
  auto it = manifest.stages.find(chapter);
  if (it != manifest.stages.end() && static_cast<int>(stage) < static_cast<int>(it->second)) {
    raise(Errc::precondition_failed,
          "stage of chapter " + std::to_string(chapter) + " cannot move back from " +
              stage_name(it->second) + " to " + stage_name(stage));
  }
  manifest.stages[chapter] = stage;
  if (stage == Stage::generated || manifest.last_committed_chapter < chapter) {
    manifest.last_committed_chapter = std::max(manifest.last_committed_chapter, chapter);
  }
}

int resume_point(const RunManifest& manifest, const RunConfig& config, bool force) {
  if (!force && manifest.config_hash != config_hash(config)) {
    raise(Errc::config_mismatch,
          "run manifest belongs to a different configuration (use force to override)");
  }
  return manifest.last_committed_chapter + 1;
}

void load_script(ScriptedBackend& backend, const std::string& path) {
  const ordered_json doc = parse_document(path, "reply_script");
  if (!doc.contains("tags") || !doc.at("tags").is_object()) {
    raise(Errc::corrupt_document, "missing field tags");
  }
  for (const auto& [tag, spec] : doc.at("tags").items()) {
    if (!spec.is_object() || !spec.contains("replies") || !spec.at("replies").is_array()) {
      raise(Errc::corrupt_document, "bad field tags/" + tag + "/replies");
    }
    for (const auto& reply : spec.at("replies")) {
      if (!reply.is_string()) raise(Errc::corrupt_document, "bad field tags/" + tag + "/replies");
      backend.push_reply(tag, reply.get<std::string>());
    }
    if (spec.contains("loop")) {
      if (!spec.at("loop").is_boolean()) {
        raise(Errc::corrupt_document, "bad field tags/" + tag + "/loop");
      }
      backend.set_loop(tag, spec.at("loop").get<bool>());
    }
  }
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
  if (config.kind == "scripted") {
    auto backend = std::make_shared<ScriptedBackend>();
    if (!config.script.empty()) load_script(*backend, config.script);
    return backend;
  }
  if (config.kind == "http") {
    return std::make_shared<HttpBackend>(config);
  }
  raise(Errc::precondition_failed, "unknown backend kind " + config.kind);
}

RuleConfig load_rules(const std::string& path) {
  const ordered_json doc = parse_document(path, "rule_config");
  RuleConfig rules;
  rules.general_rules = rules_from(array_field(doc, "general", ""), "general");
  rules.story_rules = rules_from(array_field(doc, "story", ""), "story");
  return rules;
}

RunLock::RunLock(const std::string& dir) {
  fs::create_directories(dir);
  path_ = (fs::path(dir) / "run.lock").string();
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    const int err = errno;
    path_.clear();
    if (err == EEXIST) {
      raise(Errc::locked, "another run owns this directory (run.lock present)");
    }
    raise(Errc::io_error, std::string("cannot create lock file: ") + std::strerror(err));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  // Best effort; the lock is the file's existence, not its content.
  [[maybe_unused]] ssize_t n = ::write(fd, pid.c_str(), pid.size());
  ::close(fd);
}

RunLock::~RunLock() {
  if (!path_.empty()) ::unlink(path_.c_str());
}

}  // namespace creagentive
