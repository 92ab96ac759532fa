#pragma once

// Run persistence: prototype documents on disk, run configuration with a
// stable content hash, resumable run manifests, reply scripts for the
// scripted backend, rule documents, and the run-directory lock.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "creagentive/gateway.hpp"
#include "creagentive/prototype.hpp"
#include "creagentive/storygen.hpp"
#include "creagentive/writing.hpp"

namespace creagentive {

// Whole-document persistence with atomic replace. Saving a prototype that
// fails validation is refused.
void save_prototype(const StoryPrototype& proto, const std::string& path);
StoryPrototype load_prototype(const std::string& path);

struct RunConfig {
  BackendConfig backend;
  int goals_per_chapter = 3;
  int plotweave_rounds = 2;
  int max_chapters = 100;
  std::string rules_path;  // optional rule document; empty uses the defaults
  std::vector<ExitCondition> exit_conditions;
  GenreSpec genre;
  std::uint64_t seed = 0;
  int recall_window = 5;
  int thread_lookahead = 3;
  std::vector<PlannedPlot> planned_plots;
  std::string prototype_path = "prototype.json";
  std::string chapters_dir = "chapters";
  std::string transcript_path = "transcript.jsonl";
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& config, const std::string& path);

// FNV-1a over the canonical serialization; stable across loads and saves.
std::uint64_t config_hash(const RunConfig& config);

enum class Stage { generated = 0, written = 1, evaluated = 2 };
const char* stage_name(Stage s);
Stage stage_from(const std::string& name);

struct RunManifest {
  std::string run_id;
  std::uint64_t config_hash = 0;
  int last_committed_chapter = 0;
  std::map<int, Stage> stages;
  std::string created_at;
  std::string updated_at;
};

RunManifest new_manifest(const RunConfig& config);
RunManifest load_manifest(const std::string& path);
// Stamps updated_at, then writes atomically.
void save_manifest(RunManifest& manifest, const std::string& path);

// Records progress; stages only move forward. Marking a chapter generated
// also advances last_committed_chapter.
void advance_stage(RunManifest& manifest, int chapter, Stage stage);

// Next chapter to generate. The manifest must belong to the same config
// unless force is set.
int resume_point(const RunManifest& manifest, const RunConfig& config, bool force = false);

// Reply script document: {format_version, tags: {tag: {replies, loop}}}.
void load_script(ScriptedBackend& backend, const std::string& path);

std::shared_ptr<Backend> make_backend(const BackendConfig& config);

// Rule document: {format_version, general: [rule], story: [rule]} where a
// rule is {name, weight, description}.
RuleConfig load_rules(const std::string& path);

// Exclusive ownership of a run directory via an O_EXCL lock file; the lock
// is released when the object is destroyed.
class RunLock {
 public:
  explicit RunLock(const std::string& dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace creagentive
