#include "creagentive/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <regex>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "creagentive/fsutil.hpp"
#include "creagentive/hnes.hpp"
#include "creagentive/init_workflow.hpp"
#include "creagentive/store.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace creagentive {

namespace {

fs::path resolve(const fs::path& dir, const std::string& path) {
  fs::path p(path);
  return p.is_absolute() ? p : dir / p;
}

RunConfig open_config(const fs::path& dir, bool create_default) {
  const fs::path path = dir / "run.json";
  if (fs::exists(path)) return load_run_config(path.string());
  RunConfig config;
  if (create_default) {
    fs::create_directories(dir);
    save_run_config(config, path.string());
  }
  return config;
}

Gateway open_gateway(const fs::path& dir, const RunConfig& config) {
  BackendConfig backend_cfg = config.backend;
  if (!backend_cfg.script.empty()) {
    backend_cfg.script = resolve(dir, backend_cfg.script).string();
  }
  auto backend = make_backend(backend_cfg);
  auto log = std::make_shared<TranscriptLog>(resolve(dir, config.transcript_path).string());
  return Gateway(std::move(backend), std::move(log));
}

StoryPrototype open_prototype(const fs::path& dir, const RunConfig& config) {
  return load_prototype(resolve(dir, config.prototype_path).string());
}

void do_init(const fs::path& dir, const std::string& brief) {
  fs::create_directories(dir);
  RunConfig config = open_config(dir, true);
  RunLock lock(dir.string());
  const fs::path proto_path = resolve(dir, config.prototype_path);
  if (fs::exists(proto_path)) {
    raise(Errc::precondition_failed,
          "run already initialized (" + proto_path.string() + " exists)");
  }

  Gateway gw = open_gateway(dir, config);
  gw.log().set_chapter(0);
  gw.log().note("info", "command init");
  InitialConfig icfg = complete_config(extract_config(brief, gw));
  StoryPrototype proto;
  materialize(icfg, proto);
  save_prototype(proto, proto_path.string());

  RunManifest manifest = new_manifest(config);
  save_manifest(manifest, (dir / "manifest.json").string());
  std::cout << "initialized \"" << proto.meta().title << "\" with "
            << proto.characters().size() << " characters in " << dir.string() << "\n";
}

void do_generate(const fs::path& dir, bool force) {
  RunConfig config = open_config(dir, false);
  RunLock lock(dir.string());
  StoryPrototype proto = open_prototype(dir, config);
  RunManifest manifest = load_manifest((dir / "manifest.json").string());

  const int next = resume_point(manifest, config, force);
  if (proto.head_chapter() + 1 != next) {
    raise(Errc::precondition_failed,
          "manifest says chapter " + std::to_string(next) + " is next but the prototype head is " +
              std::to_string(proto.head_chapter()));
  }
  if (next > config.max_chapters) {
    std::cout << "nothing to generate: " << manifest.last_committed_chapter
              << " chapters already committed\n";
    return;
  }

  StorygenConfig gen;
  gen.goals_per_chapter = config.goals_per_chapter;
  gen.plotweave_rounds = config.plotweave_rounds;
  gen.max_chapters = config.max_chapters;
  gen.exit_conditions = config.exit_conditions;
  if (!config.rules_path.empty()) {
    gen.rules = load_rules(resolve(dir, config.rules_path).string());
  }

  Gateway gw = open_gateway(dir, config);
  gw.log().note("info", "command generate from chapter " + std::to_string(next));
  const fs::path proto_path = resolve(dir, config.prototype_path);
  const fs::path manifest_path = dir / "manifest.json";
  GenerationSummary summary = run_story(proto, gen, gw, [&](int chapter) {
    save_prototype(proto, proto_path.string());
    advance_stage(manifest, chapter, Stage::generated);
    save_manifest(manifest, manifest_path.string());
  });
  std::cout << "generated " << summary.chapters_produced << " chapters (exit: "
            << summary.exit_reason << "), head at chapter " << proto.head_chapter() << "\n";
}

void do_write(const fs::path& dir, const std::string& genre_flag) {
  RunConfig config = open_config(dir, false);
  RunLock lock(dir.string());
  StoryPrototype proto = open_prototype(dir, config);
  GenreSpec genre = config.genre;
  if (!genre_flag.empty()) genre.genre = genre_flag;

  Gateway gw = open_gateway(dir, config);
  gw.log().note("info", "command write genre " + genre.genre);
  auto chapters = render_story(proto, genre, config.recall_window, config.thread_lookahead,
                               config.planned_plots, gw);
  const fs::path out = resolve(dir, config.chapters_dir);
  ordered_json manifest_doc = export_story(chapters, out.string(), genre.genre);

  RunManifest manifest = load_manifest((dir / "manifest.json").string());
  for (const auto& chapter : chapters) {
    auto it = manifest.stages.find(chapter.chapter);
    if (it == manifest.stages.end() || it->second < Stage::written) {
      advance_stage(manifest, chapter.chapter, Stage::written);
    }
  }
  save_manifest(manifest, (dir / "manifest.json").string());
  std::cout << "wrote " << chapters.size() << " chapters ("
            << manifest_doc["total_words"].get<std::size_t>() << " words) to " << out.string()
            << "\n";
}

void do_evaluate(const fs::path& dir, int interval, int start_idx, int end_idx, int c_baseline,
                 const std::string& human_scores) {
  RunConfig config = open_config(dir, false);
  Gateway gw = open_gateway(dir, config);
  gw.log().note("info", "command evaluate interval " + std::to_string(interval));
  EvalReport report = run_hnes(resolve(dir, config.chapters_dir).string(), interval, start_idx,
                               end_idx, c_baseline, human_scores, gw);

  // Stage bookkeeping is best effort: evaluation stays read-only when another
  // command holds the run directory.
  try {
    RunLock lock(dir.string());
    RunManifest manifest = load_manifest((dir / "manifest.json").string());
    for (const auto& [chapter, stage] : manifest.stages) {
      if (start_idx > 0 && chapter < start_idx) continue;
      if (end_idx > 0 && chapter > end_idx) continue;
      advance_stage(manifest, chapter, Stage::evaluated);
    }
    save_manifest(manifest, (dir / "manifest.json").string());
  } catch (const EngineError&) {
  }

  std::cout << "evaluated " << report.length.chapters << " chapters: s_q "
            << report.s_q << ", s_l " << report.s_l << ", qls " << report.qls << "\n"
            << "report: " << report.report_path << "\n";
}

void do_export(const fs::path& dir, const std::string& out_flag) {
  RunConfig config = open_config(dir, false);
  const fs::path src = resolve(dir, config.chapters_dir);
  if (!fs::is_directory(src)) {
    raise(Errc::empty_directory, "no chapter directory at " + src.string());
  }
  static const std::regex pattern("^chapter_([0-9]{1,9})\\.(md|txt)$");
  std::vector<std::pair<int, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(src)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) files.emplace_back(std::stoi(m[1].str()), entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<ChapterText> chapters;
  for (const auto& [index, path] : files) {
    const std::string text = read_file(path.string());
    const std::size_t eol = text.find('\n');
    const std::string heading = text.substr(0, eol == std::string::npos ? text.size() : eol);
    const std::string prefix = "# Chapter " + std::to_string(index) + ": ";
    if (heading.rfind(prefix, 0) != 0) {
      raise(Errc::corrupt_document, path.filename().string() + ": missing chapter heading");
    }
    ChapterText chapter;
    chapter.chapter = index;
    chapter.genre = config.genre.genre;
    chapter.title = heading.substr(prefix.size());
    std::string body = eol == std::string::npos ? std::string() : text.substr(eol + 1);
    while (!body.empty() && (body.front() == '\n' || body.front() == '\r')) body.erase(0, 1);
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    chapter.body = body;
    std::istringstream words(body);
    std::string token;
    while (words >> token) ++chapter.word_count;
    chapters.push_back(std::move(chapter));
  }

  const fs::path out = out_flag.empty() ? dir / "export" : fs::path(out_flag);
  ordered_json manifest_doc = export_story(chapters, out.string(), config.genre.genre);
  std::cout << "exported " << manifest_doc["chapters"].get<std::size_t>() << " chapters ("
            << manifest_doc["total_words"].get<std::size_t>() << " words) to " << out.string()
            << "\n";
}

int do_inspect(const fs::path& dir, const std::string& kind, const std::string& key) {
  RunConfig config = open_config(dir, false);
  StoryPrototype proto = open_prototype(dir, config);

  if (kind == "chapter") {
    char* end = nullptr;
    const long chapter = std::strtol(key.c_str(), &end, 10);
    if (end == key.c_str() || *end != '\0') {
      std::cerr << "error: Usage: inspect chapter needs a number, got " << key << "\n";
      return 2;
    }
    std::cout << proto.snapshot_view(static_cast<int>(chapter)).serialize();
    return 0;
  }

  LimitedView view = proto.limited_view(key, proto.head_chapter());
  ordered_json doc;
  doc["character"] = {{"id", view.self.id}, {"name", view.self.name}};
  for (const auto& [k, v] : view.self.static_attrs) doc["character"]["attrs"][k] = v;
  doc["chapter"] = view.chapter;
  doc["story"] = view.meta.title;
  ordered_json rels = ordered_json::array();
  for (const auto& r : view.relationships) {
    rels.push_back({{"src", r.src},
                    {"dst", r.dst},
                    {"kind", r.kind},
                    {"strength", r.strength},
                    {"direction", direction_name(r.direction)},
                    {"chapter", r.chapter}});
  }
  doc["relationships"] = std::move(rels);
  ordered_json events = ordered_json::array();
  for (const auto& e : view.events) {
    events.push_back({{"id", e.id},
                      {"chapter", e.chapter},
                      {"description", e.description},
                      {"location", e.scene.location},
                      {"emotional_impact", e.own.emotional_impact},
                      {"impact_intensity", e.own.impact_intensity},
                      {"co_participants", e.co_participants}});
  }
  doc["events"] = std::move(events);
  std::cout << doc.dump(2) << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"creagentive: multi-agent long-form story engine"};
  app.require_subcommand(1);
  std::string dir = ".";
  app.add_option("-C,--dir", dir, "run directory")->capture_default_str();

  auto* init_cmd =
      app.add_subcommand("init", "turn a story brief into a seeded prototype");
  std::string brief, brief_file;
  init_cmd->add_option("brief", brief, "free-form story brief");
  init_cmd->add_option("--brief-file", brief_file, "file holding the brief");

  auto* gen_cmd =
      app.add_subcommand("generate", "run plot cycles until an exit condition holds");
  bool force = false;
  gen_cmd->add_flag("--force", force, "resume even under a changed configuration");

  auto* write_cmd =
      app.add_subcommand("write", "render committed chapters to prose and export them");
  std::string genre_flag;
  write_cmd->add_option("--genre", genre_flag, "novel | screenplay | other:<label>");

  auto* eval_cmd = app.add_subcommand("evaluate", "score exported chapters hierarchically");
  int interval = 10, start_idx = 0, end_idx = 0, c_baseline = 10;
  std::string human_scores;
  eval_cmd->add_option("--interval", interval, "chapters per global evaluation")
      ->capture_default_str();
  eval_cmd->add_option("--start-idx", start_idx, "first chapter index to evaluate");
  eval_cmd->add_option("--end-idx", end_idx, "last chapter index to evaluate");
  eval_cmd->add_option("--c-baseline", c_baseline, "chapter count baseline for the length score")
      ->capture_default_str();
  eval_cmd->add_option("--human-scores", human_scores, "per-rater dimension scores file");

  auto* export_cmd =
      app.add_subcommand("export", "re-export chapter files and manifest to a directory");
  std::string out_flag;
  export_cmd->add_option("--out", out_flag, "destination directory (default <dir>/export)");

  auto* inspect_cmd = app.add_subcommand("inspect", "read-only prototype queries");
  std::string kind, key;
  inspect_cmd->add_option("kind", kind, "chapter | character")
      ->required()
      ->check(CLI::IsMember({"chapter", "character"}));
  inspect_cmd->add_option("key", key, "chapter number or character id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: Usage: " << e.what() << "\n";
    return 2;
  }

  try {
    const fs::path run_dir(dir);
    if (*init_cmd) {
      std::string text = brief;
      if (!brief_file.empty()) text = read_file(resolve(run_dir, brief_file).string());
      if (text.empty()) {
        std::cerr << "error: Usage: init needs a brief (positional or --brief-file)\n";
        return 2;
      }
      do_init(run_dir, text);
    } else if (*gen_cmd) {
      do_generate(run_dir, force);
    } else if (*write_cmd) {
      do_write(run_dir, genre_flag);
    } else if (*eval_cmd) {
      do_evaluate(run_dir, interval, start_idx, end_idx, c_baseline, human_scores);
    } else if (*export_cmd) {
      do_export(run_dir, out_flag);
    } else if (*inspect_cmd) {
      return do_inspect(run_dir, kind, key);
    }
    return 0;
  } catch (const EngineError& e) {
    std::cerr << "error: " << e.code_name() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace creagentive
