#include "creagentive/writing.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

#include "creagentive/fsutil.hpp"
#include "creagentive/prompts.hpp"

namespace creagentive {

namespace {

std::string render_events(const std::vector<EventNode>& events) {
  if (events.empty()) return "(none)";
  std::ostringstream out;
  for (const auto& e : events) {
    out << "- " << e.id << " (chapter " << e.chapter << "): " << e.description;
    if (!e.consequences.empty()) {
      out << " =>";
      for (const auto& c : e.consequences) out << " " << c << ";";
    }
    out << "\n";
  }
  return out.str();
}

std::string render_recall(const RecallDigest& digest) {
  if (digest.relevant_events.empty() && digest.emotional_memory.empty()) return "(none)";
  std::ostringstream out;
  for (const auto& r : digest.relevant_events) {
    out << "- " << r.event << ": " << r.why_relevant << "\n";
  }
  for (const auto& [who, memory] : digest.emotional_memory) {
    out << "- " << who << " carries: " << memory << "\n";
  }
  return out.str();
}

std::string render_threads(const ThreadDigest& digest) {
  if (digest.foreshadowing.empty()) return "(none)";
  std::ostringstream out;
  for (const auto& h : digest.foreshadowing) {
    out << "- toward chapter " << h.target_chapter << ": " << h.hint << "\n";
  }
  return out.str();
}

std::string need_text(const nlohmann::ordered_json& j, const char* key, const char* who) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_string() ||
      j[key].get<std::string>().empty()) {
    raise(Errc::schema_violation, std::string(who) + ": " + key + " must be non-empty text");
  }
  return j[key].get<std::string>();
}

std::size_t count_words(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  std::size_t n = 0;
  while (in >> word) ++n;
  return n;
}

}  // namespace

bool valid_genre(const std::string& genre) {
  if (genre == "novel" || genre == "screenplay") return true;
  return genre.size() > 6 && genre.rfind("other:", 0) == 0;
}

RecallDigest recall(const StoryPrototype& proto, int chapter, int window, Gateway& gateway) {
  if (chapter < 1) raise(Errc::precondition_failed, "recall starts at chapter 1");
  if (window < 1) raise(Errc::precondition_failed, "window must be positive");

  RecallDigest digest;
  digest.chapter = chapter;
  const int from = std::max(0, chapter - window);
  auto candidates = proto.plot_chain(from, chapter - 1);
  if (candidates.empty()) return digest;

  std::set<std::string> candidate_ids;
  for (const auto& e : candidates) candidate_ids.insert(e.id);

  std::map<std::string, std::string> resolve;  // character name/id -> id
  for (const auto& c : proto.snapshot_view(proto.head_chapter()).characters) {
    resolve[c.id] = c.id;
    resolve[c.name] = c.id;
  }

  ChatRequest req;
  req.user = prompts::recall().render(
      {{"candidates", render_events(candidates)},
       {"chapter_events", render_events(proto.plot_chain(chapter, chapter))},
       {"chapter", std::to_string(chapter)}});
  req.temperature = 0.1;
  req.max_tokens = 2048;
  req.tag = "recall";

  gateway.complete_structured(req, prompts::recall_schema(), [&](const nlohmann::ordered_json& doc) {
    digest.relevant_events.clear();
    digest.emotional_memory.clear();
    const auto& cited = doc.at("relevant_events");
    if (!cited.is_array()) {
      raise(Errc::schema_violation, "recall: relevant_events must be an array");
    }
    for (const auto& j : cited) {
      RecallDigest::Cited entry;
      entry.event = need_text(j, "event", "recall");
      if (candidate_ids.find(entry.event) == candidate_ids.end()) {
        raise(Errc::unknown_event_id, "recall cites " + entry.event + " outside the window");
      }
      entry.why_relevant = need_text(j, "why_relevant", "recall");
      digest.relevant_events.push_back(std::move(entry));
    }
    const auto& memory = doc.at("emotional_memory");
    if (!memory.is_object()) {
      raise(Errc::schema_violation, "recall: emotional_memory must be an object");
    }
    for (const auto& [who, text] : memory.items()) {
      auto it = resolve.find(who);
      if (it == resolve.end()) {
        raise(Errc::schema_violation, "recall: unknown character " + who);
      }
      if (!text.is_string()) {
        raise(Errc::schema_violation, "recall: emotional_memory values must be text");
      }
      digest.emotional_memory[it->second] = text.get<std::string>();
    }
  });
  return digest;
}

ThreadDigest thread_digest(const StoryPrototype& proto, int chapter, int lookahead,
                           const std::vector<PlannedPlot>& planned, Gateway& gateway) {
  if (chapter < 1) raise(Errc::precondition_failed, "thread digest starts at chapter 1");
  if (lookahead < 1) raise(Errc::precondition_failed, "lookahead must be positive");
  std::set<int> targets;
  for (const auto& p : planned) {
    if (p.target_chapter <= chapter || p.target_chapter > chapter + lookahead) {
      raise(Errc::precondition_failed,
            "planned plot targets chapter " + std::to_string(p.target_chapter) +
                " outside (" + std::to_string(chapter) + ", " +
                std::to_string(chapter + lookahead) + "]");
    }
    targets.insert(p.target_chapter);
  }

  ThreadDigest digest;
  digest.chapter = chapter;
  if (planned.empty()) return digest;

  std::ostringstream planned_text;
  for (const auto& p : planned) {
    planned_text << "- chapter " << p.target_chapter << ": " << p.text << "\n";
  }

  ChatRequest req;
  req.user = prompts::thread().render(
      {{"planned", planned_text.str()},
       {"events", render_events(proto.plot_chain(chapter, chapter))},
       {"chapter", std::to_string(chapter)}});
  req.temperature = 0.1;
  req.max_tokens = 1024;
  req.tag = "thread";

  gateway.complete_structured(req, prompts::thread_schema(), [&](const nlohmann::ordered_json& doc) {
    digest.foreshadowing.clear();
    const auto& hints = doc.at("foreshadowing");
    if (!hints.is_array()) {
      raise(Errc::schema_violation, "thread: foreshadowing must be an array");
    }
    for (const auto& j : hints) {
      ThreadDigest::Hint hint;
      if (!j.is_object() || !j.contains("target_chapter") ||
          !j["target_chapter"].is_number_integer()) {
        raise(Errc::schema_violation, "thread: hint needs an integer target_chapter");
      }
      hint.target_chapter = j["target_chapter"].get<int>();
      if (targets.find(hint.target_chapter) == targets.end()) {
        raise(Errc::schema_violation,
              "thread: hint targets unplanned chapter " +
                  std::to_string(hint.target_chapter));
      }
      hint.hint = need_text(j, "hint", "thread");
      digest.foreshadowing.push_back(std::move(hint));
    }
  });
  return digest;
}

WritingPlan build_plan(const StoryPrototype& proto, int chapter, RecallDigest recall,
                       ThreadDigest thread, GenreSpec genre, Gateway& gateway) {
  if (!valid_genre(genre.genre)) {
    raise(Errc::precondition_failed, "invalid genre: " + genre.genre);
  }
  if (genre.target_words < 100) {
    raise(Errc::precondition_failed, "target_words must be at least 100");
  }
  SnapshotView view = proto.snapshot_view(chapter);
  auto chapter_events = proto.plot_chain(chapter, chapter);

  WritingPlan plan;
  plan.chapter = chapter;
  plan.recall = std::move(recall);
  plan.thread = std::move(thread);
  plan.genre = std::move(genre);

  std::ostringstream summary;
  summary << view.meta.title << ": " << view.meta.background
          << " Long-term goal: " << view.meta.long_term_goal << " Characters:";
  for (const auto& c : view.characters) summary << " " << c.name << " (" << c.id << ");";
  plan.snapshot_summary = summary.str();

  std::set<std::string> must_cover;
  for (const auto& e : chapter_events) must_cover.insert(e.id);

  ChatRequest req;
  req.user = prompts::plan().render({{"events", render_events(chapter_events)},
                                     {"recall_digest", render_recall(plan.recall)},
                                     {"threads", render_threads(plan.thread)},
                                     {"genre", plan.genre.genre},
                                     {"chapter", std::to_string(chapter)}});
  req.temperature = 0.1;
  req.max_tokens = 2048;
  req.tag = "plan";

  gateway.complete_structured(req, prompts::plan_schema(), [&](const nlohmann::ordered_json& doc) {
    plan.beat_list.clear();
    const auto& beats = doc.at("beats");
    if (!beats.is_array() || beats.empty()) {
      raise(Errc::schema_violation, "plan: beats must be a non-empty array");
    }
    std::set<std::string> covered;
    for (const auto& j : beats) {
      plan.beat_list.push_back(need_text(j, "text", "plan"));
      if (!j.contains("covers")) continue;
      if (!j["covers"].is_array()) {
        raise(Errc::schema_violation, "plan: covers must be an array");
      }
      for (const auto& id : j["covers"]) {
        if (!id.is_string() || must_cover.find(id.get<std::string>()) == must_cover.end()) {
          raise(Errc::schema_violation,
                "plan: covers cites an id outside this chapter: " + id.dump());
        }
        covered.insert(id.get<std::string>());
      }
    }
    for (const auto& id : must_cover) {
      if (covered.find(id) == covered.end()) {
        raise(Errc::coverage_gap, "plan leaves event " + id + " uncovered");
      }
    }
  });
  return plan;
}

ChapterText write_chapter(const WritingPlan& plan, Gateway& gateway) {
  if (plan.beat_list.empty()) raise(Errc::precondition_failed, "plan has no beats");

  std::ostringstream beats;
  for (std::size_t i = 0; i < plan.beat_list.size(); ++i) {
    beats << (i + 1) << ". " << plan.beat_list[i] << "\n";
  }

  ChatRequest req;
  req.user = prompts::writer().render(
      {{"genre", plan.genre.genre},
       {"style_notes", plan.genre.style_notes.empty() ? "(none)" : plan.genre.style_notes},
       {"target_words", std::to_string(plan.genre.target_words)},
       {"plan", plan.snapshot_summary + "\n" + beats.str()},
       {"recall_digest", render_recall(plan.recall)},
       {"threads", render_threads(plan.thread)},
       {"chapter", std::to_string(plan.chapter)}});
  req.temperature = 0.8;
  req.max_tokens = std::max(1024, plan.genre.target_words * 2);
  req.tag = "writer";

  ChatResponse res = gateway.complete(req);

  std::string text = res.text;
  std::size_t begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) raise(Errc::empty_body, "writer returned no prose");
  text.erase(0, begin);

  ChapterText out;
  out.chapter = plan.chapter;
  out.genre = plan.genre.genre;
  out.title = "Chapter " + std::to_string(plan.chapter);
  if (text[0] == '#') {
    std::size_t eol = text.find('\n');
    std::string heading = eol == std::string::npos ? text : text.substr(0, eol);
    heading.erase(0, heading.find_first_not_of("# \t"));
    while (!heading.empty() && (heading.back() == '\r' || heading.back() == ' ')) {
      heading.pop_back();
    }
    if (!heading.empty()) out.title = heading;
    text = eol == std::string::npos ? "" : text.substr(eol + 1);
    begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) raise(Errc::empty_body, "writer returned a heading only");
    text.erase(0, begin);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.pop_back();
  }
  out.body = std::move(text);
  out.word_count = count_words(out.body);
  return out;
}

nlohmann::ordered_json export_story(const std::vector<ChapterText>& chapters,
                                    const std::string& out_dir, const std::string& genre) {
  if (chapters.empty()) raise(Errc::precondition_failed, "nothing to export");
  std::vector<const ChapterText*> ordered;
  for (const auto& c : chapters) ordered.push_back(&c);
  std::sort(ordered.begin(), ordered.end(),
            [](const ChapterText* a, const ChapterText* b) { return a->chapter < b->chapter; });
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (ordered[i]->chapter != static_cast<int>(i) + 1) {
      raise(Errc::non_contiguous_chapters,
            "expected chapter " + std::to_string(i + 1) + ", found " +
                std::to_string(ordered[i]->chapter));
    }
  }

  std::filesystem::create_directories(out_dir);
  std::size_t total_words = 0;
  for (const auto* c : ordered) {
    char name[32];
    std::snprintf(name, sizeof name, "chapter_%04d.md", c->chapter);
    std::ostringstream content;
    content << "# Chapter " << c->chapter << ": " << c->title << "\n\n" << c->body << "\n";
    write_file_atomic((std::filesystem::path(out_dir) / name).string(), content.str());
    total_words += c->word_count;
  }

  nlohmann::ordered_json manifest;
  manifest["format_version"] = 1;
  manifest["kind"] = "story_manifest";
  manifest["genre"] = genre;
  manifest["chapters"] = ordered.size();       // L_c
  manifest["total_words"] = total_words;       // L_w
  write_file_atomic((std::filesystem::path(out_dir) / "manifest.json").string(),
                    manifest.dump(2) + "\n");
  return manifest;
}

std::vector<ChapterText> render_story(const StoryPrototype& proto, const GenreSpec& genre,
                                      int window, int lookahead,
                                      const std::vector<PlannedPlot>& planned,
                                      Gateway& gateway) {
  if (proto.head_chapter() < 1) {
    raise(Errc::precondition_failed, "no committed chapters to write");
  }
  std::vector<ChapterText> texts;
  for (int chapter = 1; chapter <= proto.head_chapter(); ++chapter) {
    gateway.log().set_chapter(chapter);
    std::vector<PlannedPlot> visible;
    for (const auto& p : planned) {
      if (p.target_chapter > chapter && p.target_chapter <= chapter + lookahead) {
        visible.push_back(p);
      }
    }
    RecallDigest past = recall(proto, chapter, window, gateway);
    ThreadDigest ahead = thread_digest(proto, chapter, lookahead, visible, gateway);
    WritingPlan plan = build_plan(proto, chapter, std::move(past), std::move(ahead), genre,
                                  gateway);
    texts.push_back(write_chapter(plan, gateway));
  }
  return texts;
}

}  // namespace creagentive
