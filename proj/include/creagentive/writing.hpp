#pragma once

// Chapter rendering: recall digests the relevant past, the thread agent
// plants foreshadowing for planned futures, the plan merges both into beats,
// and the writer turns beats into prose. Read-only over committed snapshots.

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "creagentive/gateway.hpp"
#include "creagentive/prototype.hpp"

namespace creagentive {

struct RecallDigest {
  int chapter = 0;
  struct Cited {
    std::string event;  // id of an earlier committed event
    std::string why_relevant;
  };
  std::vector<Cited> relevant_events;
  std::map<std::string, std::string> emotional_memory;  // character id -> text
};

struct PlannedPlot {
  int target_chapter = 0;
  std::string text;
};

struct ThreadDigest {
  int chapter = 0;
  struct Hint {
    int target_chapter = 0;  // strictly after the digest's chapter
    std::string hint;
  };
  std::vector<Hint> foreshadowing;
};

// novel | screenplay | other:<text>
bool valid_genre(const std::string& genre);

struct GenreSpec {
  std::string genre = "novel";
  std::string style_notes;
  int target_words = 800;  // >= 100
};

struct WritingPlan {
  int chapter = 0;
  std::string snapshot_summary;
  RecallDigest recall;
  ThreadDigest thread;
  GenreSpec genre;
  std::vector<std::string> beat_list;  // non-empty
};

struct ChapterText {
  int chapter = 0;
  std::string genre;
  std::string title;
  std::string body;
  std::size_t word_count = 0;  // whitespace tokens of body
};

// Picks which events from the trailing `window` chapters matter for this
// chapter. No model call when the window holds nothing.
RecallDigest recall(const StoryPrototype& proto, int chapter, int window, Gateway& gateway);

// Foreshadowing hints for planned plots with target chapters in
// (chapter, chapter+lookahead]. Named thread_digest to stay clear of
// std::thread. No model call when nothing is planned.
ThreadDigest thread_digest(const StoryPrototype& proto, int chapter, int lookahead,
                           const std::vector<PlannedPlot>& planned, Gateway& gateway);

// Ordered beat list covering every committed event of the chapter.
WritingPlan build_plan(const StoryPrototype& proto, int chapter, RecallDigest recall,
                       ThreadDigest thread, GenreSpec genre, Gateway& gateway);

ChapterText write_chapter(const WritingPlan& plan, Gateway& gateway);

// One file per chapter (chapter_%04d.md, first line "# Chapter <n>: <title>")
// plus manifest.json with the word and chapter totals. Chapters must be
// contiguous from 1. Returns the manifest document.
nlohmann::ordered_json export_story(const std::vector<ChapterText>& chapters,
                                    const std::string& out_dir, const std::string& genre);

// Renders every committed chapter in order. `planned` may hold plots for any
// future chapter; each chapter sees only those within its lookahead.
std::vector<ChapterText> render_story(const StoryPrototype& proto, const GenreSpec& genre,
                                      int window, int lookahead,
                                      const std::vector<PlannedPlot>& planned,
                                      Gateway& gateway);

}  // namespace creagentive
