#pragma once

// Versioned dual knowledge graph holding the narrative state: a
// character-centric role graph (typed, versioned relationships) and a plot
// graph (events attached to scenes, characters attached to events), with
// chapter-level snapshots and per-character limited views.
//
// All stores are append-only and elements are immutable once inserted, so a
// snapshot pins its element set by recording per-store extents instead of
// copying the graph. Later mutations can never alter a taken snapshot.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "creagentive/errors.hpp"

namespace creagentive {

enum class Direction { directed, mutual };

const char* direction_name(Direction d);
Direction direction_from(const std::string& name);

// kinship | romantic | rivalry | alliance | other:<text>
bool valid_relationship_kind(const std::string& kind);

struct CharacterNode {
  std::string id;
  std::string name;
  std::map<std::string, std::string> static_attrs;
  int created_chapter = 0;
};

struct RelationshipVersion {
  std::string src;
  std::string dst;
  std::string kind;
  double strength = 0.0;  // [0,1]
  Direction direction = Direction::mutual;
  int chapter = 0;  // version label: effective from this chapter on
};

struct SceneNode {
  std::string id;
  std::string location;
  std::string time_label;
  std::string environment;
  int created_chapter = 0;
};

struct Participation {
  std::string character;
  std::string emotional_impact;
  double impact_intensity = 0.0;  // [-1,1], negative = adverse
};

struct EventNode {
  std::string id;
  int chapter = 0;
  std::string description;
  std::vector<std::string> consequences;
  std::string scene;
  std::vector<Participation> participants;
};

struct StoryMeta {
  std::string title;
  std::string background;
  std::string long_term_goal;
};

// Frozen extents into the append-only stores plus the chapter filter.
struct ChapterSnapshot {
  int chapter = 0;
  std::int64_t created_at = 0;  // epoch ms
  std::size_t n_characters = 0;
  std::size_t n_relationships = 0;
  std::size_t n_events = 0;
  std::size_t n_scenes = 0;
};

struct Violation {
  std::string code;
  std::string subject;
  std::string detail;
};
using ValidationReport = std::vector<Violation>;

// Materialized, immutable copy of the graph as of one snapshot.
struct SnapshotView {
  int chapter = 0;
  std::int64_t created_at = 0;
  StoryMeta meta;
  std::vector<CharacterNode> characters;
  std::vector<RelationshipVersion> relationships;
  std::vector<SceneNode> scenes;
  std::vector<EventNode> events;

  // Canonical serialization; byte-identical across re-reads of the same
  // snapshot regardless of later prototype mutations.
  std::string serialize() const;
};

// What one character is allowed to know as of one snapshot: its own node,
// incident relationship versions, events it participates in (own
// participation detail only; co-participants appear as bare ids), the scenes
// of those events, and the story meta. Nothing else.
struct LimitedView {
  int chapter = 0;
  CharacterNode self;
  StoryMeta meta;
  std::vector<RelationshipVersion> relationships;
  struct VisibleEvent {
    std::string id;
    int chapter = 0;
    std::string description;
    std::vector<std::string> consequences;
    SceneNode scene;
    Participation own;
    std::vector<std::string> co_participants;  // ids only
  };
  std::vector<VisibleEvent> events;
};

class StoryPrototype {
 public:
  StoryPrototype() = default;

  // -1 until snapshot 0 exists.
  int head_chapter() const { return head_; }
  bool empty() const;

  const StoryMeta& meta() const { return meta_; }
  void set_meta(StoryMeta m) { meta_ = std::move(m); }

  std::string add_character(const std::string& name,
                            const std::map<std::string, std::string>& static_attrs,
                            int chapter);
  std::string add_scene(const std::string& location, const std::string& time_label,
                        const std::string& environment, int chapter);
  std::string add_event(int chapter, const std::string& description,
                        const std::vector<std::string>& consequences,
                        const std::vector<Participation>& participants,
                        const std::string& scene_id);
  // Appends a new version for (src,dst,kind); returns its index in the
  // relationship store.
  std::size_t upsert_relationship(const std::string& src, const std::string& dst,
                                  const std::string& kind, double strength,
                                  Direction direction, int chapter);

  ChapterSnapshot snapshot_chapter(int chapter);

  SnapshotView snapshot_view(int chapter) const;
  LimitedView limited_view(const std::string& character_id, int chapter) const;
  std::vector<RelationshipVersion> relationship_history(const std::string& src,
                                                        const std::string& dst) const;
  // Events with chapter in [from_chapter, to_chapter], ordered by
  // (chapter, insertion order).
  std::vector<EventNode> plot_chain(int from_chapter, int to_chapter) const;

  ValidationReport validate() const;

  // Latest version for (src,dst,kind) with version chapter <= chapter.
  std::optional<RelationshipVersion> relationship_at(const std::string& src,
                                                     const std::string& dst,
                                                     const std::string& kind,
                                                     int chapter) const;

  const CharacterNode* find_character(const std::string& id) const;
  const CharacterNode* find_character_by_name(const std::string& name) const;
  const SceneNode* find_scene(const std::string& id) const;
  const EventNode* find_event(const std::string& id) const;
  // Reuses an existing scene when location and time_label match exactly.
  const SceneNode* find_scene_by_place(const std::string& location,
                                       const std::string& time_label) const;

  const std::vector<CharacterNode>& characters() const { return characters_; }
  const std::vector<RelationshipVersion>& relationships() const { return relationships_; }
  const std::vector<SceneNode>& scenes() const { return scenes_; }
  const std::vector<EventNode>& events() const { return events_; }
  const std::vector<ChapterSnapshot>& snapshots() const { return snapshots_; }

  // Whole-document canonical serialization (see cli_store for the on-disk
  // contract). Deterministic: equal prototypes serialize identically.
  std::string serialize() const;
  static StoryPrototype deserialize(const std::string& text);

 private:
  friend struct PrototypeCodec;

  const ChapterSnapshot& snapshot_record(int chapter) const;

  StoryMeta meta_;
  std::vector<CharacterNode> characters_;
  std::vector<RelationshipVersion> relationships_;
  std::vector<SceneNode> scenes_;
  std::vector<EventNode> events_;
  std::vector<ChapterSnapshot> snapshots_;
  int head_ = -1;
  std::uint64_t next_character_ = 1;
  std::uint64_t next_scene_ = 1;
  std::uint64_t next_event_ = 1;
};

bool graph_equal(const StoryPrototype& a, const StoryPrototype& b);

}  // namespace creagentive
