#include "creagentive/prototype.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace creagentive {

using ordered_json = nlohmann::ordered_json;

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::precondition_failed: return "PreconditionFailed";
    case Errc::duplicate_name: return "DuplicateName";
    case Errc::invalid_chapter: return "InvalidChapter";
    case Errc::unknown_character: return "UnknownCharacter";
    case Errc::non_monotone_chapter: return "NonMonotoneChapter";
    case Errc::strength_out_of_range: return "StrengthOutOfRange";
    case Errc::unknown_scene: return "UnknownScene";
    case Errc::empty_participants: return "EmptyParticipants";
    case Errc::out_of_order_snapshot: return "OutOfOrderSnapshot";
    case Errc::invalid_range: return "InvalidRange";
    case Errc::timeout: return "Timeout";
    case Errc::http_status: return "HttpStatus";
    case Errc::script_exhausted: return "ScriptExhausted";
    case Errc::missing_binding: return "MissingBinding";
    case Errc::unparseable: return "Unparseable";
    case Errc::schema_violation: return "SchemaViolation";
    case Errc::no_characters: return "NoCharacters";
    case Errc::non_empty_prototype: return "NonEmptyPrototype";
    case Errc::empty_candidate_set: return "EmptyCandidateSet";
    case Errc::unknown_event_id: return "UnknownEventId";
    case Errc::coverage_gap: return "CoverageGap";
    case Errc::empty_body: return "EmptyBody";
    case Errc::non_contiguous_chapters: return "NonContiguousChapters";
    case Errc::empty_directory: return "EmptyDirectory";
    case Errc::malformed_chapter_filename: return "MalformedChapterFilename";
    case Errc::human_scores_mismatch: return "HumanScoresMismatch";
    case Errc::no_scored_chapters: return "NoScoredChapters";
    case Errc::unsupported_version: return "UnsupportedVersion";
    case Errc::corrupt_document: return "CorruptDocument";
    case Errc::config_mismatch: return "ConfigMismatch";
    case Errc::locked: return "Locked";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

const char* direction_name(Direction d) {
  return d == Direction::directed ? "directed" : "mutual";
}

Direction direction_from(const std::string& name) {
  if (name == "directed") return Direction::directed;
  if (name == "mutual") return Direction::mutual;
  raise(Errc::precondition_failed, "unknown direction: " + name);
}

bool valid_relationship_kind(const std::string& kind) {
  if (kind == "kinship" || kind == "romantic" || kind == "rivalry" ||
      kind == "alliance") {
    return true;
  }
  return kind.size() > 6 && kind.rfind("other:", 0) == 0;
}

bool StoryPrototype::empty() const {
  return characters_.empty() && relationships_.empty() && scenes_.empty() &&
         events_.empty() && snapshots_.empty();
}

std::string StoryPrototype::add_character(
    const std::string& name, const std::map<std::string, std::string>& static_attrs,
    int chapter) {
  if (name.empty()) raise(Errc::precondition_failed, "character name must be non-empty");
  if (chapter < 0 || chapter > head_ + 1) {
    raise(Errc::invalid_chapter,
          "character chapter " + std::to_string(chapter) + " outside [0, head+1]");
  }
  if (find_character_by_name(name) != nullptr) {
    raise(Errc::duplicate_name, "character name already present: " + name);
  }
  CharacterNode node;
  node.id = "c" + std::to_string(next_character_++);
  node.name = name;
  node.static_attrs = static_attrs;
  node.created_chapter = chapter;
  characters_.push_back(std::move(node));
  return characters_.back().id;
}

std::string StoryPrototype::add_scene(const std::string& location,
                                      const std::string& time_label,
                                      const std::string& environment, int chapter) {
  if (location.empty()) raise(Errc::precondition_failed, "scene location must be non-empty");
  if (chapter < 0 || chapter > head_ + 1) {
    raise(Errc::invalid_chapter,
          "scene chapter " + std::to_string(chapter) + " outside [0, head+1]");
  }
  SceneNode node;
  node.id = "s" + std::to_string(next_scene_++);
  node.location = location;
  node.time_label = time_label;
  node.environment = environment;
  node.created_chapter = chapter;
  scenes_.push_back(std::move(node));
  return scenes_.back().id;
}

std::string StoryPrototype::add_event(int chapter, const std::string& description,
                                      const std::vector<std::string>& consequences,
                                      const std::vector<Participation>& participants,
                                      const std::string& scene_id) {
  if (chapter < 0 || chapter > head_ + 1) {
    raise(Errc::invalid_chapter,
          "event chapter " + std::to_string(chapter) + " outside [0, head+1]");
  }
  if (find_scene(scene_id) == nullptr) {
    raise(Errc::unknown_scene, "no such scene: " + scene_id);
  }
  if (participants.empty()) {
    raise(Errc::empty_participants, "event needs at least one participant");
  }
  for (const auto& p : participants) {
    if (find_character(p.character) == nullptr) {
      raise(Errc::unknown_character, "no such character: " + p.character);
    }
    if (p.emotional_impact.empty()) {
      raise(Errc::precondition_failed,
            "emotional_impact must be non-empty for " + p.character);
    }
    if (p.impact_intensity < -1.0 || p.impact_intensity > 1.0) {
      raise(Errc::precondition_failed,
            "impact_intensity outside [-1,1] for " + p.character);
    }
  }
  EventNode node;
  node.id = "e" + std::to_string(next_event_++);
  node.chapter = chapter;
  node.description = description;
  node.consequences = consequences;
  node.scene = scene_id;
  node.participants = participants;
  events_.push_back(std::move(node));
  return events_.back().id;
}

std::size_t StoryPrototype::upsert_relationship(const std::string& src,
                                                const std::string& dst,
                                                const std::string& kind,
                                                double strength, Direction direction,
                                                int chapter) {
  if (find_character(src) == nullptr) raise(Errc::unknown_character, "no such character: " + src);
  if (find_character(dst) == nullptr) raise(Errc::unknown_character, "no such character: " + dst);
  if (src == dst) raise(Errc::precondition_failed, "self relationship disallowed: " + src);
  if (!valid_relationship_kind(kind)) {
    raise(Errc::precondition_failed, "invalid relationship kind: " + kind);
  }
  if (strength < 0.0 || strength > 1.0) {
    raise(Errc::strength_out_of_range, "strength outside [0,1]");
  }
  if (chapter < 0) raise(Errc::non_monotone_chapter, "negative chapter");
  for (auto it = relationships_.rbegin(); it != relationships_.rend(); ++it) {
    if (it->src == src && it->dst == dst && it->kind == kind) {
      if (chapter <= it->chapter) {
        raise(Errc::non_monotone_chapter,
              "version chapter " + std::to_string(chapter) + " not after " +
                  std::to_string(it->chapter) + " for (" + src + "," + dst + "," + kind + ")");
      }
      break;  // versions for a key are appended in order; latest wins
    }
  }
  RelationshipVersion v;
  v.src = src;
  v.dst = dst;
  v.kind = kind;
  v.strength = strength;
  v.direction = direction;
  v.chapter = chapter;
  relationships_.push_back(v);
  return relationships_.size() - 1;
}

ChapterSnapshot StoryPrototype::snapshot_chapter(int chapter) {
  if (chapter != head_ + 1) {
    raise(Errc::out_of_order_snapshot,
          "expected snapshot " + std::to_string(head_ + 1) + ", got " +
              std::to_string(chapter));
  }
  ChapterSnapshot snap;
  snap.chapter = chapter;
  snap.created_at = now_ms();
  snap.n_characters = characters_.size();
  snap.n_relationships = relationships_.size();
  snap.n_events = events_.size();
  snap.n_scenes = scenes_.size();
  snapshots_.push_back(snap);
  head_ = chapter;
  return snap;
}

const ChapterSnapshot& StoryPrototype::snapshot_record(int chapter) const {
  if (chapter < 0 || chapter > head_ ||
      static_cast<std::size_t>(chapter) >= snapshots_.size()) {
    raise(Errc::invalid_chapter, "no snapshot for chapter " + std::to_string(chapter));
  }
  return snapshots_[static_cast<std::size_t>(chapter)];
}

SnapshotView StoryPrototype::snapshot_view(int chapter) const {
  const ChapterSnapshot& snap = snapshot_record(chapter);
  SnapshotView view;
  view.chapter = snap.chapter;
  view.created_at = snap.created_at;
  view.meta = meta_;
  for (std::size_t i = 0; i < snap.n_characters; ++i) {
    if (characters_[i].created_chapter <= chapter) view.characters.push_back(characters_[i]);
  }
  for (std::size_t i = 0; i < snap.n_relationships; ++i) {
    if (relationships_[i].chapter <= chapter) view.relationships.push_back(relationships_[i]);
  }
  for (std::size_t i = 0; i < snap.n_scenes; ++i) {
    if (scenes_[i].created_chapter <= chapter) view.scenes.push_back(scenes_[i]);
  }
  for (std::size_t i = 0; i < snap.n_events; ++i) {
    if (events_[i].chapter <= chapter) view.events.push_back(events_[i]);
  }
  return view;
}

LimitedView StoryPrototype::limited_view(const std::string& character_id,
                                         int chapter) const {
  const CharacterNode* self = find_character(character_id);
  if (self == nullptr) raise(Errc::unknown_character, "no such character: " + character_id);
  const ChapterSnapshot& snap = snapshot_record(chapter);

  bool in_snapshot = false;
  for (std::size_t i = 0; i < snap.n_characters; ++i) {
    if (characters_[i].id == character_id && characters_[i].created_chapter <= chapter) {
      in_snapshot = true;
      break;
    }
  }
  if (!in_snapshot) {
    raise(Errc::unknown_character,
          character_id + " not present in snapshot " + std::to_string(chapter));
  }

  LimitedView view;
  view.chapter = chapter;
  view.self = *self;
  view.meta = meta_;
  for (std::size_t i = 0; i < snap.n_relationships; ++i) {
    const auto& r = relationships_[i];
    if (r.chapter <= chapter && (r.src == character_id || r.dst == character_id)) {
      view.relationships.push_back(r);
    }
  }
  for (std::size_t i = 0; i < snap.n_events; ++i) {
    const auto& e = events_[i];
    if (e.chapter > chapter) continue;
    const Participation* own = nullptr;
    for (const auto& p : e.participants) {
      if (p.character == character_id) {
        own = &p;
        break;
      }
    }
    if (own == nullptr) continue;
    LimitedView::VisibleEvent ve;
    ve.id = e.id;
    ve.chapter = e.chapter;
    ve.description = e.description;
    ve.consequences = e.consequences;
    if (const SceneNode* s = find_scene(e.scene)) ve.scene = *s;
    ve.own = *own;
    for (const auto& p : e.participants) {
      if (p.character != character_id) ve.co_participants.push_back(p.character);
    }
    view.events.push_back(std::move(ve));
  }
  return view;
}

std::vector<RelationshipVersion> StoryPrototype::relationship_history(
    const std::string& src, const std::string& dst) const {
  if (find_character(src) == nullptr) raise(Errc::unknown_character, "no such character: " + src);
  if (find_character(dst) == nullptr) raise(Errc::unknown_character, "no such character: " + dst);
  std::vector<RelationshipVersion> out;
  for (const auto& r : relationships_) {
    if (r.src == src && r.dst == dst) out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.chapter < b.chapter;
  });
  return out;
}

std::vector<EventNode> StoryPrototype::plot_chain(int from_chapter, int to_chapter) const {
  if (from_chapter < 0 || from_chapter > to_chapter || to_chapter > head_) {
    raise(Errc::invalid_range,
          "bad chapter range [" + std::to_string(from_chapter) + "," +
              std::to_string(to_chapter) + "] with head " + std::to_string(head_));
  }
  std::vector<EventNode> out;
  for (const auto& e : events_) {
    if (e.chapter >= from_chapter && e.chapter <= to_chapter) out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.chapter < b.chapter; });
  return out;
}

std::optional<RelationshipVersion> StoryPrototype::relationship_at(
    const std::string& src, const std::string& dst, const std::string& kind,
    int chapter) const {
  std::optional<RelationshipVersion> best;
  for (const auto& r : relationships_) {
    if (r.src == src && r.dst == dst && r.kind == kind && r.chapter <= chapter) {
      if (!best || r.chapter > best->chapter) best = r;
    }
  }
  return best;
}

const CharacterNode* StoryPrototype::find_character(const std::string& id) const {
  for (const auto& c : characters_) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

const CharacterNode* StoryPrototype::find_character_by_name(const std::string& name) const {
  for (const auto& c : characters_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const SceneNode* StoryPrototype::find_scene(const std::string& id) const {
  for (const auto& s : scenes_) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

const EventNode* StoryPrototype::find_event(const std::string& id) const {
  for (const auto& e : events_) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

const SceneNode* StoryPrototype::find_scene_by_place(const std::string& location,
                                                     const std::string& time_label) const {
  for (const auto& s : scenes_) {
    if (s.location == location && s.time_label == time_label) return &s;
  }
  return nullptr;
}

ValidationReport StoryPrototype::validate() const {
  ValidationReport report;
  auto flag = [&report](const std::string& code, const std::string& subject,
                        const std::string& detail) {
    report.push_back({code, subject, detail});
  };

  std::unordered_set<std::string> names;
  for (const auto& c : characters_) {
    if (c.name.empty()) flag("EmptyName", c.id, "character has empty name");
    if (!names.insert(c.name).second) flag("DuplicateName", c.id, "duplicate name " + c.name);
    if (c.created_chapter > head_) {
      flag("CharacterAfterHead", c.id,
           "created at chapter " + std::to_string(c.created_chapter) + " with head " +
               std::to_string(head_));
    }
  }

  std::unordered_map<std::string, int> last_version;
  for (const auto& r : relationships_) {
    const std::string subject = r.src + "->" + r.dst + ":" + r.kind;
    if (find_character(r.src) == nullptr) flag("DanglingRelationship", subject, "unknown src");
    if (find_character(r.dst) == nullptr) flag("DanglingRelationship", subject, "unknown dst");
    if (r.strength < 0.0 || r.strength > 1.0) {
      flag("StrengthOutOfRange", subject, std::to_string(r.strength));
    }
    auto [it, inserted] = last_version.try_emplace(subject, r.chapter);
    if (!inserted) {
      if (r.chapter <= it->second) {
        flag("NonMonotoneVersion", subject,
             "chapter " + std::to_string(r.chapter) + " after " + std::to_string(it->second));
      }
      it->second = r.chapter;
    }
  }

  for (const auto& e : events_) {
    if (find_scene(e.scene) == nullptr) flag("DanglingScene", e.id, "unknown scene " + e.scene);
    if (e.participants.empty()) flag("EmptyParticipants", e.id, "no participants");
    for (const auto& p : e.participants) {
      if (find_character(p.character) == nullptr) {
        flag("DanglingParticipant", e.id, "unknown character " + p.character);
      }
      if (p.impact_intensity < -1.0 || p.impact_intensity > 1.0) {
        flag("IntensityOutOfRange", e.id, p.character);
      }
    }
    if (e.chapter > head_) {
      flag("EventAfterHead", e.id,
           "chapter " + std::to_string(e.chapter) + " with head " + std::to_string(head_));
    }
  }

  if (snapshots_.empty()) {
    if (!empty()) flag("MissingSnapshot", "0", "populated prototype without snapshot 0");
  } else {
    for (std::size_t i = 0; i < snapshots_.size(); ++i) {
      const auto& s = snapshots_[i];
      if (s.chapter != static_cast<int>(i)) {
        flag("MissingSnapshot", std::to_string(i),
             "snapshot chapter " + std::to_string(s.chapter) + " at position " + std::to_string(i));
      }
      if (s.n_characters > characters_.size() || s.n_relationships > relationships_.size() ||
          s.n_events > events_.size() || s.n_scenes > scenes_.size()) {
        flag("CorruptSnapshot", std::to_string(s.chapter), "extent beyond store size");
      }
    }
    if (head_ != snapshots_.back().chapter) {
      flag("HeadMismatch", std::to_string(head_),
           "max snapshot chapter is " + std::to_string(snapshots_.back().chapter));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

struct PrototypeCodec {
  static ordered_json meta_json(const StoryMeta& m) {
    return {{"title", m.title}, {"background", m.background}, {"long_term_goal", m.long_term_goal}};
  }

  static ordered_json character_json(const CharacterNode& c) {
    ordered_json attrs = ordered_json::object();
    for (const auto& [k, v] : c.static_attrs) attrs[k] = v;
    return {{"id", c.id},
            {"name", c.name},
            {"static_attrs", attrs},
            {"created_chapter", c.created_chapter}};
  }

  static ordered_json relationship_json(const RelationshipVersion& r) {
    return {{"src", r.src},         {"dst", r.dst},
            {"kind", r.kind},       {"strength", r.strength},
            {"direction", direction_name(r.direction)}, {"chapter", r.chapter}};
  }

  static ordered_json scene_json(const SceneNode& s) {
    return {{"id", s.id},
            {"location", s.location},
            {"time_label", s.time_label},
            {"environment", s.environment},
            {"created_chapter", s.created_chapter}};
  }

  static ordered_json event_json(const EventNode& e) {
    ordered_json parts = ordered_json::array();
    for (const auto& p : e.participants) {
      parts.push_back({{"character", p.character},
                       {"emotional_impact", p.emotional_impact},
                       {"impact_intensity", p.impact_intensity}});
    }
    return {{"id", e.id},       {"chapter", e.chapter},
            {"description", e.description}, {"consequences", e.consequences},
            {"scene", e.scene}, {"participants", parts}};
  }

  static ordered_json document(const StoryPrototype& p) {
    ordered_json doc;
    doc["format_version"] = 1;
    doc["kind"] = "story_prototype";
    doc["meta"] = meta_json(p.meta_);
    doc["counters"] = {{"character", p.next_character_},
                       {"scene", p.next_scene_},
                       {"event", p.next_event_}};
    doc["characters"] = ordered_json::array();
    for (const auto& c : p.characters_) doc["characters"].push_back(character_json(c));
    doc["relationships"] = ordered_json::array();
    for (const auto& r : p.relationships_) doc["relationships"].push_back(relationship_json(r));
    doc["scenes"] = ordered_json::array();
    for (const auto& s : p.scenes_) doc["scenes"].push_back(scene_json(s));
    doc["events"] = ordered_json::array();
    for (const auto& e : p.events_) doc["events"].push_back(event_json(e));
    doc["snapshots"] = ordered_json::array();
    for (const auto& s : p.snapshots_) {
      doc["snapshots"].push_back({{"chapter", s.chapter},
                                  {"created_at", s.created_at},
                                  {"characters", s.n_characters},
                                  {"relationships", s.n_relationships},
                                  {"events", s.n_events},
                                  {"scenes", s.n_scenes}});
    }
    return doc;
  }

  template <typename T>
  static T field(const ordered_json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) {
      raise(Errc::corrupt_document, "missing field " + path + "/" + key);
    }
    try {
      return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      raise(Errc::corrupt_document, "bad field " + path + "/" + key);
    }
  }

  static StoryPrototype parse(const std::string& text) {
    ordered_json doc;
    try {
      doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::corrupt_document, std::string("not a structured document: ") + e.what());
    }
    if (!doc.is_object()) raise(Errc::corrupt_document, "top level is not an object");
    const int version = field<int>(doc, "", "format_version");
    if (version != 1) {
      throw EngineError(Errc::unsupported_version,
                        "format_version " + std::to_string(version) + " not supported");
    }
    StoryPrototype p;
    const ordered_json& meta = doc.contains("meta") ? doc["meta"] : ordered_json::object();
    p.meta_.title = meta.value("title", "");
    p.meta_.background = meta.value("background", "");
    p.meta_.long_term_goal = meta.value("long_term_goal", "");
    if (doc.contains("counters")) {
      p.next_character_ = field<std::uint64_t>(doc["counters"], "counters", "character");
      p.next_scene_ = field<std::uint64_t>(doc["counters"], "counters", "scene");
      p.next_event_ = field<std::uint64_t>(doc["counters"], "counters", "event");
    }
    for (const auto& j : field<ordered_json>(doc, "", "characters")) {
      CharacterNode c;
      c.id = field<std::string>(j, "characters", "id");
      c.name = field<std::string>(j, "characters", "name");
      if (j.contains("static_attrs")) {
        for (const auto& [k, v] : j["static_attrs"].items()) {
          if (!v.is_string()) raise(Errc::corrupt_document, "bad field characters/static_attrs/" + k);
          c.static_attrs[k] = v.get<std::string>();
        }
      }
      c.created_chapter = field<int>(j, "characters", "created_chapter");
      p.characters_.push_back(std::move(c));
    }
    for (const auto& j : field<ordered_json>(doc, "", "relationships")) {
      RelationshipVersion r;
      r.src = field<std::string>(j, "relationships", "src");
      r.dst = field<std::string>(j, "relationships", "dst");
      r.kind = field<std::string>(j, "relationships", "kind");
      r.strength = field<double>(j, "relationships", "strength");
      r.direction = direction_from(field<std::string>(j, "relationships", "direction"));
      r.chapter = field<int>(j, "relationships", "chapter");
      p.relationships_.push_back(std::move(r));
    }
    for (const auto& j : field<ordered_json>(doc, "", "scenes")) {
      SceneNode s;
      s.id = field<std::string>(j, "scenes", "id");
      s.location = field<std::string>(j, "scenes", "location");
      s.time_label = field<std::string>(j, "scenes", "time_label");
      s.environment = field<std::string>(j, "scenes", "environment");
      s.created_chapter = field<int>(j, "scenes", "created_chapter");
      p.scenes_.push_back(std::move(s));
    }
    for (const auto& j : field<ordered_json>(doc, "", "events")) {
      EventNode e;
      e.id = field<std::string>(j, "events", "id");
      e.chapter = field<int>(j, "events", "chapter");
      e.description = field<std::string>(j, "events", "description");
      for (const auto& c : field<ordered_json>(j, "events", "consequences")) {
        if (!c.is_string()) raise(Errc::corrupt_document, "bad field events/consequences");
        e.consequences.push_back(c.get<std::string>());
      }
      e.scene = field<std::string>(j, "events", "scene");
      for (const auto& pj : field<ordered_json>(j, "events", "participants")) {
        Participation part;
        part.character = field<std::string>(pj, "events/participants", "character");
        part.emotional_impact = field<std::string>(pj, "events/participants", "emotional_impact");
        part.impact_intensity = field<double>(pj, "events/participants", "impact_intensity");
        e.participants.push_back(std::move(part));
      }
      p.events_.push_back(std::move(e));
    }
    for (const auto& j : field<ordered_json>(doc, "", "snapshots")) {
      ChapterSnapshot s;
      s.chapter = field<int>(j, "snapshots", "chapter");
      s.created_at = field<std::int64_t>(j, "snapshots", "created_at");
      s.n_characters = field<std::size_t>(j, "snapshots", "characters");
      s.n_relationships = field<std::size_t>(j, "snapshots", "relationships");
      s.n_events = field<std::size_t>(j, "snapshots", "events");
      s.n_scenes = field<std::size_t>(j, "snapshots", "scenes");
      p.snapshots_.push_back(s);
    }
    p.head_ = p.snapshots_.empty() ? -1 : p.snapshots_.back().chapter;
    return p;
  }
};

std::string SnapshotView::serialize() const {
  ordered_json doc;
  doc["format_version"] = 1;
  doc["kind"] = "snapshot";
  doc["chapter"] = chapter;
  doc["created_at"] = created_at;
  doc["meta"] = PrototypeCodec::meta_json(meta);
  doc["characters"] = ordered_json::array();
  for (const auto& c : characters) doc["characters"].push_back(PrototypeCodec::character_json(c));
  doc["relationships"] = ordered_json::array();
  for (const auto& r : relationships) doc["relationships"].push_back(PrototypeCodec::relationship_json(r));
  doc["scenes"] = ordered_json::array();
  for (const auto& s : scenes) doc["scenes"].push_back(PrototypeCodec::scene_json(s));
  doc["events"] = ordered_json::array();
  for (const auto& e : events) doc["events"].push_back(PrototypeCodec::event_json(e));
  return doc.dump(2) + "\n";
}

std::string StoryPrototype::serialize() const {
  return PrototypeCodec::document(*this).dump(2) + "\n";
}

StoryPrototype StoryPrototype::deserialize(const std::string& text) {
  return PrototypeCodec::parse(text);
}

bool graph_equal(const StoryPrototype& a, const StoryPrototype& b) {
  return a.serialize() == b.serialize();
}

}  // namespace creagentive
