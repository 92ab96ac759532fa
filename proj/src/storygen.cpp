#include "creagentive/storygen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "creagentive/prompts.hpp"

namespace creagentive {

namespace {

constexpr std::size_t kEventWindow = 20;  // most recent events shown to agents
constexpr std::size_t kRelationshipWindow = 30;

std::string render_meta(const StoryMeta& m) {
  std::ostringstream out;
  out << "title: " << m.title << "\nbackground: " << m.background
      << "\nlong-term goal: " << m.long_term_goal;
  return out.str();
}

std::string render_relationship(const RelationshipVersion& r) {
  std::ostringstream out;
  out << r.src << " -> " << r.dst << " [" << r.kind << "] strength "
      << r.strength << ", " << direction_name(r.direction) << ", since chapter "
      << r.chapter;
  return out.str();
}

std::string render_relationships(const std::vector<RelationshipVersion>& rels) {
  if (rels.empty()) return "(none)";
  std::ostringstream out;
  std::size_t from = rels.size() > kRelationshipWindow ? rels.size() - kRelationshipWindow : 0;
  for (std::size_t i = from; i < rels.size(); ++i) {
    out << "- " << render_relationship(rels[i]) << "\n";
  }
  return out.str();
}

std::string render_events(const std::vector<EventNode>& events) {
  if (events.empty()) return "(none)";
  std::ostringstream out;
  std::size_t from = events.size() > kEventWindow ? events.size() - kEventWindow : 0;
  for (std::size_t i = from; i < events.size(); ++i) {
    const auto& e = events[i];
    out << "- " << e.id << " (chapter " << e.chapter << "): " << e.description;
    if (!e.consequences.empty()) {
      out << " =>";
      for (const auto& c : e.consequences) out << " " << c << ";";
    }
    out << "\n";
  }
  return out.str();
}

std::string render_limited_events(const LimitedView& view) {
  if (view.events.empty()) return "(none)";
  std::ostringstream out;
  std::size_t from =
      view.events.size() > kEventWindow ? view.events.size() - kEventWindow : 0;
  for (std::size_t i = from; i < view.events.size(); ++i) {
    const auto& e = view.events[i];
    out << "- " << e.id << " (chapter " << e.chapter << ", at " << e.scene.location
        << "): " << e.description << " [impact on you: " << e.own.emotional_impact
        << " (" << e.own.impact_intensity << ")]";
    if (!e.co_participants.empty()) {
      out << " [with:";
      for (const auto& co : e.co_participants) out << " " << co;
      out << "]";
    }
    out << "\n";
  }
  return out.str();
}

std::string render_self(const CharacterNode& c) {
  std::ostringstream out;
  out << c.name << " (" << c.id << ")";
  for (const auto& [k, v] : c.static_attrs) out << "; " << k << ": " << v;
  return out.str();
}

const nlohmann::ordered_json& need(const nlohmann::ordered_json& j, const char* key,
                                   const char* who) {
  if (!j.is_object() || !j.contains(key)) {
    raise(Errc::schema_violation, std::string(who) + ": missing " + key);
  }
  return j.at(key);
}

std::string need_text(const nlohmann::ordered_json& j, const char* key, const char* who) {
  const auto& v = need(j, key, who);
  if (!v.is_string() || v.get<std::string>().empty()) {
    raise(Errc::schema_violation, std::string(who) + ": " + key + " must be non-empty text");
  }
  return v.get<std::string>();
}

std::string opt_text(const nlohmann::ordered_json& j, const char* key, const char* who) {
  if (!j.is_object() || !j.contains(key)) return "";
  if (!j[key].is_string()) {
    raise(Errc::schema_violation, std::string(who) + ": " + key + " must be text");
  }
  return j[key].get<std::string>();
}

}  // namespace

RuleConfig default_rules() {
  RuleConfig cfg;
  cfg.general_rules = {
      {"logical_coherence",
       "The plot is logically consistent with prior chapters and with what each "
       "character can know.",
       0.4},
      {"dramatic_quality", "The plot creates tension, stakes, or emotional movement.", 0.3},
      {"character_motivation_consistency",
       "Actions follow believably from each character's motivations and relationships.",
       0.3},
  };
  return cfg;
}

RuleConfig normalize_rules(RuleConfig rules) {
  double sum = 0.0;
  for (const auto* list : {&rules.general_rules, &rules.story_rules}) {
    for (const auto& r : *list) {
      if (r.weight <= 0.0) {
        raise(Errc::precondition_failed, "rule " + r.name + " has non-positive weight");
      }
      sum += r.weight;
    }
  }
  if (sum <= 0.0) raise(Errc::precondition_failed, "rule config has no rules");
  for (auto* list : {&rules.general_rules, &rules.story_rules}) {
    for (auto& r : *list) r.weight /= sum;
  }
  return rules;
}

std::vector<ShortTermGoal> propose_goals(const StoryPrototype& proto, int chapter, int k,
                                         Gateway& gateway, double temperature) {
  if (k <= 0) raise(Errc::precondition_failed, "k must be positive");
  SnapshotView view = proto.snapshot_view(chapter - 1);

  ChatRequest req;
  req.user = prompts::goal().render({{"meta", render_meta(view.meta)},
                                     {"relationships", render_relationships(view.relationships)},
                                     {"recent_events", render_events(view.events)},
                                     {"k", std::to_string(k)},
                                     {"chapter", std::to_string(chapter)}});
  req.temperature = temperature;
  req.max_tokens = 2048;
  req.tag = "goal";

  std::map<std::string, std::string> resolve;  // name/id -> id
  for (const auto& c : view.characters) {
    resolve[c.id] = c.id;
    resolve[c.name] = c.id;
  }

  std::vector<ShortTermGoal> goals;
  gateway.complete_structured(req, prompts::goal_schema(), [&](const nlohmann::ordered_json& doc) {
    goals.clear();
    const auto& arr = doc.at("goals");
    if (!arr.is_array() || static_cast<int>(arr.size()) != k) {
      raise(Errc::schema_violation,
            "goal: expected exactly " + std::to_string(k) + " goals, got " +
                std::to_string(arr.size()));
    }
    int i = 0;
    for (const auto& j : arr) {
      ShortTermGoal g;
      g.id = "g" + std::to_string(chapter) + "_" + std::to_string(i);
      g.chapter = chapter;
      g.description = need_text(j, "description", "goal");
      g.rationale = opt_text(j, "rationale", "goal");
      if (j.contains("involved_characters")) {
        if (!j["involved_characters"].is_array()) {
          raise(Errc::schema_violation, "goal: involved_characters must be an array");
        }
        for (const auto& name : j["involved_characters"]) {
          if (!name.is_string() || resolve.find(name.get<std::string>()) == resolve.end()) {
            raise(Errc::schema_violation,
                  "goal: involved character not present in snapshot: " + name.dump());
          }
          g.involved_characters.push_back(resolve.at(name.get<std::string>()));
        }
      }
      goals.push_back(std::move(g));
      ++i;
    }
  });
  return goals;
}

std::vector<RoleAgentHandle> spawn_role_agents(const StoryPrototype& proto, int chapter) {
  SnapshotView view = proto.snapshot_view(chapter - 1);
  std::vector<RoleAgentHandle> handles;
  handles.reserve(view.characters.size());
  for (const auto& c : view.characters) {
    handles.push_back({c.id, c.name, proto.limited_view(c.id, chapter - 1)});
  }
  return handles;
}

PlotCandidate plotweave(const ShortTermGoal& goal,
                        const std::vector<RoleAgentHandle>& agents, int rounds,
                        Gateway& gateway, double temperature) {
  if (agents.empty()) raise(Errc::precondition_failed, "plotweave needs at least one agent");
  if (rounds <= 0) raise(Errc::precondition_failed, "rounds must be positive");

  std::map<std::string, std::string> resolve;  // name/id -> id
  for (const auto& a : agents) {
    resolve[a.character_id] = a.character_id;
    resolve[a.name] = a.character_id;
  }

  PlotCandidate candidate;
  candidate.goal = goal;

  for (int round = 0; round < rounds; ++round) {
    for (const auto& agent : agents) {
      std::ostringstream relay;
      for (const auto& c : candidate.contributions) {
        relay << c.author_character << ": " << c.text << "\n";
      }
      ChatRequest req;
      req.user = prompts::role().render(
          {{"self", render_self(agent.view.self)},
           {"relationships", render_relationships(agent.view.relationships)},
           {"events", render_limited_events(agent.view)},
           {"meta", render_meta(agent.view.meta)},
           {"goal", goal.description},
           {"relay", candidate.contributions.empty() ? "(you start)" : relay.str()},
           {"chapter", std::to_string(goal.chapter)}});
      req.temperature = temperature;
      req.max_tokens = 4096;
      req.tag = "role:" + agent.character_id;

      PlotContribution contribution;
      contribution.author_character = agent.character_id;
      gateway.complete_structured(req, prompts::role_schema(), [&](const nlohmann::ordered_json& doc) {
        contribution.text = need_text(doc, "text", "role");
        contribution.proposed_events.clear();
        const auto& events = doc.at("proposed_events");
        if (!events.is_array()) {
          raise(Errc::schema_violation, "role: proposed_events must be an array");
        }
        for (const auto& ej : events) {
          EventDraft draft;
          draft.description = need_text(ej, "description", "role");
          if (ej.contains("consequences")) {
            if (!ej["consequences"].is_array()) {
              raise(Errc::schema_violation, "role: consequences must be an array");
            }
            for (const auto& c : ej["consequences"]) {
              if (!c.is_string()) {
                raise(Errc::schema_violation, "role: consequences must be text");
              }
              draft.consequences.push_back(c.get<std::string>());
            }
          }
          const auto& parts = need(ej, "participants", "role");
          if (!parts.is_array() || parts.empty()) {
            raise(Errc::schema_violation, "role: participants must be a non-empty array");
          }
          bool author_present = false;
          for (const auto& pj : parts) {
            Participation p;
            const std::string who = need_text(pj, "character", "role");
            auto it = resolve.find(who);
            if (it == resolve.end()) {
              raise(Errc::schema_violation, "role: unknown participant " + who);
            }
            p.character = it->second;
            p.emotional_impact = need_text(pj, "emotional_impact", "role");
            const auto& intensity = need(pj, "impact_intensity", "role");
            if (!intensity.is_number()) {
              raise(Errc::schema_violation, "role: impact_intensity must be a number");
            }
            p.impact_intensity = intensity.get<double>();
            if (p.impact_intensity < -1.0 || p.impact_intensity > 1.0) {
              raise(Errc::schema_violation, "role: impact_intensity outside [-1,1]");
            }
            author_present |= p.character == agent.character_id;
            draft.participants.push_back(std::move(p));
          }
          if (!author_present) {
            raise(Errc::schema_violation,
                  "role: author " + agent.character_id + " missing from participants");
          }
          const auto& scene = need(ej, "scene", "role");
          draft.scene.location = need_text(scene, "location", "role");
          draft.scene.time_label = opt_text(scene, "time_label", "role");
          draft.scene.environment = opt_text(scene, "environment", "role");
          contribution.proposed_events.push_back(std::move(draft));
        }
      });
      candidate.contributions.push_back(std::move(contribution));
    }
  }

  std::vector<std::string> seen;
  for (const auto& c : candidate.contributions) {
    for (const auto& e : c.proposed_events) {
      std::string key = e.description + "\x1f" + e.scene.location + "\x1f" + e.scene.time_label;
      if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
      seen.push_back(std::move(key));
      candidate.merged_events.push_back(e);
    }
  }
  return candidate;
}

ScoreCard score_candidate(const PlotCandidate& candidate, int candidate_index,
                          const RuleConfig& rules, Gateway& gateway,
                          const std::string& context, double temperature) {
  std::vector<const Rule*> all;
  for (const auto& r : rules.general_rules) all.push_back(&r);
  for (const auto& r : rules.story_rules) all.push_back(&r);
  if (all.empty()) raise(Errc::precondition_failed, "no scoring rules configured");

  std::ostringstream rules_text;
  std::vector<std::string> names;
  for (const auto* r : all) {
    rules_text << "- " << r->name << " (weight " << r->weight << "): " << r->description
               << "\n";
    names.push_back(r->name);
  }

  std::ostringstream body;
  body << "goal: " << candidate.goal.description << "\n";
  for (const auto& c : candidate.contributions) {
    body << c.author_character << ": " << c.text << "\n";
  }
  body << "events:\n";
  for (const auto& e : candidate.merged_events) {
    body << "- " << e.description << " @ " << e.scene.location;
    if (!e.scene.time_label.empty()) body << ", " << e.scene.time_label;
    body << "\n";
  }

  ChatRequest req;
  req.user = prompts::scorer().render(
      {{"rules", rules_text.str()}, {"context", context}, {"candidate", body.str()}});
  req.temperature = temperature;
  req.max_tokens = 1024;
  req.tag = "scorer";

  auto doc = gateway.complete_structured(req, prompts::scorer_schema(names));
  ScoreCard card;
  card.candidate_index = candidate_index;
  for (const auto* r : all) {
    double score = doc["scores"][r->name].get<double>();
    card.rule_scores[r->name] = score;
    card.total += r->weight * score;
  }
  return card;
}

std::size_t select_candidate(const std::vector<ScoreCard>& cards) {
  if (cards.empty()) raise(Errc::empty_candidate_set, "no candidates to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < cards.size(); ++i) {
    if (cards[i].total > cards[best].total) best = i;
  }
  return best;
}

void commit_plot(StoryPrototype& proto, int chapter, const PlotCandidate& candidate,
                 const std::function<void(const StoryPrototype&)>& fault_hook) {
  if (chapter != proto.head_chapter() + 1) {
    raise(Errc::out_of_order_snapshot,
          "commit for chapter " + std::to_string(chapter) + " but head is " +
              std::to_string(proto.head_chapter()));
  }
  StoryPrototype staged = proto;

  for (const auto& draft : candidate.merged_events) {
    const SceneNode* scene = staged.find_scene_by_place(draft.scene.location,
                                                        draft.scene.time_label);
    std::string scene_id = scene != nullptr
                               ? scene->id
                               : staged.add_scene(draft.scene.location, draft.scene.time_label,
                                                  draft.scene.environment, chapter);
    staged.add_event(chapter, draft.description, draft.consequences, draft.participants,
                     scene_id);
    if (fault_hook) fault_hook(staged);
  }

  // Each event nudges the relationship between every pair of its
  // participants; one new version per pair per chapter.
  auto index_of = [&staged](const std::string& id) {
    const auto& chars = staged.characters();
    for (std::size_t i = 0; i < chars.size(); ++i) {
      if (chars[i].id == id) return i;
    }
    return chars.size();
  };
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> pair_pulls;
  for (const auto& draft : candidate.merged_events) {
    for (std::size_t i = 0; i < draft.participants.size(); ++i) {
      for (std::size_t j = i + 1; j < draft.participants.size(); ++j) {
        std::size_t a = index_of(draft.participants[i].character);
        std::size_t b = index_of(draft.participants[j].character);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        double mean = (draft.participants[i].impact_intensity +
                       draft.participants[j].impact_intensity) /
                      2.0;
        pair_pulls[{a, b}].push_back(mean);
      }
    }
  }
  for (const auto& [pair, pulls] : pair_pulls) {
    const std::string a = staged.characters()[pair.first].id;
    const std::string b = staged.characters()[pair.second].id;
    double mean = 0.0;
    for (double v : pulls) mean += v;
    mean /= static_cast<double>(pulls.size());

    const RelationshipVersion* latest = nullptr;
    for (const auto& r : staged.relationships()) {
      bool match = (r.src == a && r.dst == b) || (r.src == b && r.dst == a);
      if (match && (latest == nullptr || r.chapter >= latest->chapter)) latest = &r;
    }
    auto clamp01 = [](double v) { return std::min(1.0, std::max(0.0, v)); };
    if (latest != nullptr) {
      staged.upsert_relationship(latest->src, latest->dst, latest->kind,
                                 clamp01(latest->strength + 0.1 * mean),
                                 latest->direction, chapter);
    } else {
      staged.upsert_relationship(a, b, "other:acquaintance", clamp01(0.3 + 0.1 * mean),
                                 Direction::mutual, chapter);
    }
    if (fault_hook) fault_hook(staged);
  }

  staged.snapshot_chapter(chapter);
  proto = std::move(staged);
}

ExitDecision check_exit_decision(const StoryPrototype& proto,
                                 const std::vector<ExitCondition>& conditions,
                                 int chapter, Gateway& gateway) {
  if (chapter > proto.head_chapter()) {
    raise(Errc::precondition_failed, "exit check before snapshot " + std::to_string(chapter));
  }
  for (const auto& c : conditions) {
    if (c.kind == "max_chapters") {
      if (!c.params.contains("value") || !c.params["value"].is_number_integer()) {
        raise(Errc::precondition_failed, "max_chapters needs an integer value");
      }
      if (chapter >= c.params["value"].get<int>()) return {true, "max_chapters"};
    } else if (c.kind == "event_count") {
      if (!c.params.contains("value") || !c.params["value"].is_number_integer()) {
        raise(Errc::precondition_failed, "event_count needs an integer value");
      }
      if (proto.events().size() >= c.params["value"].get<std::size_t>()) {
        return {true, "event_count"};
      }
    } else if (c.kind == "relationship_reached") {
      for (const char* key : {"src", "dst", "kind"}) {
        if (!c.params.contains(key) || !c.params[key].is_string()) {
          raise(Errc::precondition_failed,
                std::string("relationship_reached needs ") + key);
        }
      }
      auto at = proto.relationship_at(c.params["src"].get<std::string>(),
                                      c.params["dst"].get<std::string>(),
                                      c.params["kind"].get<std::string>(), chapter);
      double min_strength = 1.0;
      if (c.params.contains("min_strength") && c.params["min_strength"].is_number()) {
        min_strength = c.params["min_strength"].get<double>();
      }
      if (at && at->strength >= min_strength) return {true, "relationship_reached"};
    } else if (c.kind != "llm_judgment") {
      raise(Errc::precondition_failed, "unknown exit condition kind " + c.kind);
    }
  }
  for (const auto& c : conditions) {
    if (c.kind != "llm_judgment") continue;
    SnapshotView view = proto.snapshot_view(chapter);
    std::string condition = "The long-term goal is achieved: " + view.meta.long_term_goal;
    if (c.params.is_object() && c.params.contains("condition") &&
        c.params["condition"].is_string()) {
      condition = c.params["condition"].get<std::string>();
    }
    std::ostringstream state;
    state << render_meta(view.meta) << "\nrelationships:\n"
          << render_relationships(view.relationships) << "events:\n"
          << render_events(view.events);
    ChatRequest req;
    req.user = prompts::exit_check().render({{"condition", condition}, {"state", state.str()}});
    req.temperature = 0.1;
    req.max_tokens = 512;
    req.tag = "exit";

    bool achieved = false;
    std::string reason;
    try {
      gateway.complete_structured(req, prompts::exit_schema(), [&](const nlohmann::ordered_json& doc) {
        const auto& flag = doc.at("achieved");
        if (flag.is_boolean()) {
          achieved = flag.get<bool>();
        } else if (flag.is_string() &&
                   (flag.get<std::string>() == "true" || flag.get<std::string>() == "false")) {
          achieved = flag.get<std::string>() == "true";
        } else {
          raise(Errc::schema_violation, "exit: achieved must be a boolean");
        }
        reason = opt_text(doc, "reason", "exit");
      });
    } catch (const EngineError& e) {
      if (e.code() != Errc::unparseable && e.code() != Errc::schema_violation) throw;
      gateway.log().note("warning", std::string("exit judgment unusable, continuing: ") + e.what());
      continue;
    }
    if (achieved) return {true, "llm_judgment: " + reason};
  }
  return {false, ""};
}

bool check_exit(const StoryPrototype& proto, const std::vector<ExitCondition>& conditions,
                int chapter, Gateway& gateway) {
  return check_exit_decision(proto, conditions, chapter, gateway).stop;
}

GenerationSummary run_story(StoryPrototype& proto, const StorygenConfig& config,
                            Gateway& gateway,
                            const std::function<void(int)>& on_chapter_committed) {
  if (proto.head_chapter() < 0) {
    raise(Errc::precondition_failed, "prototype not initialized (no snapshot 0)");
  }
  std::vector<ExitCondition> conditions = config.exit_conditions;
  bool has_cap = false;
  for (const auto& c : conditions) has_cap |= c.kind == "max_chapters";
  if (!has_cap) {
    ExitCondition cap;
    cap.kind = "max_chapters";
    cap.params["value"] = config.max_chapters;
    conditions.push_back(std::move(cap));
  }
  RuleConfig rules = config.rules;
  if (rules.general_rules.empty() && rules.story_rules.empty()) rules = default_rules();
  rules = normalize_rules(std::move(rules));

  GenerationSummary summary;
  while (true) {
    const int chapter = proto.head_chapter() + 1;
    gateway.log().set_chapter(chapter);

    auto goals = propose_goals(proto, chapter, config.goals_per_chapter, gateway,
                               config.temperature_creative);
    auto agents = spawn_role_agents(proto, chapter);
    const std::string context = render_meta(proto.meta());

    std::vector<PlotCandidate> candidates;
    std::vector<ScoreCard> cards;
    for (std::size_t i = 0; i < goals.size(); ++i) {
      candidates.push_back(plotweave(goals[i], agents, config.plotweave_rounds, gateway,
                                     config.temperature_creative));
      cards.push_back(score_candidate(candidates.back(), static_cast<int>(i), rules,
                                      gateway, context, config.temperature_judge));
    }
    std::size_t pick = select_candidate(cards);
    commit_plot(proto, chapter, candidates[pick]);
    ++summary.chapters_produced;
    if (on_chapter_committed) on_chapter_committed(chapter);

    ExitDecision decision = check_exit_decision(proto, conditions, chapter, gateway);
    if (decision.stop) {
      summary.exit_reason = decision.reason;
      break;
    }
  }
  return summary;
}

}  // namespace creagentive
