#pragma once

// Chapter generation loop: goal proposal, limited-cognition role agents,
// relay plot weaving, scoring, atomic commit, exit checks.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "creagentive/gateway.hpp"
#include "creagentive/prototype.hpp"

namespace creagentive {

struct ShortTermGoal {
  std::string id;
  int chapter = 0;
  std::string description;
  std::string rationale;
  std::vector<std::string> involved_characters;  // ids
};

struct SceneDraft {
  std::string location;
  std::string time_label;
  std::string environment;
};

struct EventDraft {
  std::string description;
  std::vector<std::string> consequences;
  std::vector<Participation> participants;  // character fields hold ids
  SceneDraft scene;
};

struct PlotContribution {
  std::string author_character;
  std::string text;
  std::vector<EventDraft> proposed_events;
};

struct PlotCandidate {
  ShortTermGoal goal;
  std::vector<PlotContribution> contributions;
  std::vector<EventDraft> merged_events;  // deduped by (description, scene place)
};

struct ScoreCard {
  int candidate_index = 0;
  std::map<std::string, double> rule_scores;
  double total = 0.0;
};

struct Rule {
  std::string name;
  std::string description;
  double weight = 0.0;
};

struct RuleConfig {
  std::vector<Rule> general_rules;
  std::vector<Rule> story_rules;
};

// Engine defaults when no rule file is given.
RuleConfig default_rules();
// All weights (general + story together) scaled to sum 1. Weights must be
// positive.
RuleConfig normalize_rules(RuleConfig rules);

struct ExitCondition {
  std::string kind;  // llm_judgment | max_chapters | event_count | relationship_reached
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
};

struct RoleAgentHandle {
  std::string character_id;
  std::string name;
  LimitedView view;
};

struct StorygenConfig {
  int goals_per_chapter = 3;
  int plotweave_rounds = 2;
  int max_chapters = 100;  // safety cap, always enforced
  RuleConfig rules;        // normalized at load
  std::vector<ExitCondition> exit_conditions;
  double temperature_creative = 0.8;
  double temperature_judge = 0.1;
};

struct GenerationSummary {
  int chapters_produced = 0;
  std::string exit_reason;
};

std::vector<ShortTermGoal> propose_goals(const StoryPrototype& proto, int chapter, int k,
                                         Gateway& gateway, double temperature = 0.8);

std::vector<RoleAgentHandle> spawn_role_agents(const StoryPrototype& proto, int chapter);

PlotCandidate plotweave(const ShortTermGoal& goal,
                        const std::vector<RoleAgentHandle>& agents, int rounds,
                        Gateway& gateway, double temperature = 0.8);

ScoreCard score_candidate(const PlotCandidate& candidate, int candidate_index,
                          const RuleConfig& rules, Gateway& gateway,
                          const std::string& context, double temperature = 0.1);

std::size_t select_candidate(const std::vector<ScoreCard>& cards);

// Stages on a copy and swaps on success, so a failure anywhere (including one
// injected through the test hook) leaves the prototype untouched.
void commit_plot(StoryPrototype& proto, int chapter, const PlotCandidate& candidate,
                 const std::function<void(const StoryPrototype&)>& fault_hook = {});

struct ExitDecision {
  bool stop = false;
  std::string reason;
};

ExitDecision check_exit_decision(const StoryPrototype& proto,
                                 const std::vector<ExitCondition>& conditions,
                                 int chapter, Gateway& gateway);
bool check_exit(const StoryPrototype& proto, const std::vector<ExitCondition>& conditions,
                int chapter, Gateway& gateway);

// One committed chapter per cycle until an exit condition holds. The callback
// runs after each commit (persistence hook); its exceptions abort the run
// with the prototype left at the last committed snapshot.
GenerationSummary run_story(StoryPrototype& proto, const StorygenConfig& config,
                            Gateway& gateway,
                            const std::function<void(int)>& on_chapter_committed = {});

}  // namespace creagentive
