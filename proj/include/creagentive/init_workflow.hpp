#pragma once

// Initialization agent: free-text brief -> structured config -> snapshot 0.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "creagentive/gateway.hpp"
#include "creagentive/prototype.hpp"

namespace creagentive {

struct ConfigCharacter {
  std::string name;
  std::map<std::string, std::string> static_attrs;
};

struct ConfigRelationship {
  std::string src_name;
  std::string dst_name;
  std::string kind;
  std::optional<double> strength;
  Direction direction = Direction::mutual;
};

struct InitialConfig {
  std::string title;
  std::string background;
  std::string environment;
  std::string long_term_goal;
  std::vector<ConfigCharacter> characters;
  std::vector<ConfigRelationship> relationships;
};

// One templated extraction call with the shared single-repair behaviour.
InitialConfig extract_config(const std::string& user_text, Gateway& gateway);

// Deterministic defaults: missing title -> first 6 words of background,
// missing environment -> background copy, missing strength -> 0.5.
// Idempotent.
InitialConfig complete_config(InitialConfig config);

// Inserts everything at chapter 0 and takes snapshot 0.
void materialize(const InitialConfig& config, StoryPrototype& proto);

}  // namespace creagentive
