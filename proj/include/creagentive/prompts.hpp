#pragma once

// Prompt templates and reply schemas for every agent role. Template bodies
// use {{name}} placeholders; schemas drive parse_structured and carry the
// reminder text used by the single repair attempt.

#include <string>
#include <vector>

#include "creagentive/structured.hpp"

namespace creagentive::prompts {

// The seven quality dimensions, in reply-key form.
const std::vector<std::string>& score_keys();

PromptTemplate init();
Schema init_schema();

PromptTemplate goal();
Schema goal_schema();

PromptTemplate role();
Schema role_schema();

PromptTemplate scorer();
Schema scorer_schema(const std::vector<std::string>& rule_names);

PromptTemplate exit_check();
Schema exit_schema();

PromptTemplate recall();
Schema recall_schema();

PromptTemplate thread();
Schema thread_schema();

PromptTemplate plan();
Schema plan_schema();

PromptTemplate writer();

PromptTemplate caa();
Schema caa_schema();

PromptTemplate gea();
Schema gea_schema();

}  // namespace creagentive::prompts
