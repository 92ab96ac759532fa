#pragma once

// Prompt templating and tolerant parsing of structured model output.

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "creagentive/errors.hpp"

namespace creagentive {

// Body text with {{name}} placeholders.
struct PromptTemplate {
  std::string name;
  std::string body;

  std::string render(const std::map<std::string, std::string>& bindings) const;
};

// A group of numeric scores living under one object in the reply. Values may
// arrive as numbers or numeric strings; they are normalized to numbers.
struct ScoreSpec {
  std::string at;  // json pointer to the containing object
  std::vector<std::string> keys;
  double lo = 0.0;
  double hi = 10.0;
  bool two_decimals = true;
};

struct Schema {
  std::string name;
  std::vector<std::string> required;  // json pointers that must resolve
  std::vector<ScoreSpec> scores;
  std::string reminder;  // appended to the prompt on the single repair attempt
};

// First balanced object in the text, after peeling any code fence.
std::string extract_object(const std::string& raw);

// Parse + validate + normalize. Throws Unparseable when no object can be
// extracted, SchemaViolation when required keys are missing or scores are out
// of range / over-precise.
nlohmann::ordered_json parse_structured(const std::string& raw, const Schema& schema);

}  // namespace creagentive
