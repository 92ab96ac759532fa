#include "creagentive/prompts.hpp"

namespace creagentive::prompts {

const std::vector<std::string>& score_keys() {
  static const std::vector<std::string> keys = {"Relevance",  "Coherence",
                                                "Empathy",    "Surprise",
                                                "Creativity", "Complexity",
                                                "Immersion"};
  return keys;
}

PromptTemplate init() {
  return {"init", R"([Role]
You are the story initialization agent. You turn a free-form story brief into the structured configuration a narrative engine can build on.

[Your task]:
Read the user's brief and extract a story configuration: title, background, environment, long-term goal, the starting cast, and their starting relationships. Invent sensible details only where the brief is silent; never contradict it. Every relationship endpoint must name a character from the cast. Relationship kind is one of kinship, romantic, rivalry, alliance, or other:<label>; strength is a real number in [0,1]; direction is "directed" or "mutual".

[Output Format Requirement](you must follow this format strictly, don't add any extra explanation):
{
  "title": "...",
  "background": "...",
  "environment": "...",
  "long_term_goal": "...",
  "characters": [
    {"name": "...", "static_attrs": {"trait": "value"} }
  ],
  "relationships": [
    {"src_name": "...", "dst_name": "...", "kind": "...", "strength": 0.5, "direction": "mutual"}
  ]
}

[User brief]:
{{brief}})"};
}

Schema init_schema() {
  Schema s;
  s.name = "init";
  s.required = {"/background", "/long_term_goal", "/characters"};
  s.reminder =
      "Return only the JSON object with keys title, background, environment, "
      "long_term_goal, characters, relationships.";
  return s;
}

PromptTemplate goal() {
  return {"goal", R"([Role]
You are the short-term goal agent of a story engine. You propose candidate chapter goals that advance the story's long-term goal from its current state.

[Story meta]:
{{meta}}

[Current relationships]:
{{relationships}}

[Recent events]:
{{recent_events}}

[Your task]:
Propose exactly {{k}} distinct candidate short-term goals for chapter {{chapter}}. Each goal must be achievable within one chapter, grounded in the current state, and move the story toward the long-term goal. Name involved characters exactly as given.

[Output Format Requirement](you must follow this format strictly, don't add any extra explanation):
{
  "goals": [
    {"description": "...", "rationale": "...", "involved_characters": ["..."]}
  ]
})"};
}

Schema goal_schema() {
  Schema s;
  s.name = "goal";
  s.required = {"/goals"};
  s.reminder = "Return only the JSON object: {\"goals\": [{\"description\", \"rationale\", \"involved_characters\"}]}.";
  return s;
}

PromptTemplate role() {
  return {"role", R"([Role]
You play one story character in a collaborative plot relay. You know only what your character knows: your own nature, your relationships, the events you took part in, and the shared story background. Do not use knowledge your character cannot have.

[You are]:
{{self}}

[Your relationships]:
{{relationships}}

[Events you remember]:
{{events}}

[Story background]:
{{meta}}

[Short-term goal of this chapter]: {{goal}}

[Relay so far]:
{{relay}}

[Your task]:
Continue the relay in character for chapter {{chapter}}: say what your character does next and propose the concrete events this creates. Every proposed event lists its participants with the emotional impact on each (impact_intensity is a real in [-1,1], negative = adverse) and the scene where it happens. Include yourself among the participants of events you initiate.

[Output Format Requirement](you must follow this format strictly, don't add any extra explanation):
{
  "text": "...",
  "proposed_events": [
    {
      "description": "...",
      "consequences": ["..."],
      "participants": [
        {"character": "...", "emotional_impact": "...", "impact_intensity": 0.0}
      ],
      "scene": {"location": "...", "time_label": "...", "environment": "..."}
    }
  ]
})"};
}

Schema role_schema() {
  Schema s;
  s.name = "role";
  s.required = {"/text", "/proposed_events"};
  s.reminder =
      "Return only the JSON object: {\"text\", \"proposed_events\": ["
      "{\"description\", \"consequences\", \"participants\", \"scene\"}]}.";
  return s;
}

PromptTemplate scorer() {
  return {"scorer", R"([Role]
You are the plot scoring agent. You judge one candidate plot draft against explicit rules, strictly and independently.

[Rules] (score each 0-10, two decimals allowed):
{{rules}}

[Story context]:
{{context}}

[Candidate plot draft]:
{{candidate}}

[Your task]:
Score the candidate on every rule listed above. Score strictly: mediocre performance lands mid-range, and scores above 9 are reserved for flawless handling of that rule.

[Output Format Requirement](you must follow this format strictly, don't add any extra explanation):
{
  "scores": {"<rule name>": 0.0}
})"};
}

Schema scorer_schema(const std::vector<std::string>& rule_names) {
  Schema s;
  s.name = "scorer";
  s.required = {"/scores"};
  s.scores = {{"/scores", rule_names}};
  s.reminder = "Return only the JSON object {\"scores\": {...}} scoring every listed rule.";
  return s;
}

PromptTemplate exit_check() {
  return {"exit", R"([Role]
You are the exit agent of a story engine. You decide whether a stated condition about the story is already satisfied.

[Condition]: {{condition}}

[Story state]:
{{state}}

[Your task]:
Judge strictly from the story state whether the condition holds now. Answer with a boolean and a one-sentence reason.

[Output Format Requirement](you must follow this format strictly, don't add any extra explanation):
{
  "achieved": false,
  "reason": "..."
})"};
}

Schema exit_schema() {
  Schema s;
  s.name = "exit";
  s.required = {"/achieved", "/reason"};
  s.reminder = "Return only the JSON object {\"achieved\": true|false, \"reason\": \"...\"}.";
  return s;
}

PromptTemplate recall() {
  return {"recall", R"([Role]
You are the recall agent of a story engine. Before a chapter is written, you pick which earlier events genuinely matter for it.

[Candidate earlier events]:
{{candidates}}

[Events of the chapter being written]:
{{chapter_events}}

[Your task]:
Select only the candidate events that the chapter {{chapter}} text should echo, and describe the emotional residue each involved character carries. Cite events by their id exactly as listed; never invent ids.

[Output Format Requirement](you must follow this format strictly, don't add any extra explanation):
{
  "relevant_events": [
    {"event": "<event id>", "why_relevant": "..."}
  ],
  "emotional_memory": {"<character id>": "..."}
})"};
}

Schema recall_schema() {
  Schema s;
  s.name = "recall";
  s.required = {"/relevant_events", "/emotional_memory"};
  s.reminder =
      "Return only the JSON object {\"relevant_events\": [{\"event\", \"why_relevant\"}], "
      "\"emotional_memory\": {}} citing only listed event ids.";
  return s;
}

PromptTemplate thread() {
  return {"thread", R"([Role]
You are the thread agent of a story engine. You plant foreshadowing for plots that are planned but not yet written.

[Planned future plots]:
{{planned}}

[Events of the current chapter]:
{{events}}

[Your task]:
For chapter {{chapter}}, propose at most one subtle foreshadowing hint per planned plot. Each hint names the future chapter it points to; target chapters must be strictly greater than {{chapter}} and drawn from the planned list.

[Output Format Requirement](you must follow this format strictly, don't add any extra explanation):
{
  "foreshadowing": [
    {"target_chapter": 0, "hint": "..."}
  ]
})"};
}

Schema thread_schema() {
  Schema s;
  s.name = "thread";
  s.required = {"/foreshadowing"};
  s.reminder = "Return only the JSON object {\"foreshadowing\": [{\"target_chapter\", \"hint\"}]}.";
  return s;
}

PromptTemplate plan() {
  return {"plan", R"([Role]
You are the planning agent of a story engine. You turn a chapter's committed events into an ordered writing plan.

[Committed events of this chapter]:
{{events}}

[Recalled context]:
{{recall_digest}}

[Foreshadowing to weave in]:
{{threads}}

[Genre]: {{genre}}

[Your task]:
Produce an ordered list of narrative beats for chapter {{chapter}}. Every committed event id must be covered by at least one beat; list the ids each beat covers.

[Output Format Requirement](you must follow this format strictly, don't add any extra explanation):
{
  "beats": [
    {"text": "...", "covers": ["<event id>"]}
  ]
})"};
}

Schema plan_schema() {
  Schema s;
  s.name = "plan";
  s.required = {"/beats"};
  s.reminder = "Return only the JSON object {\"beats\": [{\"text\", \"covers\"}]} covering every event id.";
  return s;
}

PromptTemplate writer() {
  return {"writer", R"([Role]
You are the writing agent of a story engine. You turn a chapter plan into finished prose.

[Genre]: {{genre}}
[Style notes]: {{style_notes}}
[Target length]: about {{target_words}} words

[Chapter plan]:
{{plan}}

[Recalled context to honor]:
{{recall_digest}}

[Foreshadowing to plant]:
{{threads}}

[Your task]:
Write the full prose of chapter {{chapter}} in the given genre, following the plan beat by beat. You may open with a single markdown heading line naming the chapter title; after that, output prose only.)"};
}

PromptTemplate caa() {
  return {"caa", R"([Role]
You are a professional literary analysis and story structure evaluation expert, skilled in extracting core plot elements from the text and providing precise scoring based on established literary criteria.

[Your task]:
Based on the provided [surface features of previous chapters] and [full content of this chapter], first extract the surface features of this chapter, and then give partial scores for the seven literary indicators focusing on the content of this chapter.

[Definition of Surface Features]:
1.Unembellished plot summary:
Describe the main characters, locations, events, and event outcomes of this chapter in concise, objective language.
2.Objective conditions at the end of the chapter:
Includes but is not limited to changes in material quantities, character relationship status, geographical location shifts, and task progress.

[Definition of the Seven Literary Indicators] (0-10 points each):
1.Relevance:
Whether the story closely adheres to the given premise and thematic setting.
2.Coherence:
Whether the plot in this chapter is logically consistent, flows naturally, and does not contradict previous chapters.
3.Empathy:
Whether the characters are believable and can evoke emotional resonance in the reader.
4.Surprise:
Whether it contains unexpected plot twists or clever setups.
5.Creativity:
Whether the plot is original and avoids repetition.
6.Complexity:
Whether the plot structure and character relationships are multilayered and contain narrative depth.
7.Immersion:
The degree of detail in the environment and setting, and whether it can immerse the reader.

[Strict Scoring Rules]:
1.Score Precision and Range:
   - The seven indicators allow two decimal places (e.g., 6.25).
   - Scores must accurately reflect the chapter's performance; any "comfort scoring" or deliberate inflation is strictly prohibited.

2.Chapter Content as the Core, Previous Features as Supplement:
   Scoring should be based mainly on the actual content of this chapter, not the overall story or earlier chapters.
   Previous chapters are used only to check logical consistency or relevance, not to boost scores.

3.Treatment of Plain or Ordinary Chapters:
   For chapters lacking significant conflict, twists, emotional portrayal, or novel settings, strictly assign mid-to-low scores.
   Chapters with only minor highlights or small details must not exceed 8.00 in any indicator.

4.Handling of Surprises or Highlights:
   High scores for Surprise, Creativity, and Complexity can only be given when the chapter contains clear and reasonable plot twists, original ideas, or emotional resonance.
   Minor changes, generic tropes, or common plot developments should not be mistaken as highlights.

5.Independent and Objective Scoring:
   Each indicator must be scored independently; do not increase one score because another is high.
   All scores must be based on verifiable facts from the chapter, with no subjective bias.

6.Baseline Scoring:
   - All indicators start at 6 points. If an indicator's performance is mediocre or has obvious flaws, the score should be below 6.
   - A score above 9 indicates world-class mastery in that indicator, with no shortcomings in other aspects.

[Notes]:
1.The plot summary must be concise, objective, and free of embellishment.
2.Scores must be based on the chapter text and known plot context; do not fabricate content.
3.Do not add extra literary commentary; output only in the specified format.

[Output Format Requirement](you must follow this format strictly, don't add any extra explanation):
{
  "Surface Features": {
    "Plot Summary": "...",
    "Current Objective Conditions": "..."
  },
  "Partial Scores": {
    "Relevance": score,
    "Coherence": score,
    "Empathy": score,
    "Surprise": score,
    "Creativity": score,
    "Complexity": score,
    "Immersion": score
  }
}

[surface features of previous chapters]:
{{previous_features}}

[full content of this chapter]:
{{chapter_text}})"};
}

Schema caa_schema() {
  Schema s;
  s.name = "caa";
  s.required = {"/Surface Features/Plot Summary",
                "/Surface Features/Current Objective Conditions"};
  s.scores = {{"/Partial Scores", score_keys()}};
  s.reminder =
      "Return only the JSON object with \"Surface Features\" {\"Plot Summary\", "
      "\"Current Objective Conditions\"} and \"Partial Scores\" holding all seven "
      "indicators as numbers in [0,10] with at most two decimals.";
  return s;
}

PromptTemplate gea() {
  return {"gea", R"([Role]
You are a professional literary work analysis and overall story quality evaluation expert, skilled in providing global scoring and structured summaries based on core elements from multi-chapter plots.

[Your task]:
Based on [surface features of all chapters], and considering the overall story development, provide a global score for the seven indicators and generate a structured story summary.

[Definition of the Seven Literary Indicators] (0-10 points each, allowing half points):
1.Relevance:
Whether the whole book adheres closely to the given premise and thematic setting.
2.Coherence:
The performance of the whole book in plot connection, character development, and logical consistency.
3.Empathy:
Whether the overall story can make readers emotionally resonate with the characters.
4.Surprise: Whether the whole book contains unexpected plot twists or clever setups.
5.Creativity: Whether the whole book demonstrates originality and avoids overused tropes.
6.Complexity:
The multilayered and intertwined nature of the story's plot structure and character relationships.
7.Immersion:
Whether the book's overall world-building and setting are detailed enough to create an immersive experience.

[Scoring Standards]:
1.Score Precision and Limitations:
   The seven indicators allow two decimal places (e.g., 6.25).
   Do not artificially inflate scores; they must reflect the true quality of the work.
   If an indicator is plain, ordinary, or lacks highlights, assign mid-to-low scores (usually in the 3-6 range).
   Scores above 7.0 require solid content-based justification.

2.Use Chapter Surface Features Only:
   - All scores must be strictly based on the provided chapter surface features.
   - Do not assume or reference information not given in the summaries.
   - The overall score must not be significantly increased because of a few standout chapters.

3.Indicator Independence:
   Each indicator must be scored independently; do not raise one score because another is high. For example, if Surprise is low, it should not be raised because Immersion or Creativity is high.

4.Handling Highlights and Flaws:
   Give high scores only for genuinely outstanding plot twists, original concepts, or complex relationships. Penalize for lack of highlights, flat plots. Minor changes, common tropes, or ordinary developments must not be mistaken as highlights.

5.Global Perspective Requirement:
   Consider the work's overall thematic unity, narrative consistency, character development continuity, and structural completeness. Deduct points for plot holes, unreasonable character actions, or contradictions in the setting.

6.Baseline Scoring:
   All indicators start at 6 points. If an indicator is mediocre or has obvious flaws, score it below 6. Scores above 9 indicate exceptional world-class mastery, with no shortcomings in other aspects.

[Notes]:
1.You must base the scoring strictly on the provided chapter surface features.
2.Consider thematic unity, narrative consistency, and structural completeness.
3.Do not output any extra explanation; output only in the specified format.
4.Do not use any markdown characters in your output; follow the exact format.

[Story Summary Content and Structure] (with strict constraints):
You must provide the story summary as a nested JSON object with the following three keys. The content for each key must adhere to the strict constraints described below:

1.  Overall Synopsis:
    -   Constraint: Must be a single, concise sentence. Strictly no more than 40 words.
    -   Content: Summarize the novel's core background, the protagonist, and their fundamental motivations.

2.  Main Characters Status Update:
    -   Constraint: Must list no more than the 3 most critical and currently active characters (protagonist and up to two others). The description for each character must be extremely brief. The entire string for this key should not exceed 100 words.
    -   Content: A string containing the list of these key characters. For each character, include their name, role, and a very brief summary of their current situation. Use "\n" and "\t" for formatting. Focus only on their immediate status and goals; do not include past events or resolved information.

3.  Current Plot Status:
    -   Constraint: Must be a single, concise sentence. Strictly no more than 50 words.
    -   Content: Summarize the main plot's immediate state, highlighting the most direct crisis or cliffhanger at the end of the provided chapters. Do not describe past plot points.

[CRITICAL OUTPUT INSTRUCTIONS]:
- Your entire output MUST be a single, valid, parsable JSON object.
- The value for "Story Summary" MUST be a nested JSON object.
- You MUST strictly adhere to all word count and character count limits specified above. Your response will be rejected if it violates these constraints.
- Within the "Main Characters Status Update" string, all formatting MUST use escape characters ('\n' for newlines, '\t' for tabs).
- Do NOT output any extra explanation or markdown (like ```json) before or after the JSON object.

[Output Format Requirement](you must follow this format strictly, don't add any extra explanation):
{
  "Global Scores": {
    "Relevance": "score",
    "Coherence": "score",
    "Empathy": "score",
    "Surprise": "score",
    "Creativity": "score",
    "Complexity": "score",
    "Immersion": "score"
  },
  "Story Summary": {
    "Overall Synopsis": "...",
    "Main Characters Status Update": "...",
    "Current Plot Status": "..."
  }
}

[surface features of all chapters]:
{{all_features}}

[current interval]:
{{interval_info}})"};
}

Schema gea_schema() {
  Schema s;
  s.name = "gea";
  s.required = {"/Story Summary/Overall Synopsis",
                "/Story Summary/Main Characters Status Update",
                "/Story Summary/Current Plot Status"};
  s.scores = {{"/Global Scores", score_keys()}};
  s.reminder =
      "Return only the JSON object with \"Global Scores\" holding all seven "
      "indicators in [0,10] and the nested \"Story Summary\" object.";
  return s;
}

}  // namespace creagentive::prompts
