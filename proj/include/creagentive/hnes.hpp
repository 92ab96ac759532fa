#pragma once

// Hierarchical narrative evaluation: a chapter analysis agent scores every
// chapter locally while accumulating surface features, a global evaluation
// agent rescores each interval from those features alone, and the closed-form
// quality/length scores fold everything into one number.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "creagentive/gateway.hpp"

namespace creagentive {

// Indicator names, fixed order: Relevance, Coherence, Empathy, Surprise,
// Creativity, Complexity, Immersion.
const std::vector<std::string>& dim_names();

// AHP constants; sum to 1.
const std::map<std::string, double>& dim_weights();

struct QualityDims {
  std::map<std::string, double> by_name;  // exactly the seven indicators
};

struct SurfaceFeatures {
  std::string plot_summary;
  std::string objective_conditions;
};

struct ChapterRecord {
  int index = 0;
  SurfaceFeatures features;
  QualityDims partial;
  bool scored = false;  // false when the judge reply stayed unusable
};

struct IntervalInfo {
  std::string overall_synopsis;   // <= 40 words
  std::string character_status;   // <= 100 words
  std::string plot_status;        // <= 50 words
};

struct IntervalResult {
  int end_index = 0;
  QualityDims global;
  IntervalInfo summary;
};

struct EvalState {
  std::vector<ChapterRecord> records;
  std::vector<IntervalResult> interval_results;  // end indices strictly increase
  IntervalInfo interval_info;                    // latest rolling summary
};

struct LengthInputs {
  std::size_t words = 0;     // L_w
  std::size_t chapters = 0;  // L_c
  int c_baseline = 10;
};

struct EvalReport {
  QualityDims auto_scores;            // A_d
  std::optional<QualityDims> human;   // H_d, mean across raters
  QualityDims combined;               // V_d
  double s_q = 0.0;
  double s_l = 0.0;
  double qls = 0.0;
  bool auto_only = true;
  std::vector<int> interval_ends;     // evaluation schedule that was used
  LengthInputs length;
  std::string report_path;
};

// One local-analysis call: prior surface features + this chapter's full text.
// An unusable reply (after the single repair) yields an unscored record and a
// logged warning instead of aborting the run.
ChapterRecord analyze_chapter(EvalState& state, int index, const std::string& chapter_text,
                              Gateway& gateway);

// One global call over all accumulated surface features and the rolling
// summary. Returns nothing when the reply stayed unusable (interval skipped
// with a warning). Over-limit summary fields are truncated with a warning.
std::optional<IntervalResult> evaluate_interval(EvalState& state, Gateway& gateway);

// Local weight for chapter `index` of `total`: 0.8 inside the first
// ceil(10%) of chapters, 0.5 after.
double weight_for_chapter(int index, int total);

// Per dimension: each interval blends the mean of its local partial scores
// with its global score using the mean local weight over the interval's
// chapters; A_d is the mean of the blended values across intervals.
QualityDims aggregate_dimension_scores(const EvalState& state, int total);

// V_d = (A_d + H_d) / 2 per dimension.
QualityDims combine_auto_human(const QualityDims& a, const QualityDims& h);

double quality_score(const QualityDims& v, const std::map<std::string, double>& weights);
double quality_score(const QualityDims& v);

// S_l = ((ln(1 + L_w/1000)) + min(1, L_c/C_baseline)) / 2
double length_score(const LengthInputs& inputs);

// Overall S_q is the mean of the human and auto variants when both exist.
double qls(std::optional<double> s_q_human, double s_q_auto, double s_l);

// Full pipeline over a chapter directory: load chapter_<n>.<md|txt> files
// (numeric order, optional [start_idx, end_idx] slice; 0 = open end), run the
// local agent per chapter and the global agent every `interval` chapters plus
// a final flush, aggregate, merge optional human scores, compute S_q/S_l/QLS,
// and persist the report next to the directory.
EvalReport run_hnes(const std::string& chap_dir, int interval, int start_idx, int end_idx,
                    int c_baseline, const std::string& human_scores_file, Gateway& gateway);

}  // namespace creagentive
