#include "creagentive/hnes.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <regex>
#include <sstream>

#include "creagentive/fsutil.hpp"
#include "creagentive/prompts.hpp"
#include "creagentive/structured.hpp"

namespace fs = std::filesystem;

namespace creagentive {

namespace {

std::size_t count_words(const std::string& text) {
  std::istringstream in(text);
  std::string token;
  std::size_t n = 0;
  while (in >> token) ++n;
  return n;
}

// Keeps the first `limit` whitespace-separated words.
std::string first_words(const std::string& text, std::size_t limit) {
  std::istringstream in(text);
  std::string token, out;
  std::size_t n = 0;
  while (n < limit && in >> token) {
    if (n > 0) out += ' ';
    out += token;
    ++n;
  }
  return out;
}

std::string need_text(const nlohmann::ordered_json& obj, const std::string& key,
                      const std::string& who) {
  if (!obj.contains(key) || !obj.at(key).is_string()) {
    raise(Errc::schema_violation, who + ": field " + key + " must be text");
  }
  return obj.at(key).get<std::string>();
}

QualityDims dims_from(const nlohmann::ordered_json& block) {
  QualityDims d;
  for (const auto& name : dim_names()) {
    d.by_name[name] = block.at(name).get<double>();
  }
  return d;
}

std::string render_features(const std::vector<ChapterRecord>& records) {
  std::string out;
  for (const auto& rec : records) {
    if (!rec.scored) continue;
    out += "Chapter " + std::to_string(rec.index) + ":\n";
    out += "  Plot Summary: " + rec.features.plot_summary + "\n";
    out += "  Current Objective Conditions: " + rec.features.objective_conditions + "\n";
  }
  if (out.empty()) return "(none)";
  return out;
}

std::string render_interval_info(const IntervalInfo& info) {
  if (info.overall_synopsis.empty() && info.character_status.empty() &&
      info.plot_status.empty()) {
    return "(none)";
  }
  std::string out;
  out += "Overall Synopsis: " + info.overall_synopsis + "\n";
  out += "Main Characters Status Update: " + info.character_status + "\n";
  out += "Current Plot Status: " + info.plot_status;
  return out;
}

bool repairable_judge_error(Errc code) {
  return code == Errc::unparseable || code == Errc::schema_violation;
}

// Ingests one summary field, truncating to the word limit with a warning.
std::string ingest_limited(const std::string& text, std::size_t limit,
                           const std::string& label, TranscriptLog& log) {
  if (count_words(text) <= limit) return text;
  log.note("warning", "interval summary field " + label + " exceeds " +
                          std::to_string(limit) + " words, truncated");
  return first_words(text, limit);
}

}  // namespace

const std::vector<std::string>& dim_names() { return prompts::score_keys(); }

const std::map<std::string, double>& dim_weights() {
  static const std::map<std::string, double> weights = {
      {"Relevance", 0.10}, {"Coherence", 0.20},  {"Empathy", 0.15},
      {"Surprise", 0.10},  {"Creativity", 0.20}, {"Complexity", 0.10},
      {"Immersion", 0.15},
  };
  return weights;
}

ChapterRecord analyze_chapter(EvalState& state, int index, const std::string& chapter_text,
                              Gateway& gateway) {
  if (chapter_text.empty()) {
    raise(Errc::precondition_failed, "chapter text is empty");
  }
  for (const auto& rec : state.records) {
    if (rec.index == index) {
      raise(Errc::precondition_failed,
            "chapter " + std::to_string(index) + " already analyzed");
    }
  }

  ChatRequest req;
  req.user = prompts::caa().render({{"previous_features", render_features(state.records)},
                                    {"chapter_text", chapter_text}});
  req.temperature = 0.1;
  req.max_tokens = 2048;
  req.tag = "caa";

  ChapterRecord rec;
  rec.index = index;
  try {
    auto doc = gateway.complete_structured(
        req, prompts::caa_schema(), [](const nlohmann::ordered_json& j) {
          const auto& sf = j.at("Surface Features");
          if (need_text(sf, "Plot Summary", "caa").empty() ||
              need_text(sf, "Current Objective Conditions", "caa").empty()) {
            raise(Errc::schema_violation, "caa: surface features must be non-empty");
          }
        });
    const auto& sf = doc.at("Surface Features");
    rec.features.plot_summary = sf.at("Plot Summary").get<std::string>();
    rec.features.objective_conditions =
        sf.at("Current Objective Conditions").get<std::string>();
    rec.partial = dims_from(doc.at("Partial Scores"));
    rec.scored = true;
  } catch (const EngineError& e) {
    if (!repairable_judge_error(e.code())) throw;
    gateway.log().note("warning", "chapter " + std::to_string(index) +
                                      " left unscored: " + e.what());
  }
  state.records.push_back(rec);
  return rec;
}

std::optional<IntervalResult> evaluate_interval(EvalState& state, Gateway& gateway) {
  if (state.records.empty()) {
    raise(Errc::precondition_failed, "no chapters analyzed yet");
  }
  const int end_index = state.records.back().index;
  if (!state.interval_results.empty() &&
      state.interval_results.back().end_index >= end_index) {
    raise(Errc::precondition_failed, "no new chapters since the last interval");
  }

  ChatRequest req;
  req.user = prompts::gea().render({{"all_features", render_features(state.records)},
                                    {"interval_info", render_interval_info(state.interval_info)}});
  req.temperature = 0.1;
  req.max_tokens = 2048;
  req.tag = "gea";

  nlohmann::ordered_json doc;
  try {
    doc = gateway.complete_structured(
        req, prompts::gea_schema(), [](const nlohmann::ordered_json& j) {
          const auto& ss = j.at("Story Summary");
          need_text(ss, "Overall Synopsis", "gea");
          need_text(ss, "Main Characters Status Update", "gea");
          need_text(ss, "Current Plot Status", "gea");
        });
  } catch (const EngineError& e) {
    if (!repairable_judge_error(e.code())) throw;
    gateway.log().note("warning", "interval evaluation through chapter " +
                                      std::to_string(end_index) + " skipped: " + e.what());
    return std::nullopt;
  }

  IntervalResult result;
  result.end_index = end_index;
  result.global = dims_from(doc.at("Global Scores"));
  const auto& ss = doc.at("Story Summary");
  auto& log = gateway.log();
  result.summary.overall_synopsis =
      ingest_limited(ss.at("Overall Synopsis").get<std::string>(), 40, "overall synopsis", log);
  result.summary.character_status = ingest_limited(
      ss.at("Main Characters Status Update").get<std::string>(), 100, "character status", log);
  result.summary.plot_status =
      ingest_limited(ss.at("Current Plot Status").get<std::string>(), 50, "plot status", log);

  state.interval_results.push_back(result);
  state.interval_info = result.summary;
  return result;
}

double weight_for_chapter(int index, int total) {
  if (total < 1 || index < 1 || index > total) {
    raise(Errc::precondition_failed, "chapter index " + std::to_string(index) +
                                         " outside 1.." + std::to_string(total));
  }
  const int cutoff = (total + 9) / 10;  // ceil(total / 10)
  return index <= cutoff ? 0.8 : 0.5;
}

QualityDims aggregate_dimension_scores(const EvalState& state, int total) {
  std::size_t scored = 0;
  for (const auto& rec : state.records) {
    if (rec.scored) ++scored;
  }
  if (scored == 0) {
    raise(Errc::no_scored_chapters, "every chapter analysis was unusable");
  }
  if (state.interval_results.empty()) {
    raise(Errc::precondition_failed, "no interval results to aggregate");
  }
  if (static_cast<int>(state.records.size()) > total) {
    raise(Errc::precondition_failed, "total smaller than the number of records");
  }

  // Local weights are positional: the Nth analyzed chapter counts as chapter
  // N of `total`, so sliced runs keep a well-defined early-story boost.
  std::map<int, int> position;
  for (std::size_t i = 0; i < state.records.size(); ++i) {
    position[state.records[i].index] = static_cast<int>(i) + 1;
  }

  QualityDims acc;
  for (const auto& name : dim_names()) acc.by_name[name] = 0.0;

  int prev_end = state.records.front().index - 1;
  for (const auto& interval : state.interval_results) {
    double weight_sum = 0.0;
    int covered = 0;
    std::map<std::string, double> local_sum;
    int local_n = 0;
    for (const auto& rec : state.records) {
      if (rec.index <= prev_end || rec.index > interval.end_index) continue;
      weight_sum += weight_for_chapter(position.at(rec.index), total);
      ++covered;
      if (!rec.scored) continue;
      for (const auto& name : dim_names()) {
        local_sum[name] += rec.partial.by_name.at(name);
      }
      ++local_n;
    }
    if (covered == 0) {
      raise(Errc::precondition_failed, "interval through chapter " +
                                           std::to_string(interval.end_index) +
                                           " covers no records");
    }
    const double alpha = weight_sum / covered;
    for (const auto& name : dim_names()) {
      const double global = interval.global.by_name.at(name);
      // With no usable local scores the interval falls back to its global
      // score alone.
      const double blended =
          local_n == 0 ? global
                       : alpha * (local_sum[name] / local_n) + (1.0 - alpha) * global;
      acc.by_name[name] += blended;
    }
    prev_end = interval.end_index;
  }

  for (const auto& name : dim_names()) {
    acc.by_name[name] /= static_cast<double>(state.interval_results.size());
  }
  return acc;
}

QualityDims combine_auto_human(const QualityDims& a, const QualityDims& h) {
  QualityDims v;
  for (const auto& name : dim_names()) {
    auto ai = a.by_name.find(name);
    auto hi = h.by_name.find(name);
    if (ai == a.by_name.end() || hi == h.by_name.end()) {
      raise(Errc::precondition_failed, "dimension " + name + " missing");
    }
    v.by_name[name] = 0.5 * ai->second + 0.5 * hi->second;
  }
  return v;
}

double quality_score(const QualityDims& v, const std::map<std::string, double>& weights) {
  double total = 0.0;
  for (const auto& name : dim_names()) {
    auto vi = v.by_name.find(name);
    auto wi = weights.find(name);
    if (vi == v.by_name.end() || wi == weights.end()) {
      raise(Errc::precondition_failed, "dimension " + name + " missing");
    }
    total += wi->second * vi->second;
  }
  return total;
}

double quality_score(const QualityDims& v) { return quality_score(v, dim_weights()); }

double length_score(const LengthInputs& inputs) {
  if (inputs.c_baseline < 1) {
    raise(Errc::precondition_failed, "chapter baseline must be positive");
  }
  const double word_term = std::log(1.0 + static_cast<double>(inputs.words) / 1000.0);
  const double chapter_term =
      std::min(1.0, static_cast<double>(inputs.chapters) / inputs.c_baseline);
  return 0.5 * (word_term + chapter_term);
}

double qls(std::optional<double> s_q_human, double s_q_auto, double s_l) {
  const double s_q = s_q_human ? 0.5 * (*s_q_human + s_q_auto) : s_q_auto;
  return 0.5 * (s_q + s_l);
}

namespace {

struct ChapterFile {
  int index = 0;
  fs::path path;
};

std::vector<ChapterFile> scan_chapter_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    raise(Errc::empty_directory, "no chapter directory at " + dir.string());
  }
  static const std::regex pattern("^chapter_([0-9]{1,9})\\.(md|txt)$");
  std::vector<ChapterFile> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("chapter_", 0) != 0) continue;
    std::smatch m;
    if (!std::regex_match(name, m, pattern)) {
      raise(Errc::malformed_chapter_filename, name);
    }
    files.push_back({std::stoi(m[1].str()), entry.path()});
  }
  std::sort(files.begin(), files.end(),
            [](const ChapterFile& a, const ChapterFile& b) { return a.index < b.index; });
  for (std::size_t i = 1; i < files.size(); ++i) {
    if (files[i].index == files[i - 1].index) {
      raise(Errc::malformed_chapter_filename,
            "duplicate chapter index " + std::to_string(files[i].index));
    }
  }
  return files;
}

QualityDims parse_human_scores(const std::string& path) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(read_file(path));
  } catch (const nlohmann::ordered_json::parse_error& e) {
    raise(Errc::human_scores_mismatch, std::string("unreadable scores file: ") + e.what());
  }
  if (!doc.is_array() || doc.empty()) {
    raise(Errc::human_scores_mismatch, "expected a non-empty array of rater records");
  }
  QualityDims mean;
  for (const auto& name : dim_names()) mean.by_name[name] = 0.0;
  for (const auto& rater : doc) {
    if (!rater.is_object() || rater.size() != dim_names().size()) {
      raise(Errc::human_scores_mismatch, "each rater must score exactly the seven dimensions");
    }
    for (const auto& name : dim_names()) {
      if (!rater.contains(name) || !rater.at(name).is_number()) {
        raise(Errc::human_scores_mismatch, "rater record missing " + name);
      }
      const double x = rater.at(name).get<double>();
      if (x < 0.0 || x > 10.0) {
        raise(Errc::human_scores_mismatch, name + " outside [0,10]");
      }
      if (std::fabs(x * 100.0 - std::round(x * 100.0)) > 1e-6) {
        raise(Errc::human_scores_mismatch, name + " has more than 2 decimals");
      }
      mean.by_name[name] += x;
    }
  }
  for (const auto& name : dim_names()) {
    mean.by_name[name] /= static_cast<double>(doc.size());
  }
  return mean;
}

LengthInputs measure_length(const fs::path& dir, const std::vector<ChapterFile>& files,
                            int c_baseline) {
  LengthInputs len;
  len.c_baseline = c_baseline;
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    nlohmann::ordered_json doc;
    try {
      doc = nlohmann::ordered_json::parse(read_file(manifest.string()));
    } catch (const nlohmann::ordered_json::parse_error& e) {
      raise(Errc::corrupt_document, std::string("manifest: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("total_words") ||
        !doc.at("total_words").is_number_unsigned() || !doc.contains("chapters") ||
        !doc.at("chapters").is_number_unsigned()) {
      raise(Errc::corrupt_document, "manifest lacks total_words/chapters counts");
    }
    len.words = doc.at("total_words").get<std::size_t>();
    len.chapters = doc.at("chapters").get<std::size_t>();
    return len;
  }
  for (const auto& file : files) {
    std::string text = read_file(file.path.string());
    if (!text.empty() && text[0] == '#') {
      const std::size_t eol = text.find('\n');
      text = eol == std::string::npos ? std::string() : text.substr(eol + 1);
    }
    len.words += count_words(text);
  }
  len.chapters = files.size();
  return len;
}

nlohmann::ordered_json dims_json(const QualityDims& d) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& name : dim_names()) out[name] = d.by_name.at(name);
  return out;
}

}  // namespace

EvalReport run_hnes(const std::string& chap_dir, int interval, int start_idx, int end_idx,
                    int c_baseline, const std::string& human_scores_file, Gateway& gateway) {
  if (interval < 1) {
    raise(Errc::precondition_failed, "interval must be positive");
  }
  if (c_baseline < 1) {
    raise(Errc::precondition_failed, "chapter baseline must be positive");
  }
  if (start_idx > 0 && end_idx > 0 && start_idx > end_idx) {
    raise(Errc::precondition_failed, "start index exceeds end index");
  }

  fs::path dir(chap_dir);
  if (dir.filename().empty()) dir = dir.parent_path();

  std::vector<ChapterFile> files = scan_chapter_files(dir);
  if (files.empty()) {
    raise(Errc::empty_directory, "no chapter files in " + dir.string());
  }
  std::erase_if(files, [&](const ChapterFile& f) {
    return (start_idx > 0 && f.index < start_idx) || (end_idx > 0 && f.index > end_idx);
  });
  if (files.empty()) {
    raise(Errc::empty_directory, "no chapter files in the requested range");
  }

  EvalState state;
  int processed = 0;
  for (const auto& file : files) {
    gateway.log().set_chapter(file.index);
    analyze_chapter(state, file.index, read_file(file.path.string()), gateway);
    ++processed;
    if (processed % interval == 0) {
      evaluate_interval(state, gateway);
    }
  }
  if (state.interval_results.empty() ||
      state.interval_results.back().end_index != state.records.back().index) {
    gateway.log().note("info", "final flush global evaluation through chapter " +
                                   std::to_string(state.records.back().index));
    evaluate_interval(state, gateway);
  }

  EvalReport report;
  report.auto_scores = aggregate_dimension_scores(state, processed);
  if (!human_scores_file.empty()) {
    report.human = parse_human_scores(human_scores_file);
    report.auto_only = false;
    report.combined = combine_auto_human(report.auto_scores, *report.human);
  } else {
    report.combined = report.auto_scores;
  }

  const double s_q_auto = quality_score(report.auto_scores);
  std::optional<double> s_q_human;
  if (report.human) s_q_human = quality_score(*report.human);
  report.s_q = s_q_human ? 0.5 * (*s_q_human + s_q_auto) : s_q_auto;

  report.length = measure_length(dir, files, c_baseline);
  report.s_l = length_score(report.length);
  report.qls = qls(s_q_human, s_q_auto, report.s_l);
  for (const auto& interval_result : state.interval_results) {
    report.interval_ends.push_back(interval_result.end_index);
  }

  nlohmann::ordered_json doc;
  doc["format_version"] = 1;
  doc["kind"] = "evaluation_report";
  doc["auto_only"] = report.auto_only;
  doc["interval_ends"] = report.interval_ends;
  doc["c_baseline"] = c_baseline;
  doc["length"] = {{"words", report.length.words}, {"chapters", report.length.chapters}};
  nlohmann::ordered_json scores = nlohmann::ordered_json::object();
  scores["auto"] = dims_json(report.auto_scores);
  if (report.human) scores["human"] = dims_json(*report.human);
  scores["combined"] = dims_json(report.combined);
  doc["scores"] = std::move(scores);
  doc["s_q"] = report.s_q;
  doc["s_l"] = report.s_l;
  doc["qls"] = report.qls;
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const auto& rec : state.records) {
    nlohmann::ordered_json r;
    r["index"] = rec.index;
    r["scored"] = rec.scored;
    if (rec.scored) {
      r["plot_summary"] = rec.features.plot_summary;
      r["objective_conditions"] = rec.features.objective_conditions;
      r["partial"] = dims_json(rec.partial);
    }
    records.push_back(std::move(r));
  }
  doc["records"] = std::move(records);

  const fs::path report_path =
      dir.parent_path() / (dir.filename().string() + "_evaluation.json");
  write_file_atomic(report_path.string(), doc.dump(2) + "\n");
  report.report_path = report_path.string();
  return report;
}

}  // namespace creagentive
