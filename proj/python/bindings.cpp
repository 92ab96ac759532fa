// Python surface for the engine: the prototype graph, the scoring math,
// chapter evaluation over a scripted backend, and the command-line entry.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "creagentive/cli.hpp"
#include "creagentive/errors.hpp"
#include "creagentive/gateway.hpp"
#include "creagentive/hnes.hpp"
#include "creagentive/prototype.hpp"
#include "creagentive/store.hpp"

namespace py = pybind11;
using namespace creagentive;
using nlohmann::ordered_json;

namespace {

QualityDims dims_from_map(const std::map<std::string, double>& scores) {
  QualityDims d;
  d.by_name = scores;
  return d;
}

std::string limited_view_json(const StoryPrototype& proto, const std::string& character_id,
                              int chapter) {
  const LimitedView view = proto.limited_view(character_id, chapter);
  ordered_json j;
  j["character"] = {{"id", view.self.id}, {"name", view.self.name}};
  j["chapter"] = view.chapter;
  j["story"] = view.meta.title;
  j["relationships"] = ordered_json::array();
  for (const auto& r : view.relationships) {
    j["relationships"].push_back({{"src", r.src},
                                  {"dst", r.dst},
                                  {"kind", r.kind},
                                  {"strength", r.strength},
                                  {"direction", direction_name(r.direction)},
                                  {"chapter", r.chapter}});
  }
  j["events"] = ordered_json::array();
  for (const auto& e : view.events) {
    j["events"].push_back({{"id", e.id},
                           {"chapter", e.chapter},
                           {"description", e.description},
                           {"location", e.scene.location},
                           {"emotional_impact", e.own.emotional_impact},
                           {"impact_intensity", e.own.impact_intensity},
                           {"co_participants", e.co_participants}});
  }
  return j.dump(2);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-agent long-form story engine: graph, scoring, evaluation, CLI.";

  static py::exception<EngineError> engine_error(m, "EngineError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const EngineError& e) {
      const std::string message = std::string(e.code_name()) + ": " + e.what();
      PyErr_SetString(engine_error.ptr(), message.c_str());
    }
  });

  py::class_<StoryPrototype>(m, "Prototype")
      .def(py::init<>())
      .def_static("load", &load_prototype, py::arg("path"))
      .def_static("from_text", &StoryPrototype::deserialize, py::arg("text"))
      .def("save",
           [](const StoryPrototype& p, const std::string& path) { save_prototype(p, path); },
           py::arg("path"))
      .def("to_text", &StoryPrototype::serialize)
      .def("head_chapter", &StoryPrototype::head_chapter)
      .def("set_meta",
           [](StoryPrototype& p, const std::string& title, const std::string& background,
              const std::string& long_term_goal) {
             p.set_meta({title, background, long_term_goal});
           },
           py::arg("title"), py::arg("background") = "", py::arg("long_term_goal") = "")
      .def("add_character", &StoryPrototype::add_character, py::arg("name"),
           py::arg("static_attrs") = std::map<std::string, std::string>{},
           py::arg("chapter") = 0)
      .def("add_scene", &StoryPrototype::add_scene, py::arg("location"),
           py::arg("time_label"), py::arg("environment") = "", py::arg("chapter") = 0)
      .def("add_event",
           [](StoryPrototype& p, int chapter, const std::string& description,
              const std::vector<std::string>& consequences,
              const std::vector<std::tuple<std::string, std::string, double>>& participants,
              const std::string& scene_id) {
             std::vector<Participation> parts;
             for (const auto& [character, impact, intensity] : participants) {
               parts.push_back({character, impact, intensity});
             }
             return p.add_event(chapter, description, consequences, parts, scene_id);
           },
           py::arg("chapter"), py::arg("description"),
           py::arg("consequences") = std::vector<std::string>{}, py::arg("participants"),
           py::arg("scene_id"))
      .def("upsert_relationship",
           [](StoryPrototype& p, const std::string& src, const std::string& dst,
              const std::string& kind, double strength, const std::string& direction,
              int chapter) {
             return p.upsert_relationship(src, dst, kind, strength,
                                          direction_from(direction), chapter);
           },
           py::arg("src"), py::arg("dst"), py::arg("kind"), py::arg("strength"),
           py::arg("direction") = "mutual", py::arg("chapter") = 0)
      .def("snapshot_chapter",
           [](StoryPrototype& p, int chapter) { p.snapshot_chapter(chapter); },
           py::arg("chapter"))
      .def("validate",
           [](const StoryPrototype& p) {
             std::vector<std::map<std::string, std::string>> out;
             for (const auto& v : p.validate()) {
               out.push_back(
                   {{"code", v.code}, {"subject", v.subject}, {"detail", v.detail}});
             }
             return out;
           })
      .def("snapshot_json",
           [](const StoryPrototype& p, int chapter) {
             return p.snapshot_view(chapter).serialize();
           },
           py::arg("chapter"))
      .def("limited_view_json", &limited_view_json, py::arg("character_id"),
           py::arg("chapter"));

  m.def("dim_names", &dim_names);
  m.def("dim_weights", &dim_weights);
  m.def(
      "quality_score",
      [](const std::map<std::string, double>& scores) {
        return quality_score(dims_from_map(scores));
      },
      py::arg("scores"));
  m.def(
      "combine_scores",
      [](const std::map<std::string, double>& auto_scores,
         const std::map<std::string, double>& human_scores) {
        return combine_auto_human(dims_from_map(auto_scores), dims_from_map(human_scores))
            .by_name;
      },
      py::arg("auto_scores"), py::arg("human_scores"));
  m.def(
      "length_score",
      [](std::size_t words, std::size_t chapters, int c_baseline) {
        return length_score({words, chapters, c_baseline});
      },
      py::arg("words"), py::arg("chapters"), py::arg("c_baseline") = 10);
  m.def("qls", &qls, py::arg("s_q_human"), py::arg("s_q_auto"), py::arg("s_l"));
  m.def("weight_for_chapter", &weight_for_chapter, py::arg("index"), py::arg("total"));

  m.def(
      "evaluate_chapters",
      [](const std::string& chapter_dir, const std::string& script_path, int interval,
         int start_idx, int end_idx, int c_baseline, const std::string& human_scores,
         const std::string& transcript_path) {
        auto backend = std::make_shared<ScriptedBackend>();
        load_script(*backend, script_path);
        auto log = transcript_path.empty()
                       ? std::make_shared<TranscriptLog>()
                       : std::make_shared<TranscriptLog>(transcript_path);
        Gateway gateway(backend, log);
        EvalReport report = run_hnes(chapter_dir, interval, start_idx, end_idx, c_baseline,
                                     human_scores, gateway);
        return report.report_path;
      },
      py::arg("chapter_dir"), py::arg("script_path"), py::arg("interval") = 10,
      py::arg("start_idx") = 0, py::arg("end_idx") = 0, py::arg("c_baseline") = 10,
      py::arg("human_scores") = "", py::arg("transcript_path") = "",
      "Score a directory of chapter files against a scripted backend; returns "
      "the path of the written report.");

  m.def(
      "run_command",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv;
        argv.push_back("creagentive");
        for (const auto& a : args) argv.push_back(a.c_str());
        return run_cli(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"),
      "Run the command-line interface with the given arguments; returns its exit code.");
}
