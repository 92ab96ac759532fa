#include "creagentive/init_workflow.hpp"

#include <sstream>

#include "creagentive/prompts.hpp"

namespace creagentive {

namespace {

std::string first_words(const std::string& text, int n) {
  std::istringstream in(text);
  std::string word, out;
  for (int i = 0; i < n && in >> word; ++i) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

std::string opt_text(const nlohmann::ordered_json& j, const char* key) {
  if (!j.contains(key)) return "";
  if (!j[key].is_string()) {
    raise(Errc::schema_violation, std::string("init: ") + key + " must be text");
  }
  return j[key].get<std::string>();
}

InitialConfig map_init(const nlohmann::ordered_json& doc) {
  InitialConfig cfg;
  cfg.title = opt_text(doc, "title");
  cfg.environment = opt_text(doc, "environment");
  if (!doc["background"].is_string() || !doc["long_term_goal"].is_string()) {
    raise(Errc::schema_violation, "init: background and long_term_goal must be text");
  }
  cfg.background = doc["background"].get<std::string>();
  cfg.long_term_goal = doc["long_term_goal"].get<std::string>();
  if (cfg.long_term_goal.empty()) raise(Errc::schema_violation, "init: empty long_term_goal");

  if (!doc["characters"].is_array() || doc["characters"].empty()) {
    raise(Errc::schema_violation, "init: characters must be a non-empty array");
  }
  for (const auto& j : doc["characters"]) {
    ConfigCharacter c;
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string()) {
      raise(Errc::schema_violation, "init: character entry needs a name");
    }
    c.name = j["name"].get<std::string>();
    if (c.name.empty()) raise(Errc::schema_violation, "init: empty character name");
    if (j.contains("static_attrs")) {
      if (!j["static_attrs"].is_object()) {
        raise(Errc::schema_violation, "init: static_attrs must be an object");
      }
      for (const auto& [k, v] : j["static_attrs"].items()) {
        if (!v.is_string()) {
          raise(Errc::schema_violation, "init: static_attrs values must be text");
        }
        c.static_attrs[k] = v.get<std::string>();
      }
    }
    cfg.characters.push_back(std::move(c));
  }

  auto named = [&cfg](const std::string& name) {
    for (const auto& c : cfg.characters)
      if (c.name == name) return true;
    return false;
  };
  if (doc.contains("relationships")) {
    if (!doc["relationships"].is_array()) {
      raise(Errc::schema_violation, "init: relationships must be an array");
    }
    for (const auto& j : doc["relationships"]) {
      ConfigRelationship r;
      for (const char* key : {"src_name", "dst_name", "kind"}) {
        if (!j.contains(key) || !j[key].is_string()) {
          raise(Errc::schema_violation, std::string("init: relationship needs ") + key);
        }
      }
      r.src_name = j["src_name"].get<std::string>();
      r.dst_name = j["dst_name"].get<std::string>();
      r.kind = j["kind"].get<std::string>();
      if (!named(r.src_name) || !named(r.dst_name)) {
        raise(Errc::schema_violation,
              "init: relationship endpoints must name listed characters");
      }
      if (!valid_relationship_kind(r.kind)) {
        raise(Errc::schema_violation, "init: invalid relationship kind " + r.kind);
      }
      if (j.contains("strength")) {
        if (!j["strength"].is_number()) {
          raise(Errc::schema_violation, "init: strength must be a number");
        }
        r.strength = j["strength"].get<double>();
        if (*r.strength < 0.0 || *r.strength > 1.0) {
          raise(Errc::schema_violation, "init: strength outside [0,1]");
        }
      }
      if (j.contains("direction")) {
        const std::string d = j["direction"].is_string() ? j["direction"].get<std::string>() : "";
        if (d != "directed" && d != "mutual") {
          raise(Errc::schema_violation, "init: direction must be directed or mutual");
        }
        r.direction = direction_from(d);
      }
      cfg.relationships.push_back(std::move(r));
    }
  }
  return cfg;
}

}  // namespace

InitialConfig extract_config(const std::string& user_text, Gateway& gateway) {
  if (user_text.empty()) raise(Errc::precondition_failed, "empty story brief");
  ChatRequest req;
  req.user = prompts::init().render({{"brief", user_text}});
  req.temperature = 0.1;
  req.max_tokens = 4096;
  req.tag = "init";
  InitialConfig cfg;
  gateway.complete_structured(req, prompts::init_schema(),
                              [&cfg](const nlohmann::ordered_json& doc) { cfg = map_init(doc); });
  return cfg;
}

InitialConfig complete_config(InitialConfig config) {
  if (config.characters.empty()) {
    raise(Errc::no_characters, "config has no characters to build on");
  }
  if (config.long_term_goal.empty()) {
    raise(Errc::precondition_failed, "config needs a long_term_goal");
  }
  if (config.title.empty()) config.title = first_words(config.background, 6);
  if (config.environment.empty()) config.environment = config.background;
  for (auto& r : config.relationships) {
    if (!r.strength) r.strength = 0.5;
  }
  return config;
}

void materialize(const InitialConfig& config, StoryPrototype& proto) {
  if (!proto.empty()) raise(Errc::non_empty_prototype, "prototype already populated");
  StoryMeta meta;
  meta.title = config.title;
  meta.background = config.background;
  meta.long_term_goal = config.long_term_goal;
  proto.set_meta(std::move(meta));
  std::map<std::string, std::string> ids;
  for (const auto& c : config.characters) {
    ids[c.name] = proto.add_character(c.name, c.static_attrs, 0);
  }
  for (const auto& r : config.relationships) {
    proto.upsert_relationship(ids.at(r.src_name), ids.at(r.dst_name), r.kind,
                              r.strength.value_or(0.5), r.direction, 0);
  }
  proto.snapshot_chapter(0);
}

}  // namespace creagentive
