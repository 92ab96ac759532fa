#include "creagentive/structured.hpp"

#include <cmath>
#include <cstdlib>

namespace creagentive {

std::string PromptTemplate::render(const std::map<std::string, std::string>& bindings) const {
  std::string out;
  out.reserve(body.size());
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t open = body.find("{{", pos);
    if (open == std::string::npos) {
      out.append(body, pos, std::string::npos);
      break;
    }
    std::size_t close = body.find("}}", open + 2);
    if (close == std::string::npos) {
      out.append(body, pos, std::string::npos);
      break;
    }
    out.append(body, pos, open - pos);
    const std::string key = body.substr(open + 2, close - open - 2);
    auto it = bindings.find(key);
    if (it == bindings.end()) {
      raise(Errc::missing_binding, "template " + name + " has no binding for " + key);
    }
    out += it->second;
    pos = close + 2;
  }
  return out;
}

namespace {

// Balanced-object scan starting at `open` (which points at '{'). Returns the
// end index one past the matching brace, or npos.
std::size_t balanced_end(const std::string& s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string::npos;
}

bool try_extract(const std::string& text, std::string& out) {
  std::size_t from = 0;
  while (true) {
    std::size_t open = text.find('{', from);
    if (open == std::string::npos) return false;
    std::size_t end = balanced_end(text, open);
    if (end != std::string::npos) {
      std::string candidate = text.substr(open, end - open);
      if (nlohmann::ordered_json::accept(candidate)) {
        out = std::move(candidate);
        return true;
      }
    }
    from = open + 1;
  }
}

}  // namespace

std::string extract_object(const std::string& raw) {
  // Prefer the contents of the first code fence when one is present.
  std::size_t fence = raw.find("```");
  if (fence != std::string::npos) {
    std::size_t body_start = raw.find('\n', fence);
    if (body_start != std::string::npos) {
      std::size_t fence_end = raw.find("```", body_start);
      if (fence_end != std::string::npos) {
        std::string inner = raw.substr(body_start + 1, fence_end - body_start - 1);
        std::string found;
        if (try_extract(inner, found)) return found;
      }
    }
  }
  std::string found;
  if (try_extract(raw, found)) return found;
  raise(Errc::unparseable, "no structured object in reply");
}

nlohmann::ordered_json parse_structured(const std::string& raw, const Schema& schema) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::parse(extract_object(raw));

  for (const auto& ptr : schema.required) {
    if (!doc.contains(nlohmann::ordered_json::json_pointer(ptr))) {
      raise(Errc::schema_violation, schema.name + ": missing " + ptr);
    }
  }

  for (const auto& spec : schema.scores) {
    nlohmann::ordered_json::json_pointer at(spec.at);
    if (!doc.contains(at) || !doc.at(at).is_object()) {
      raise(Errc::schema_violation, schema.name + ": missing score block " + spec.at);
    }
    auto& block = doc.at(at);
    for (const auto& key : spec.keys) {
      if (!block.contains(key)) {
        raise(Errc::schema_violation, schema.name + ": missing score " + spec.at + "/" + key);
      }
      auto& v = block.at(key);
      double x = 0.0;
      if (v.is_number()) {
        x = v.get<double>();
      } else if (v.is_string()) {
        const std::string s = v.get<std::string>();
        char* end = nullptr;
        x = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0') {
          raise(Errc::schema_violation, schema.name + ": non-numeric score " + key);
        }
      } else {
        raise(Errc::schema_violation, schema.name + ": non-numeric score " + key);
      }
      if (x < spec.lo || x > spec.hi) {
        raise(Errc::schema_violation, schema.name + ": score " + key + " outside [" +
                                          std::to_string(spec.lo) + "," +
                                          std::to_string(spec.hi) + "]");
      }
      if (spec.two_decimals && std::fabs(x * 100.0 - std::round(x * 100.0)) > 1e-6) {
        raise(Errc::schema_violation, schema.name + ": score " + key + " has more than 2 decimals");
      }
      block[key] = x;
    }
  }
  return doc;
}

}  // namespace creagentive
