#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "creagentive/errors.hpp"

namespace creagentive {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_error, "cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Write to a sibling temp file, then rename over the target so readers never
// see a half-written file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::io_error, "cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) raise(Errc::io_error, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    raise(Errc::io_error, "cannot rename " + tmp + " to " + path + ": " + ec.message());
  }
}

}  // namespace creagentive
