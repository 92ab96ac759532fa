#pragma once

#include <stdexcept>
#include <string>

namespace creagentive {

// Machine-parsable error codes surfaced by every module. The CLI prints a
// failing command as a single line "error: <CodeName>: <message>".
enum class Errc {
  precondition_failed,
  duplicate_name,
  invalid_chapter,
  unknown_character,
  non_monotone_chapter,
  strength_out_of_range,
  unknown_scene,
  empty_participants,
  out_of_order_snapshot,
  invalid_range,
  timeout,
  http_status,
  script_exhausted,
  missing_binding,
  unparseable,
  schema_violation,
  no_characters,
  non_empty_prototype,
  empty_candidate_set,
  unknown_event_id,
  coverage_gap,
  empty_body,
  non_contiguous_chapters,
  empty_directory,
  malformed_chapter_filename,
  human_scores_mismatch,
  no_scored_chapters,
  unsupported_version,
  corrupt_document,
  config_mismatch,
  locked,
  io_error,
};

const char* errc_name(Errc c);

class EngineError : public std::runtime_error {
 public:
  EngineError(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  EngineError(Errc code, const std::string& message, int status)
      : std::runtime_error(message), code_(code), status_(status) {}

  Errc code() const { return code_; }
  const char* code_name() const { return errc_name(code_); }
  // HTTP status for Errc::http_status, 0 otherwise.
  int status() const { return status_; }

 private:
  Errc code_;
  int status_ = 0;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw EngineError(code, message);
}

}  // namespace creagentive
