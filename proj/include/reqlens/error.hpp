#pragma once

#include <stdexcept>
#include <string>

namespace reqlens {

enum class ErrorKind {
  invalid_input,   // malformed file, bad argument
  not_found,       // unknown term, conflict, document or project
  invalid_state,   // transition not allowed from the current status
  duplicate,       // identifier already registered
  open_conflicts,  // export attempted while conflicts are unresolved
  schema,          // persisted knowledge base failed validation
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace reqlens
