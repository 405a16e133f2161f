#pragma once

#include <stdexcept>
#include <string>

namespace drillsim {

enum class ErrorKind { Config, Pipeline, Segmentation, Planner, Workflow, Io };

const char* to_string(ErrorKind kind);

// Every failure carries the kind (mapped to CLI exit codes) and the stage that
// raised it, e.g. "detector/segment".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& message);

  ErrorKind kind() const { return kind_; }
  const std::string& stage() const { return stage_; }

 private:
  ErrorKind kind_;
  std::string stage_;
};

}  // namespace drillsim
