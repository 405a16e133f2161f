#include "drillsim/error.hpp"

namespace drillsim {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Pipeline: return "pipeline";
    case ErrorKind::Segmentation: return "segmentation";
    case ErrorKind::Planner: return "planner";
    case ErrorKind::Workflow: return "workflow";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, std::string stage, const std::string& message)
    : std::runtime_error(stage + ": " + message), kind_(kind), stage_(std::move(stage)) {}

}  // namespace drillsim
