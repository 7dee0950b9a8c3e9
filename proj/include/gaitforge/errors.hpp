#pragma once

#include <stdexcept>
#include <string>

namespace gaitforge {

enum class ErrorKind {
  kInvalidTime,
  kInvalidClock,
  kDomain,
  kDimension,
  kParameter,
  kObservation,
  kCommand,
  kState,
  kConfig,
  kCheckpoint,
  kTrace,
  kIo,
  kProtocol,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidTime: return "invalid-time";
    case ErrorKind::kInvalidClock: return "invalid-clock";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kObservation: return "observation";
    case ErrorKind::kCommand: return "command";
    case ErrorKind::kState: return "state";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kCheckpoint: return "checkpoint";
    case ErrorKind::kTrace: return "trace";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kProtocol: return "protocol";
  }
  return "unknown";
}

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gaitforge
