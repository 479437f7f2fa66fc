#pragma once

#include <stdexcept>
#include <string>

namespace bnsynth {

enum class ErrorKind {
  usage,        // bad arguments or configuration
  io,           // unreadable / malformed input files
  computation,  // a numerical or algorithmic failure
  undefined     // a statistic that is undefined on the given data
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Thrown when a statistic cannot be evaluated on a dataset, e.g. an empty
// conditioning event. Synthesis records these instead of dropping them.
class UndefinedStatistic : public Error {
 public:
  explicit UndefinedStatistic(const std::string& what)
      : Error(ErrorKind::undefined, what) {}
};

[[noreturn]] inline void usage_error(const std::string& msg) {
  throw Error(ErrorKind::usage, msg);
}

[[noreturn]] inline void io_error(const std::string& msg) {
  throw Error(ErrorKind::io, msg);
}

[[noreturn]] inline void computation_error(const std::string& msg) {
  throw Error(ErrorKind::computation, msg);
}

}  // namespace bnsynth
