#pragma once

#include <stdexcept>
#include <string>

namespace retrialq {

// Values double as CLI exit codes for the first four.
enum class Status : int {
  ok = 0,
  invalid_config = 1,
  unstable = 2,
  convergence = 3,
  budget = 4,
  io = 5,
  argument = 6,
  internal = 7,
};

class Error : public std::runtime_error {
 public:
  Error(Status status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  Status status() const noexcept { return status_; }

 private:
  Status status_;
};

}  // namespace retrialq
