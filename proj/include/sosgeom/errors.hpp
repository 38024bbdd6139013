#pragma once

#include <stdexcept>
#include <string>

#include "sosgeom/sdp.hpp"

namespace sosgeom {

// Raised when an operation needs an optimal solve and the solver reports
// otherwise; carries the status so callers can map it to exit codes.
class SolverError : public std::runtime_error {
 public:
  SolverError(SolveStatus status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  SolveStatus status() const { return status_; }

 private:
  SolveStatus status_;
};

}  // namespace sosgeom
