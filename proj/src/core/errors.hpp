#pragma once

#include <stdexcept>
#include <string>

namespace wlm {

enum class ErrorCode {
  domain = 1,      // point/geodesic left the chart ball, preconditions violated
  solver = 2,      // iterative solver failed to converge
  degenerate = 3,  // surface lost star-shape or SPD induced metric
  config = 4,      // bad configuration / schema violation
  io = 5,          // file errors
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

}  // namespace wlm
