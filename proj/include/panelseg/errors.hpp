#ifndef PANELSEG_ERRORS_HPP
#define PANELSEG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace panelseg {

// Error taxonomy shared by the C++ core and the C API status codes.
enum class ErrorCode {
  io = 1,          // file missing / unreadable / unwritable
  parse = 2,       // malformed CSV or plan text
  dimension = 3,   // window/index/shape violations
  domain = 4,      // parameter outside its admissible range
  degenerate = 5,  // data degenerate for the requested estimator
  config = 6,      // invalid configuration
  internal = 7,    // should-not-happen
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorCode::io, w) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& w) : Error(ErrorCode::parse, w) {}
};
struct DimensionError : Error {
  explicit DimensionError(const std::string& w) : Error(ErrorCode::dimension, w) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorCode::domain, w) {}
};
struct DegenerateError : Error {
  explicit DegenerateError(const std::string& w) : Error(ErrorCode::degenerate, w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCode::config, w) {}
};
struct InternalError : Error {
  explicit InternalError(const std::string& w) : Error(ErrorCode::internal, w) {}
};

}  // namespace panelseg

#endif  // PANELSEG_ERRORS_HPP
